#ifndef VMORPH_ERROR_HPP
#define VMORPH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vmorph {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  ok = 0,
  input = 2,     ///< unreadable / malformed input, bad parameters
  contract = 3,  ///< data violates an operation's contract (e.g. fragmentation)
  internal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::input, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ExitCode::contract, what) {}
};

/// Malformed file; `offset` is a 1-based line for text formats, a byte offset for binary.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset, bool binary)
      : InputError((binary ? "byte " : "line ") + std::to_string(offset) + ": " + what),
        offset_(offset),
        binary_(binary) {}
  std::size_t offset() const noexcept { return offset_; }
  bool binary() const noexcept { return binary_; }

 private:
  std::size_t offset_;
  bool binary_;
};

class DegenerateFaceError : public InputError {
 public:
  explicit DegenerateFaceError(std::vector<std::size_t> faces)
      : InputError(describe(faces)), faces_(std::move(faces)) {}
  const std::vector<std::size_t>& faces() const noexcept { return faces_; }

 private:
  static std::string describe(const std::vector<std::size_t>& faces) {
    std::string s = "degenerate or out-of-range faces:";
    for (std::size_t i = 0; i < faces.size() && i < 20; ++i) s += " " + std::to_string(faces[i]);
    if (faces.size() > 20) s += " ... (" + std::to_string(faces.size()) + " total)";
    return s;
  }
  std::vector<std::size_t> faces_;
};

#define VMORPH_CONTRACT_ERROR(Name)                                        \
  class Name : public ContractError {                                      \
   public:                                                                 \
    explicit Name(const std::string& what) : ContractError(what) {}        \
  }

VMORPH_CONTRACT_ERROR(DisconnectedError);
VMORPH_CONTRACT_ERROR(FragmentationError);
VMORPH_CONTRACT_ERROR(RankDeficiencyError);
VMORPH_CONTRACT_ERROR(CollinearityError);
VMORPH_CONTRACT_ERROR(NonAcuteError);
VMORPH_CONTRACT_ERROR(GridMismatchError);
VMORPH_CONTRACT_ERROR(InsufficientOverlapError);
VMORPH_CONTRACT_ERROR(TopologicalLockError);
VMORPH_CONTRACT_ERROR(MissingNormalError);

#undef VMORPH_CONTRACT_ERROR

/// Collects non-fatal warnings emitted by the pipeline stages.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag) diag->warn(std::move(message));
}

}  // namespace vmorph

#endif  // VMORPH_ERROR_HPP
