#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string metric;
  std::string format;
  bool all_metrics = false;
  bool no_scale = false;
  double spacing = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> paths;
};

int run_command(const std::string& command, const Flags& f, const CLI::App& sub) {
  using namespace vmorph;
  json config = cli::default_config();
  if (!f.config.empty()) {
    const std::filesystem::path path = f.config;
    config = cli::effective_config(cli::load_config_file(path), path.parent_path());
  }

  json over = json::object();
  const auto roles = cli::positional_roles(command);
  if (f.paths.size() > roles.size())
    throw InputError(command + " takes at most " + std::to_string(roles.size()) + " mesh paths");
  for (std::size_t i = 0; i < f.paths.size(); ++i) over["inputs"][roles[i]] = f.paths[i];
  if (sub.count("--out")) over["output"] = f.out;
  if (sub.count("--metric")) over["register"]["metric"] = f.metric;
  if (sub.count("--all-metrics")) over["register"]["all_metrics"] = true;
  if (sub.count("--no-scale")) over["register"]["allow_scale"] = false;
  if (sub.count("--spacing"))
    for (const std::string& block : cli::spacing_keys(command)) over[block]["spacing"] = f.spacing;
  if (sub.count("--seed")) over["seed"] = f.seed;
  if (sub.count("--format")) over["format"] = f.format;
  cli::apply_overrides(config, over);

  cli::Run run(command, config);
  cli::commands().at(command)(run);
  run.write_manifest();
  for (const std::string& w : run.warnings()) std::cerr << "vmorph: warning: " << w << "\n";
  std::cout << "vmorph " << command << ": wrote " << run.out_dir().string() << "/manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphometry of plate meshes: isolation, registration, assessment and shape analysis"};
  app.set_version_flag("--version", std::string(VMORPH_VERSION));
  app.require_subcommand(1);

  Flags flags;
  const std::map<std::string, std::string> help = {
      {"isolate", "Isolate the sound board and back of a closed body mesh"},
      {"register", "Register a moving mesh onto a reference under a similarity transform"},
      {"assess", "Error distribution of a registered pair"},
      {"simplify", "Decimate a mesh and compare height grids with the original"},
      {"symmetry", "Estimate the average plane of symmetry of the two plates"},
      {"contours", "Contour lines of both plates in symmetry coordinates"},
      {"asymmetry", "Asymmetry field between sound board and back"},
      {"channel", "Channel of minima along the plate contours"},
      {"pipeline", "Run every stage in order"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, text] : help) {
    CLI::App* sub = app.add_subcommand(name, text);
    sub->add_option("paths", flags.paths, "Mesh paths (" + [&] {
      std::string s;
      for (const auto& r : vmorph::cli::positional_roles(name)) s += (s.empty() ? "" : ", ") + r;
      return s;
    }() + ")");
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--metric", flags.metric, "point_to_point | point_to_point_sq | point_to_plane_sq");
    sub->add_flag("--all-metrics", flags.all_metrics, "Register under every metric and both ICP variants");
    sub->add_flag("--no-scale", flags.no_scale, "Freeze the scale factor at its initial value");
    sub->add_option("--spacing", flags.spacing, "Spacing (mm) of the command's sections or grid");
    sub->add_option("--seed", flags.seed, "Seed for randomized steps");
    sub->add_option("--format", flags.format, "Output mesh format: ply-binary-le | ply-ascii | obj");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(vmorph::ExitCode::input);
  }

  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    try {
      return run_command(sub->get_name(), flags, *sub);
    } catch (const vmorph::Error& e) {
      std::cerr << "vmorph: error: " << e.what() << "\n";
      return static_cast<int>(e.code());
    } catch (const std::exception& e) {
      std::cerr << "vmorph: internal error: " << e.what() << "\n";
      return static_cast<int>(vmorph::ExitCode::internal);
    }
  }
  return static_cast<int>(vmorph::ExitCode::internal);
}
