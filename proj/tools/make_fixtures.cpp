// Writes a synthetic body, a resampled and moved copy of it, and a config
// that runs the whole pipeline on the pair.

#include <iostream>

#include <CLI11.hpp>

#include "vmorph/vmorph.hpp"

int main(int argc, char** argv) {
  using namespace vmorph;
  CLI::App app{"Synthetic fixtures for the vmorph pipeline"};
  std::string out = "fixtures";
  std::size_t rings = 40;
  double groove = 1.0;
  app.add_option("--out", out, "Output directory");
  app.add_option("--rings", rings, "Latitude rings of the plate tessellation")->check(CLI::Range(8, 400));
  app.add_option("--groove", groove, "Depth (mm) of the groove along the rim")->check(CLI::Range(0.0, 5.0));
  CLI11_PARSE(app, argc, argv);

  try {
    synthetic::PlateSpec spec;
    spec.height = synthetic::Arch{synthetic::ViolinOutline{}, 20.0, 15.0, groove};
    spec.rings = rings;
    spec.rim_points = 10 * rings;
    const auto body = synthetic::make_body(spec);

    synthetic::PlateSpec other = spec;
    other.rings = rings * 9 / 10;
    other.rim_points = 10 * other.rings + 7;
    SimilarityTransform t;
    t.translation = {3.0, -2.0, 1.5};
    t.angles = {1.5, -1.0, 2.0};
    t.scale = 1.01;
    const auto moved = transform_vertices(synthetic::make_body(other).mesh, AffineMap(t));

    const std::filesystem::path dir = out;
    save_mesh(dir / "body.ply", body.mesh, MeshFormat::ply_binary_le);
    save_mesh(dir / "compare.ply", moved, MeshFormat::ply_binary_le);
    const json config = {{"inputs", {{"body", "body.ply"}, {"compare", "compare.ply"}}},
                         {"register", {{"all_metrics", true}}},
                         {"channel", {{"stations", 200}}},
                         {"output", "run"}};
    detail::write_file(dir / "config.json", config.dump(2) + "\n");
    std::cout << "wrote " << (dir / "body.ply").string() << ", " << (dir / "compare.ply").string() << ", "
              << (dir / "config.json").string() << "\n";
  } catch (const Error& e) {
    std::cerr << "vmorph-fixtures: error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }
  return 0;
}
