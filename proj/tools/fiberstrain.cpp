// fiberstrain command line: solve a sensor case, print a transfer matrix,
// or write a structured box mesh.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "fiberstrain.hpp"

namespace fs = fiberstrain;

namespace {

int run_solve(const std::string& config, const std::string& out_override, bool skip_reference) {
  const fs::CaseConfig cfg = fs::load_case_config(config);
  const fs::CaseResult res = fs::run_case(cfg, skip_reference);
  std::filesystem::path out = out_override.empty() ? cfg.output : std::filesystem::path(out_override);
  if (out.empty()) {
    std::cout << fs::format_csv(res.trace);
  } else {
    fs::write_csv(res.trace, out);
    std::cout << "wrote " << res.trace.rows.size() << " rows to " << out.string() << "\n"
              << "energy_nf " << fs::format_double(res.energy_nf) << "\n"
              << "energy_f " << fs::format_double(res.energy_f) << "\n";
  }
  return 0;
}

int run_stp_matrix(const std::string& matrix_file, const std::string& fiber_file, double radius,
                   double alpha, double beta, const std::string& notation_name,
                   const std::string& fiber_axis, bool json) {
  const fs::Notation notation = fs::parse_notation(notation_name);
  fs::Tensor4 cm = fs::load_material(matrix_file).stiffness;
  fs::Tensor4 cf = fs::load_material(fiber_file).stiffness;
  if (fiber_axis == "z") {
    cm = fs::axis_swap_xz(cm);
    cf = fs::axis_swap_xz(cf);
  } else if (fiber_axis != "x") {
    throw fs::ArgumentError("--fiber-axis must be x or z");
  }
  const auto base = fs::assemble_stp(cm, cf, fs::FiberSection::circular(radius));
  const fs::Mat6 t = fs::transfer_matrix(fs::rotate_stp(base, alpha, beta), notation);
  if (json) {
    nlohmann::json j;
    j["notation"] = fs::to_string(notation);
    j["alpha"] = alpha;
    j["beta"] = beta;
    for (int r = 0; r < 6; ++r) {
      std::vector<double> row(6);
      for (int c = 0; c < 6; ++c) row[static_cast<std::size_t>(c)] = t(r, c);
      j["matrix"].push_back(row);
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) std::cout << (c ? "," : "") << fs::format_double(t(r, c));
      std::cout << "\n";
    }
  }
  return 0;
}

// "x:j:k" -> grid line along x through (j, k); likewise for y and z.
std::vector<int> parse_fiber_line(const fs::BoxGrid& g, const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 != 1 || c2 == std::string::npos || spec[0] < 'x' || spec[0] > 'z') {
    throw fs::ArgumentError("--fiber expects axis:first:second, e.g. x:1:1");
  }
  const int axis = spec[0] - 'x';
  const int first = std::stoi(spec.substr(2, c2 - 2));
  const int second = std::stoi(spec.substr(c2 + 1));
  return g.line(axis, first, second);
}

int run_mesh_box(const fs::BoxGrid& g, const std::string& out, const std::string& fiber) {
  const fs::TetMesh mesh = fs::build_box_mesh(g);
  std::map<std::string, std::vector<int>> chains;
  if (!fiber.empty()) chains["fiber"] = parse_fiber_line(g, fiber);
  std::ofstream f(out);
  if (!f) throw fs::IoError("cannot open " + out + " for writing");
  fs::write_msh(f, mesh, chains);
  if (!f) throw fs::IoError("write to " + out + " failed");
  std::cout << "wrote " << mesh.num_vertices() << " vertices, " << mesh.num_tets() << " tets to "
            << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fiber strain transfer and embedded-fiber elasticity"};
  app.require_subcommand(1);

  std::string config, out_override;
  bool skip_reference = false;
  auto* solve = app.add_subcommand("solve", "run a sensor case and write the strain trace");
  solve->add_option("--config", config, "case JSON")->required();
  solve->add_option("--out", out_override, "CSV path (overrides the config)");
  solve->add_flag("--skip-reference", skip_reference, "skip the resolved reference solve");

  std::string matrix_file, fiber_file, notation = "mandel", fiber_axis = "x";
  double radius = 1.0, alpha = 0.0, beta = 0.0;
  bool json = false;
  auto* stp = app.add_subcommand("stp-matrix", "print the 6x6 strain transfer matrix");
  stp->add_option("--matrix", matrix_file, "matrix material JSON")->required();
  stp->add_option("--fiber", fiber_file, "fiber material JSON")->required();
  stp->add_option("--radius", radius, "fiber radius");
  stp->add_option("--alpha", alpha, "out-of-plane angle [rad]");
  stp->add_option("--beta", beta, "in-plane angle [rad]");
  stp->add_option("--notation", notation, "voigt or mandel");
  stp->add_option("--fiber-axis", fiber_axis, "axis the material files align with the fiber (x|z)");
  stp->add_flag("--json", json, "print JSON with a notation field");

  fs::BoxGrid grid{1, 1, 1, 1.0, 1.0, 1.0};
  std::string mesh_out, fiber_line;
  auto* box = app.add_subcommand("mesh-box", "write a structured tetrahedral box mesh");
  box->add_option("--nx", grid.nx)->required();
  box->add_option("--ny", grid.ny)->required();
  box->add_option("--nz", grid.nz)->required();
  box->add_option("--lx", grid.lx);
  box->add_option("--ly", grid.ly);
  box->add_option("--lz", grid.lz);
  box->add_option("--out", mesh_out, "MSH output path")->required();
  box->add_option("--fiber", fiber_line, "grid line axis:first:second written as group 'fiber'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: argument: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*solve) return run_solve(config, out_override, skip_reference);
    if (*stp) {
      return run_stp_matrix(matrix_file, fiber_file, radius, alpha, beta, notation, fiber_axis, json);
    }
    return run_mesh_box(grid, mesh_out, fiber_line);
  } catch (const fs::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
  }
  return 1;
}
