#ifndef FIBERSTRAIN_MATERIAL_IO_HPP
#define FIBERSTRAIN_MATERIAL_IO_HPP

// Material files are JSON objects of one of two forms:
//
//   {"isotropic": {"E": 73e9, "nu": 0.18}}
//   {"voigt": [[c11, c12, ...], ... 6 rows ...]}
//
// Values are taken in whatever consistent unit system the caller uses.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "fiberstrain/error.hpp"
#include "fiberstrain/tensor.hpp"

namespace fiberstrain {

struct Material {
  Tensor4 stiffness;
  // Young's modulus when the file used the isotropic form; used as the
  // fiber stretching modulus. For Voigt input this is the axial modulus
  // along the first axis, 1 / S_11.
  double axial_modulus = 0.0;
};

inline Material material_from_json(const nlohmann::json& j, double stress_scale = 1.0) {
  if (!j.is_object()) throw FormatError("material must be a JSON object");
  Material m;
  if (j.contains("isotropic")) {
    const auto& iso = j.at("isotropic");
    if (!iso.contains("E") || !iso.contains("nu")) {
      throw FormatError("isotropic material needs \"E\" and \"nu\"");
    }
    const double e = iso.at("E").get<double>() * stress_scale;
    m.stiffness = isotropic_stiffness(e, iso.at("nu").get<double>());
    m.axial_modulus = e;
  } else if (j.contains("voigt")) {
    const auto& rows = j.at("voigt");
    if (!rows.is_array() || rows.size() != 6) throw FormatError("\"voigt\" must have 6 rows");
    Mat6 c;
    for (int i = 0; i < 6; ++i) {
      const auto& row = rows.at(i);
      if (!row.is_array() || row.size() != 6) throw FormatError("\"voigt\" rows must have 6 entries");
      for (int k = 0; k < 6; ++k) c(i, k) = row.at(k).get<double>() * stress_scale;
    }
    m.stiffness = Tensor4::from_voigt_stiffness(c);
    require_positive_definite(m.stiffness, "material");
    m.axial_modulus = 1.0 / invert_stiffness(m.stiffness).voigt_compliance()(0, 0);
  } else {
    throw FormatError("material needs an \"isotropic\" or \"voigt\" entry");
  }
  return m;
}

inline Material load_material(const std::filesystem::path& path, double stress_scale = 1.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open material file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    return material_from_json(j, stress_scale);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_MATERIAL_IO_HPP
