#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stokes/flows.hpp"
#include "stokes/monodromy.hpp"
#include "stokes/stokes_poisson.hpp"

namespace stokes::json_io {

// Insertion-ordered documents: field order is part of the byte-stable output
// contract, so identical jobs produce identical files.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---- writers ----------------------------------------------------------------

// Complex numbers are two-element arrays [re, im].
inline Json cplx_json(Cplx z) { return Json::array({z.real(), z.imag()}); }

inline Json vec_json(const Vec& u) {
  Json j = Json::array();
  for (int i = 0; i < u.size(); ++i) j.push_back(cplx_json(u(i)));
  return j;
}

// Row-major nested arrays.
inline Json mat_json(const Mat& m) {
  Json j = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(cplx_json(m(r, c)));
    j.push_back(std::move(row));
  }
  return j;
}

inline Json cplx_list_json(const std::vector<Cplx>& v) {
  Json j = Json::array();
  for (const Cplx& z : v) j.push_back(cplx_json(z));
  return j;
}

// Stokes matrices are serialized as the full n x n matrix; the unit diagonal
// and zero lower triangle are written (and required back) exactly.
inline Json stokes_json(const StokesMatrix& s) { return mat_json(s.matrix()); }

inline Json document(const char* kind) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

inline Json stokes_result_json(const monodromy::StokesResult& r) {
  Json j = document("stokes-result");
  j["n"] = r.S.n();
  j["S"] = stokes_json(r.S);
  j["permutation"] = r.permutation;
  j["matching_radius"] = r.matching_radius;
  j["diagnostics"] = {{"s_minus_residual", r.s_minus_residual},
                      {"triangularity_residual", r.triangularity_residual},
                      {"spectral_residual", r.spectral_residual}};
  return j;
}

inline Json bracket_table_json(const bracket::BracketTable& t) {
  Json j = document("bracket-table");
  j["n"] = t.n;
  j["kappa"] = cplx_json(t.kappa);
  Json entries = Json::array();
  const auto cs = bracket::coords(t.n);
  const int m = bracket::coord_count(t.n);
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      const auto& [i, k] = cs[static_cast<size_t>(p)];
      const auto& [jj, l] = cs[static_cast<size_t>(q)];
      Json e;
      e["p"] = {i, k};
      e["q"] = {jj, l};
      e["value"] = cplx_json(t.value(p, q));
      entries.push_back(std::move(e));
    }
  j["entries"] = std::move(entries);
  return j;
}

inline Json conservation_report_json(const flows::ConservationReport& r) {
  Json j = document("conservation-report");
  j["n"] = r.stokes_start.S.n();
  j["stokes_drift"] = r.stokes_drift;
  j["eigenvalue_drift"] = r.eigenvalue_drift;
  j["S_start"] = stokes_json(r.stokes_start.S);
  j["S_end"] = stokes_json(r.stokes_end.S);
  j["permutation"] = r.stokes_start.permutation;
  j["V_end"] = mat_json(r.v_end);
  j["hamiltonians_start"] = cplx_list_json(r.hamiltonians_start);
  j["hamiltonians_end"] = cplx_list_json(r.hamiltonians_end);
  return j;
}

// ---- readers ----------------------------------------------------------------

// [re, im]; a bare number is accepted as a real value.
inline Cplx cplx_from(const Json& j, const char* what) {
  if (j.is_number()) return Cplx(j.get<double>(), 0.0);
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          std::string(what) + ": complex values are [re, im]");
  return Cplx(j[0].get<double>(), j[1].get<double>());
}

inline Vec vec_from(const Json& j, const char* what) {
  require(j.is_array() && !j.empty(),
          std::string(what) + ": expected a nonempty array");
  Vec u(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i)
    u(static_cast<Eigen::Index>(i)) = cplx_from(j[i], what);
  return u;
}

inline Mat mat_from(const Json& j, const char* what) {
  require(j.is_array() && !j.empty() && j[0].is_array(),
          std::string(what) + ": expected nested row-major arrays");
  const size_t rows = j.size(), cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r) {
    require(j[r].is_array() && j[r].size() == cols,
            std::string(what) + ": rows must have equal length");
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cplx_from(j[r][c], what);
  }
  require_square_finite(m, what);
  return m;
}

inline StokesMatrix stokes_from(const Json& j, const char* what) {
  return StokesMatrix::from_matrix(mat_from(j, what));
}

inline const Json& field(const Json& j, const char* name) {
  require(j.is_object() && j.contains(name),
          std::string("input: missing field '") + name + "'");
  return j.at(name);
}

inline so::DeformationPoint point_from(const Json& j) {
  so::DeformationPoint p;
  p.u = vec_from(field(j, "u"), "u");
  if (j.contains("psi")) {
    require(j.at("psi").is_number(), "psi: expected a number");
    p.psi = j.at("psi").get<double>();
  }
  p.validate();
  return p;
}

inline flows::DeformationPath path_from(const Json& j) {
  const Json& w = field(j, "waypoints");
  require(w.is_array() && !w.empty(), "waypoints: expected a nonempty array");
  flows::DeformationPath path;
  for (const Json& pj : w) path.waypoints.push_back(point_from(pj));
  path.validate();
  return path;
}

inline bracket::BraidWord braid_word_from(const Json& j) {
  require(j.is_array(), "word: expected an array of letters");
  bracket::BraidWord w;
  for (const Json& lj : j) {
    bracket::BraidLetter letter;
    if (lj.is_number_integer()) {
      letter.gen = lj.get<int>();
    } else {
      letter.gen = static_cast<int>(
          field(lj, "generator").get<long long>());
      if (lj.contains("inverse")) {
        require(lj.at("inverse").is_boolean(), "word: inverse must be a bool");
        letter.inverse = lj.at("inverse").get<bool>();
      }
    }
    require(letter.gen >= 0, "word: generators are 0-based and nonnegative");
    w.push_back(letter);
  }
  return w;
}

// ---- files ------------------------------------------------------------------

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("input: cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("input: '" + path + "' is not valid JSON (" +
                          e.what() + ")");
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("output: cannot open '" + path + "'");
  out << dump(j);
  if (!out) throw ValidationError("output: write to '" + path + "' failed");
}

}  // namespace stokes::json_io
