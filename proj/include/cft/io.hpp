#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cft/displaced_fock.hpp"
#include "cft/grids.hpp"
#include "cft/measurement.hpp"
#include "cft/model_fit.hpp"
#include "cft/rng.hpp"

namespace cft {

using json = nlohmann::json;

namespace io_detail {

/// Shortest-exact decimal form; deterministic for a given binary.
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

}  // namespace io_detail

/// FNV-1a 64-bit over the canonical (key-sorted) JSON dump; written into
/// every artifact header so outputs can be traced to their configuration.
inline std::uint64_t config_hash(const json& config) {
  const std::string dump = config.dump();  // nlohmann objects iterate key-sorted
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Key/value header block shared by the CSV emitters.
struct FileHeader {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
  void add(const std::string& k, double v) { entries.emplace_back(k, io_detail::fmt(v)); }
  void add(const std::string& k, std::uint64_t v) { entries.emplace_back(k, std::to_string(v)); }

  std::string render() const {
    std::string out;
    for (const auto& [k, v] : entries) out += "# " + k + ": " + v + "\n";
    return out;
  }
};

inline FileHeader standard_header(const GridSpec& spec, bool bias_subtracted, double pad_factor,
                                  std::uint64_t seed, std::uint64_t cfg_hash) {
  FileHeader h;
  h.add("rng", kRngAlgorithmId);
  h.add("seed", seed);
  h.add("config_hash", hash_hex(cfg_hash));
  h.add("grid_kind", to_string(spec.kind));
  h.add("grid_extent", spec.extent);
  h.add("grid_spacing", spec.spacing);
  h.add("bias_subtracted", bias_subtracted ? std::string("true") : std::string("false"));
  h.add("pad_factor", pad_factor);
  return h;
}

inline json header_to_json(const FileHeader& h) {
  json obj = json::object();
  for (const auto& [k, v] : h.entries) obj[k] = v;
  return obj;
}

// ---------------------------------------------------------------------------
// ReadoutRecord
// ---------------------------------------------------------------------------

inline std::string records_to_csv(const std::vector<ReadoutRecord>& records,
                                  const FileHeader& header = {}) {
  std::string out = header.render();
  out += "re_beta,im_beta,theta,shots,ups,estimate,sem\n";
  using io_detail::fmt;
  for (const auto& r : records)
    out += fmt(r.beta.real()) + "," + fmt(r.beta.imag()) + "," + fmt(r.theta) + "," +
           std::to_string(r.shots) + "," + std::to_string(r.ups) + "," + fmt(r.estimate) + "," +
           fmt(r.sem) + "\n";
  return out;
}

inline json records_to_json(const std::vector<ReadoutRecord>& records) {
  json arr = json::array();
  for (const auto& r : records)
    arr.push_back({{"re_beta", r.beta.real()},
                   {"im_beta", r.beta.imag()},
                   {"theta", r.theta},
                   {"shots", r.shots},
                   {"ups", r.ups},
                   {"estimate", r.estimate},
                   {"sem", r.sem}});
  return arr;
}

// ---------------------------------------------------------------------------
// ChiGrid / WignerGrid
// ---------------------------------------------------------------------------

inline std::string chi_grid_to_csv(const ChiGrid& grid, const FileHeader& header = {}) {
  std::string out = header.render();
  out += "re_beta,im_beta,re_est,im_est,re_sem,im_sem,provenance,im_measured\n";
  using io_detail::fmt;
  for (const auto& p : grid.points)
    out += fmt(p.beta.real()) + "," + fmt(p.beta.imag()) + "," + fmt(p.est.real()) + "," +
           fmt(p.est.imag()) + "," + fmt(p.sem.real()) + "," + fmt(p.sem.imag()) + "," +
           to_string(p.prov) + "," + (p.im_measured ? "1" : "0") + "\n";
  return out;
}

inline ChiGrid chi_grid_from_csv(const std::string& text) {
  ChiGrid grid;
  std::stringstream ss(text);
  std::string line;
  bool seen_columns = false;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string val = line.substr(colon + 2);
      if (key == "grid_kind") grid.spec.kind = parse_grid_kind(val);
      if (key == "grid_extent") grid.spec.extent = std::stod(val);
      if (key == "grid_spacing") grid.spec.spacing = std::stod(val);
      if (key == "bias_subtracted") grid.bias_subtracted = (val == "true");
      continue;
    }
    if (!seen_columns) {  // column header
      seen_columns = true;
      continue;
    }
    const auto f = io_detail::split(line, ',');
    if (f.size() != 8) throw std::runtime_error("chi_grid_from_csv: malformed row");
    ChiGridPoint p;
    p.beta = cplx(std::stod(f[0]), std::stod(f[1]));
    p.est = cplx(std::stod(f[2]), std::stod(f[3]));
    p.sem = cplx(std::stod(f[4]), std::stod(f[5]));
    p.prov = parse_provenance(f[6]);
    p.im_measured = f[7] == "1";
    grid.points.push_back(p);
  }
  return grid;
}

inline std::string wigner_grid_to_csv(const WignerGrid& grid, const FileHeader& header = {}) {
  std::string out = header.render();
  out += "re_gamma,im_gamma,value,imag_residual\n";
  using io_detail::fmt;
  for (const auto& p : grid.points)
    out += fmt(p.gamma.real()) + "," + fmt(p.gamma.imag()) + "," + fmt(p.value) + "," +
           fmt(p.imag_residual) + "\n";
  return out;
}

inline json chi_grid_to_json(const ChiGrid& grid) {
  json arr = json::array();
  for (const auto& p : grid.points)
    arr.push_back({{"re_beta", p.beta.real()},
                   {"im_beta", p.beta.imag()},
                   {"re_est", p.est.real()},
                   {"im_est", p.est.imag()},
                   {"re_sem", p.sem.real()},
                   {"im_sem", p.sem.imag()},
                   {"provenance", to_string(p.prov)},
                   {"im_measured", p.im_measured}});
  return arr;
}

inline json wigner_grid_to_json(const WignerGrid& grid) {
  json arr = json::array();
  for (const auto& p : grid.points)
    arr.push_back({{"re_gamma", p.gamma.real()},
                   {"im_gamma", p.gamma.imag()},
                   {"value", p.value},
                   {"imag_residual", p.imag_residual}});
  return arr;
}

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

inline json fit_result_to_json(const FitResult& fr) {
  json cov = json::array();
  for (int i = 0; i < fr.covariance.rows(); ++i)
    for (int j = 0; j < fr.covariance.cols(); ++j) cov.push_back(fr.covariance(i, j));
  json params = json::object();
  for (const auto& [k, v] : fr.params) params[k] = v;
  json errors = json::object();
  for (const auto& [k, v] : fr.standard_errors) errors[k] = v;
  return json{{"free_params", fr.param_names},
              {"params", params},
              {"standard_errors", errors},
              {"covariance_row_major", cov},
              {"reduced_chi_squared", fr.c_r},
              {"n_points", fr.n_points},
              {"n_free", fr.n_free},
              {"converged", fr.converged},
              {"singular", fr.singular},
              {"message", fr.message}};
}

// ---------------------------------------------------------------------------
// Populations / Rabi traces
// ---------------------------------------------------------------------------

inline std::string populations_to_csv(const PopulationVector& pv, const FileHeader& header = {}) {
  std::string out = header.render();
  using io_detail::fmt;
  out += "# re_gamma: " + fmt(pv.gamma.real()) + "\n";
  out += "# im_gamma: " + fmt(pv.gamma.imag()) + "\n";
  out += "n,p\n";
  for (std::size_t n = 0; n < pv.probs.size(); ++n)
    out += std::to_string(n) + "," + fmt(pv.probs[n]) + "\n";
  return out;
}

inline std::string rabi_trace_to_csv(const RabiTrace& tr, const FileHeader& header = {}) {
  std::string out = header.render();
  using io_detail::fmt;
  out += "# omega: " + fmt(tr.omega) + "\n";
  out += "t,value\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    out += fmt(tr.times[i]) + "," + fmt(tr.values[i]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Plot matrices (gnuplot nonuniform-matrix layout)
// ---------------------------------------------------------------------------

inline cplx point_coord(const ChiGridPoint& p) { return p.beta; }
inline cplx point_coord(const WignerGridPoint& p) { return p.gamma; }

/// Dense matrix: first row holds <ncols> then the Re-axis values; each data
/// row starts with its Im-axis value.  Rows ascend in Im, columns in Re.
template <typename Grid, typename Value>
inline std::string grid_to_matrix(const Grid& grid, Value value_of) {
  if (grid.points.empty()) throw std::invalid_argument("grid_to_matrix: empty grid");
  std::vector<double> xs, ys;
  for (const auto& p : grid.points) {
    xs.push_back(point_coord(p).real());
    ys.push_back(point_coord(p).imag());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::map<std::pair<double, double>, double> val;
  for (const auto& p : grid.points)
    val[{point_coord(p).real(), point_coord(p).imag()}] = value_of(p);
  if (val.size() != xs.size() * ys.size())
    throw std::invalid_argument("grid_to_matrix: points do not form a dense rectangle");
  using io_detail::fmt;
  std::string out = std::to_string(xs.size());
  for (double x : xs) out += " " + fmt(x);
  out += "\n";
  for (double y : ys) {
    out += fmt(y);
    for (double x : xs) out += " " + fmt(val[{x, y}]);
    out += "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace cft
