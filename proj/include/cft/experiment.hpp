#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cft/io.hpp"
#include "cft/recon.hpp"

namespace cft {

/// Declarative description of one simulated tomography run.  Parsed
/// strictly: unknown keys anywhere in the document are rejected.
struct ExperimentConfig {
  StateFamily family = StateFamily::vacuum;
  std::string family_name = "vacuum";
  ParamMap state_params;

  GridSpec grid;
  std::uint64_t shots = 200;
  bool measure_imag = true;   // from the quadrature angle list
  double bias = 0.0;
  std::uint64_t seed = 1;

  bool subtract_bias_flag = true;
  double pad_factor = 4.0;
  GridSpec output_grid{GridKind::full_square, 2.5, 0.1};

  struct FitSection {
    std::string model;
    std::vector<std::string> free_params;
    ParamMap fixed_params;
  };
  std::optional<FitSection> fit;

  json raw;  // canonical parsed document, for hashing and headers
};

namespace config_detail {

inline void require_keys(const json& obj, const std::string& where,
                         const std::vector<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
  }
}

inline GridSpec parse_grid(const json& g, const std::string& where) {
  require_keys(g, where, {"kind", "extent", "spacing"});
  GridSpec spec;
  spec.kind = parse_grid_kind(g.at("kind").get<std::string>());
  spec.extent = g.at("extent").get<double>();
  spec.spacing = g.at("spacing").get<double>();
  return spec;
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const json& doc) {
  using config_detail::require_keys;
  require_keys(doc, "top level",
               {"state", "grid", "shots", "quadratures", "bias", "seed", "pipeline"});
  ExperimentConfig cfg;
  cfg.raw = doc;

  const json& st = doc.at("state");
  require_keys(st, "state", {"family", "params"});
  cfg.family_name = st.at("family").get<std::string>();
  cfg.family = parse_family(cfg.family_name);
  if (st.contains("params"))
    for (const auto& [k, v] : st.at("params").items()) cfg.state_params[k] = v.get<double>();

  cfg.grid = config_detail::parse_grid(doc.at("grid"), "grid");
  if (doc.contains("shots")) cfg.shots = doc.at("shots").get<std::uint64_t>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("bias")) cfg.bias = doc.at("bias").get<double>();

  if (doc.contains("quadratures")) {
    const auto& q = doc.at("quadratures");
    std::vector<double> angles;
    for (const auto& a : q) angles.push_back(a.get<double>());
    if (angles.size() == 1 && std::abs(angles[0]) < 1e-9) {
      cfg.measure_imag = false;
    } else if (angles.size() == 2 && std::abs(angles[0]) < 1e-9 &&
               std::abs(angles[1] - M_PI / 2.0) < 1e-9) {
      cfg.measure_imag = true;
    } else {
      throw std::invalid_argument(
          "config: quadratures must be [0] (real part only) or [0, pi/2]");
    }
  }

  if (doc.contains("pipeline")) {
    const json& p = doc.at("pipeline");
    require_keys(p, "pipeline", {"subtract_bias", "pad_factor", "output_grid", "fit"});
    if (p.contains("subtract_bias")) cfg.subtract_bias_flag = p.at("subtract_bias").get<bool>();
    if (p.contains("pad_factor")) cfg.pad_factor = p.at("pad_factor").get<double>();
    if (p.contains("output_grid"))
      cfg.output_grid = config_detail::parse_grid(p.at("output_grid"), "pipeline.output_grid");
    if (p.contains("fit")) {
      const json& f = p.at("fit");
      require_keys(f, "pipeline.fit", {"model", "free", "fixed"});
      ExperimentConfig::FitSection fs;
      fs.model = f.at("model").get<std::string>();
      for (const auto& name : f.at("free")) fs.free_params.push_back(name.get<std::string>());
      if (f.contains("fixed"))
        for (const auto& [k, v] : f.at("fixed").items()) fs.fixed_params[k] = v.get<double>();
      cfg.fit = fs;
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(json::parse(read_file(path)));
}

/// Everything one run produces, kept in memory for inspection; the file
/// emitters below serialize it.
struct ExperimentBundle {
  ExperimentConfig config;
  std::uint64_t cfg_hash = 0;
  std::vector<ReadoutRecord> records;
  ChiGrid measured;        // as sampled (bias still in, if configured)
  ChiGrid processed;       // bias-subtracted (if configured) and completed
  WignerGrid wigner;
  double parity_raw = 0.0;        // bias retained
  double parity_corrected = 0.0;  // bias subtracted (equals raw when b = 0)
  double parity_truncation = 0.0; // (pi/2) W(0) minus the noiseless grid sum
  double oracle_percent = 0.0;    // sampling + transform error, % of 4/pi
  std::optional<FitResult> fit_result;
  std::optional<CalibrationReport> calibration;
};

inline MirrorMode mirror_mode_for(GridKind kind) {
  return kind == GridKind::positive_quadrant ? MirrorMode::quadrant_mirror
                                             : MirrorMode::hermitian;
}

inline ExperimentBundle run_experiment(const ExperimentConfig& cfg) {
  ExperimentBundle b;
  b.config = cfg;
  b.cfg_hash = config_hash(cfg.raw);

  const OscillatorState state = make_state(cfg.family, cfg.state_params);
  const SpamBias bias(cfg.bias);

  auto [measured, records] =
      sample_chi_grid(state, cfg.grid, cfg.shots, bias, cfg.measure_imag, cfg.seed);
  b.measured = measured;
  b.records = std::move(records);

  const MirrorMode mode = mirror_mode_for(cfg.grid.kind);
  const ChiGrid completed_raw = complete_by_symmetry(b.measured, mode);
  b.parity_raw = parity_from_grid(completed_raw);

  ChiGrid working = b.measured;
  if (cfg.subtract_bias_flag && cfg.bias != 0.0) working = subtract_bias(working, cfg.bias);
  b.processed = complete_by_symmetry(working, mode);
  b.parity_corrected = parity_from_grid(b.processed);

  b.wigner = dft_wigner(b.processed, cfg.pad_factor, cfg.output_grid, QuasiKind::Wigner);

  // How much of the parity integral the finite grid leaves out, measured
  // on noiseless values; the grid extent is a choice, not a claim.
  const GridSpec full_span{GridKind::full_square, cfg.grid.extent, cfg.grid.spacing};
  b.parity_truncation = M_PI / 2.0 * wigner_fn(state, cplx(0.0, 0.0)) -
                        parity_from_grid(exact_chi_grid(state, full_span));

  // Pipeline numerical-error estimate on an independent stream.
  b.oracle_percent = dft_error_oracle(state, cfg.grid, cfg.shots, derive_key(cfg.seed, 0xA11CE),
                                      cfg.output_grid, cfg.measure_imag, cfg.pad_factor);

  if (cfg.fit) {
    const ModelFamily mf = parse_model_family(cfg.fit->model);
    const StateModel model = StateModel::with_free(mf, cfg.fit->free_params,
                                                   cfg.fit->fixed_params);
    ParamMap init;  // calibrated values seed the fit; unknown bias starts at 0
    for (const auto& name : model.free_params) {
      auto it = cfg.state_params.find(name);
      init[name] = it != cfg.state_params.end() ? it->second : 0.0;
    }
    b.fit_result = fit(b.records, model, init);
    ParamMap calibrated = cfg.state_params;
    calibrated["b"] = 0.0;
    b.calibration = compare_calibration(b.records, model, calibrated, *b.fit_result);
  }
  return b;
}

namespace report_detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace report_detail

inline std::string render_report(const ExperimentBundle& b) {
  using report_detail::fmt6;
  std::string r;
  r += "characteristic-function tomography report\n";
  r += "==========================================\n";
  r += "config_hash: " + hash_hex(b.cfg_hash) + "\n";
  r += "rng: " + std::string(kRngAlgorithmId) + "  seed: " + std::to_string(b.config.seed) + "\n";
  r += "state: " + b.config.family_name;
  for (const auto& [k, v] : b.config.state_params) r += " " + k + "=" + fmt6(v);
  r += "\n";
  r += "grid: " + to_string(b.config.grid.kind) + " extent " + fmt6(b.config.grid.extent) +
       " spacing " + fmt6(b.config.grid.spacing) + ", shots " +
       std::to_string(b.config.shots) + "\n";
  r += "bias b: " + fmt6(b.config.bias) +
       (b.config.subtract_bias_flag ? " (subtracted before transform)\n" : " (retained)\n");
  r += "pad_factor: " + fmt6(b.config.pad_factor) + "\n";
  r += "\n";
  r += "parity, bias retained:   " + fmt6(b.parity_raw) + "\n";
  r += "parity, bias subtracted: " + fmt6(b.parity_corrected) + "\n";
  r += "parity truncation residual of this grid (noiseless): " + fmt6(b.parity_truncation) +
       "\n";
  r += "transform error estimate: " + fmt6(b.oracle_percent) + " % of 4/pi\n";
  if (b.fit_result) {
    const auto& fr = *b.fit_result;
    r += "\nfit model: " + b.config.fit->model +
         (fr.converged ? " (converged)\n" : " (NOT converged)\n");
    r += "  points " + std::to_string(fr.n_points) + ", free parameters " +
         std::to_string(fr.n_free) + "\n";
    if (b.calibration) {
      r += "  c_r at calibrated params (b = 0): " + fmt6(b.calibration->c_r_calibrated) + "\n";
      r += "  c_r at fitted params:             " + fmt6(b.calibration->c_r_fitted) + "\n";
      r += "  fidelity(calibrated, fitted):     " + fmt6(b.calibration->fidelity) + "\n";
    }
    r += "  fitted parameters (value +- stderr, pull vs calibration):\n";
    for (const auto& name : fr.param_names) {
      r += "    " + name + " = " + fmt6(fr.params.at(name)) + " +- " +
           fmt6(fr.standard_errors.at(name));
      if (b.calibration && b.calibration->deltas_sigma.count(name))
        r += "  (" + fmt6(b.calibration->deltas_sigma.at(name)) + " sigma)";
      r += "\n";
    }
  }
  return r;
}

/// Write the gnuplot-ready dense matrices of a bundle (chi real/imaginary
/// parts and the reconstructed Wigner map).
inline void emit_plotdata(const ExperimentBundle& b, const std::string& out_dir) {
  if (b.processed.points.empty()) throw std::invalid_argument("emit_plotdata: empty bundle");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file(out_dir + "/chi_re.mat",
             grid_to_matrix(b.processed, [](const ChiGridPoint& p) { return p.est.real(); }));
  write_file(out_dir + "/chi_im.mat",
             grid_to_matrix(b.processed, [](const ChiGridPoint& p) { return p.est.imag(); }));
  write_file(out_dir + "/wigner.mat",
             grid_to_matrix(b.wigner, [](const WignerGridPoint& p) { return p.value; }));
}

/// Run and serialize the full artifact bundle into out_dir.  Identical
/// (config, seed) pairs produce byte-identical files.
inline ExperimentBundle run_experiment_to_dir(const ExperimentConfig& cfg,
                                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  ExperimentBundle b = run_experiment(cfg);
  fs::create_directories(out_dir);
  const FileHeader mh = standard_header(b.measured.spec, b.measured.bias_subtracted,
                                        cfg.pad_factor, cfg.seed, b.cfg_hash);
  const FileHeader ph = standard_header(b.processed.spec, b.processed.bias_subtracted,
                                        cfg.pad_factor, cfg.seed, b.cfg_hash);
  write_file(out_dir + "/records.csv", records_to_csv(b.records, mh));
  write_file(out_dir + "/records.json", records_to_json(b.records).dump(2) + "\n");
  write_file(out_dir + "/chi_grid.csv", chi_grid_to_csv(b.processed, ph));
  write_file(out_dir + "/chi_grid.json",
             json{{"header", header_to_json(ph)}, {"points", chi_grid_to_json(b.processed)}}
                     .dump(2) +
                 "\n");
  write_file(out_dir + "/wigner_grid.csv", wigner_grid_to_csv(b.wigner, ph));
  write_file(out_dir + "/wigner_grid.json",
             json{{"header", header_to_json(ph)}, {"points", wigner_grid_to_json(b.wigner)}}
                     .dump(2) +
                 "\n");
  if (b.fit_result)
    write_file(out_dir + "/fit_result.json",
               json{{"header", header_to_json(ph)}, {"fit", fit_result_to_json(*b.fit_result)}}
                       .dump(2) +
                   "\n");
  write_file(out_dir + "/report.txt", render_report(b));
  emit_plotdata(b, out_dir);
  return b;
}

}  // namespace cft
