// Command-line runner for the characteristic-function tomography pipeline.
//
// Verbs:
//   simulate    sample a characteristic-function grid, write records + grid
//   reconstruct transform a sampled grid to a Wigner map and parity
//   fit         weighted least-squares fit of a state model to the records
//   report      full pipeline: simulate, reconstruct, fit, error oracle
//   oracle      sampling + transform error estimate in percent of 4/pi

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "cft/cft.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t shots = 0;
  bool shots_set = false;
  double pad_factor = 0.0;
  bool pad_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override master seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--shots", args.shots, "override shots per point")
      ->each([&](const std::string&) { args.shots_set = true; });
  cmd->add_option("--pad-factor", args.pad_factor, "override zero-padding factor")
      ->each([&](const std::string&) { args.pad_set = true; });
}

cft::ExperimentConfig load_with_overrides(const CommonArgs& args) {
  cft::ExperimentConfig cfg = cft::load_config(args.config_path);
  if (args.seed_set) {
    cfg.seed = args.seed;
    cfg.raw["seed"] = args.seed;
  }
  if (args.shots_set) {
    cfg.shots = args.shots;
    cfg.raw["shots"] = args.shots;
  }
  if (args.pad_set) {
    cfg.pad_factor = args.pad_factor;
    cfg.raw["pipeline"]["pad_factor"] = args.pad_factor;
  }
  return cfg;
}

int run_simulate(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  const auto state = cft::make_state(cfg.family, cfg.state_params);
  auto [grid, records] = cft::sample_chi_grid(state, cfg.grid, cfg.shots,
                                              cft::SpamBias(cfg.bias), cfg.measure_imag,
                                              cfg.seed);
  std::filesystem::create_directories(args.out_dir);
  const auto hash = cft::config_hash(cfg.raw);
  const auto header = cft::standard_header(grid.spec, grid.bias_subtracted, cfg.pad_factor,
                                           cfg.seed, hash);
  cft::write_file(args.out_dir + "/records.csv", cft::records_to_csv(records, header));
  cft::write_file(args.out_dir + "/records.json", cft::records_to_json(records).dump(2) + "\n");
  cft::write_file(args.out_dir + "/chi_grid.csv", cft::chi_grid_to_csv(grid, header));
  cft::write_file(args.out_dir + "/chi_grid.json",
                  cft::json{{"header", cft::header_to_json(header)},
                            {"points", cft::chi_grid_to_json(grid)}}
                          .dump(2) +
                      "\n");
  std::printf("simulated %zu grid points (%zu readouts) -> %s\n", grid.points.size(),
              records.size(), args.out_dir.c_str());
  return 0;
}

int run_reconstruct(const CommonArgs& args, const std::string& chi_path) {
  const auto cfg = load_with_overrides(args);
  cft::ChiGrid grid = chi_path.empty()
                          ? cft::chi_grid_from_csv(cft::read_file(args.out_dir + "/chi_grid.csv"))
                          : cft::chi_grid_from_csv(cft::read_file(chi_path));
  if (!grid.bias_subtracted && cfg.subtract_bias_flag && cfg.bias != 0.0)
    grid = cft::subtract_bias(grid, cfg.bias);
  const auto full = cft::complete_by_symmetry(grid, cft::mirror_mode_for(cfg.grid.kind));
  const double parity = cft::parity_from_grid(full);
  const auto wigner =
      cft::dft_wigner(full, cfg.pad_factor, cfg.output_grid, cft::QuasiKind::Wigner);
  std::filesystem::create_directories(args.out_dir);
  const auto hash = cft::config_hash(cfg.raw);
  const auto header =
      cft::standard_header(full.spec, full.bias_subtracted, cfg.pad_factor, cfg.seed, hash);
  cft::write_file(args.out_dir + "/wigner_grid.csv", cft::wigner_grid_to_csv(wigner, header));
  cft::write_file(args.out_dir + "/wigner_grid.json",
                  cft::json{{"header", cft::header_to_json(header)},
                            {"points", cft::wigner_grid_to_json(wigner)}}
                          .dump(2) +
                      "\n");
  std::printf("parity = %.6f, wigner grid %zu points -> %s\n", parity, wigner.points.size(),
              args.out_dir.c_str());
  return 0;
}

int run_fit(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  if (!cfg.fit) {
    std::fprintf(stderr, "config has no pipeline.fit section\n");
    return 2;
  }
  const auto state = cft::make_state(cfg.family, cfg.state_params);
  auto [grid, records] = cft::sample_chi_grid(state, cfg.grid, cfg.shots,
                                              cft::SpamBias(cfg.bias), cfg.measure_imag,
                                              cfg.seed);
  const auto model = cft::StateModel::with_free(cft::parse_model_family(cfg.fit->model),
                                                cfg.fit->free_params, cfg.fit->fixed_params);
  cft::ParamMap init;
  for (const auto& name : model.free_params) {
    auto it = cfg.state_params.find(name);
    init[name] = it != cfg.state_params.end() ? it->second : 0.0;
  }
  const auto result = cft::fit(records, model, init);
  std::filesystem::create_directories(args.out_dir);
  const auto header = cft::standard_header(cfg.grid, false, cfg.pad_factor, cfg.seed,
                                           cft::config_hash(cfg.raw));
  cft::write_file(args.out_dir + "/fit_result.json",
                  cft::json{{"header", cft::header_to_json(header)},
                            {"fit", cft::fit_result_to_json(result)}}
                          .dump(2) +
                      "\n");
  std::printf("fit %s: c_r = %.4f, converged = %s -> %s/fit_result.json\n",
              cfg.fit->model.c_str(), result.c_r, result.converged ? "yes" : "no",
              args.out_dir.c_str());
  return 0;
}

int run_report(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  const auto bundle = cft::run_experiment_to_dir(cfg, args.out_dir);
  std::printf("%s", cft::render_report(bundle).c_str());
  std::printf("artifacts -> %s\n", args.out_dir.c_str());
  return 0;
}

int run_oracle(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  const auto state = cft::make_state(cfg.family, cfg.state_params);
  const double pct = cft::dft_error_oracle(state, cfg.grid, cfg.shots, cfg.seed,
                                           cfg.output_grid, cfg.measure_imag, cfg.pad_factor);
  std::printf("mean |W_dft - W_analytic| = %.4f %% of 4/pi\n", pct);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"direct characteristic-function tomography simulator"};
  app.require_subcommand(1);

  CommonArgs sim_args, rec_args, fit_args, rep_args, ora_args;
  std::string chi_path;

  auto* sim = app.add_subcommand("simulate", "sample a characteristic-function grid");
  add_common(sim, sim_args);
  auto* rec = app.add_subcommand("reconstruct", "Fourier-transform a sampled grid");
  add_common(rec, rec_args);
  rec->add_option("--chi", chi_path, "chi grid CSV (default: <out>/chi_grid.csv)");
  auto* fitc = app.add_subcommand("fit", "fit a state model to simulated records");
  add_common(fitc, fit_args);
  auto* rep = app.add_subcommand("report", "full pipeline with report and plot data");
  add_common(rep, rep_args);
  auto* ora = app.add_subcommand("oracle", "sampling + transform error estimate");
  add_common(ora, ora_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (rec->parsed()) return run_reconstruct(rec_args, chi_path);
    if (fitc->parsed()) return run_fit(fit_args);
    if (rep->parsed()) return run_report(rep_args);
    if (ora->parsed()) return run_oracle(ora_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
