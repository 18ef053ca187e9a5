#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "cft/experiment.hpp"

using namespace cft;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

json small_doc() {
  return json::parse(read_file(std::string(CFT_SOURCE_DIR) + "/tests/data/small_cat.json"));
}

}  // namespace

TEST_CASE("parse_config") {
  SECTION("valid document") {
    const auto cfg = parse_config(small_doc());
    CHECK(cfg.family == StateFamily::cat);
    CHECK(cfg.grid.kind == GridKind::half_plane);
    CHECK(cfg.shots == 150);
    CHECK(cfg.bias == Approx(-0.02));
    CHECK(cfg.measure_imag);
    REQUIRE(cfg.fit.has_value());
    CHECK(cfg.fit->free_params.size() == 3);
  }
  SECTION("unknown keys rejected at every level") {
    auto doc = small_doc();
    doc["unexpected"] = 1;
    CHECK_THROWS_AS(parse_config(doc), std::invalid_argument);
    auto doc2 = small_doc();
    doc2["pipeline"]["typo_key"] = true;
    CHECK_THROWS_AS(parse_config(doc2), std::invalid_argument);
    auto doc3 = small_doc();
    doc3["grid"]["shape"] = "round";
    CHECK_THROWS_AS(parse_config(doc3), std::invalid_argument);
  }
  SECTION("quadrature list must be [0] or [0, pi/2]") {
    auto doc = small_doc();
    doc["quadratures"] = {0.3};
    CHECK_THROWS_AS(parse_config(doc), std::invalid_argument);
    doc["quadratures"] = {0.0};
    CHECK_FALSE(parse_config(doc).measure_imag);
  }
  SECTION("missing sections") {
    auto doc = small_doc();
    doc.erase("grid");
    CHECK_THROWS(parse_config(doc));
  }
  SECTION("bundled configs parse") {
    for (const char* name :
         {"fig2_squeezed", "fig2_displaced_squeezed", "fig3_cat", "fig4_gkp"}) {
      const auto cfg =
          load_config(std::string(CFT_SOURCE_DIR) + "/configs/" + name + ".json");
      CHECK(cfg.shots == 200);
      CHECK(cfg.fit.has_value());
    }
  }
}

TEST_CASE("run_experiment on a small cat") {
  const auto cfg = parse_config(small_doc());
  const auto b = run_experiment(cfg);
  SECTION("negative bias pushes the raw parity down") {
    CHECK(b.parity_corrected > b.parity_raw);
  }
  SECTION("transform output covers the requested map") {
    CHECK(b.wigner.points.size() == std::size_t(13 * 13));
    double peak = -1.0;
    for (const auto& p : b.wigner.points) peak = std::max(peak, p.value);
    CHECK(peak > 0.3);  // the even cat peaks near 2/pi at the origin
    CHECK(peak < 2.0 / M_PI + 0.1);
  }
  SECTION("fit converges near the generating parameters") {
    REQUIRE(b.fit_result.has_value());
    CHECK(b.fit_result->converged);
    CHECK(b.fit_result->params.at("alpha_re") == Approx(2.0).margin(0.05));
    CHECK(b.fit_result->params.at("b") == Approx(-0.02).margin(0.02));
    REQUIRE(b.calibration.has_value());
    CHECK(b.calibration->fidelity > 0.99);  // data generated at the calibrated state
  }
  SECTION("oracle percent is sane") {
    CHECK(b.oracle_percent > 0.0);
    CHECK(b.oracle_percent < 20.0);
  }
}

TEST_CASE("artifact bundles are byte-identical across runs") {
  const auto cfg = parse_config(small_doc());
  const fs::path base = fs::temp_directory_path() / "cft_test_bundles";
  fs::remove_all(base);
  run_experiment_to_dir(cfg, (base / "a").string());
  run_experiment_to_dir(cfg, (base / "b").string());
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const auto name = entry.path().filename().string();
    const auto lhs = read_file(entry.path().string());
    const auto rhs = read_file((base / "b" / name).string());
    CHECK(lhs == rhs);
    ++compared;
  }
  CHECK(compared >= 10);  // records csv+json, chi csv+json, wigner csv+json, fit, report, matrices
  SECTION("a different seed changes the records") {
    auto cfg2 = cfg;
    cfg2.seed = 12;
    cfg2.raw["seed"] = 12;
    run_experiment_to_dir(cfg2, (base / "c").string());
    CHECK(read_file((base / "a" / "records.csv").string()) !=
          read_file((base / "c" / "records.csv").string()));
  }
  fs::remove_all(base);
}

TEST_CASE("config hash") {
  const auto doc = small_doc();
  CHECK(config_hash(doc) == config_hash(small_doc()));
  auto changed = small_doc();
  changed["seed"] = 999;
  CHECK(config_hash(doc) != config_hash(changed));
}

TEST_CASE("chi grid CSV round trip") {
  const auto state = make_cat(cplx(2.0, 0.0), 0.3, 0.0);
  auto [grid, records] =
      sample_chi_grid(state, {GridKind::half_plane, 2.0, 0.5}, 120, SpamBias(0.01), true, 5);
  const auto header = standard_header(grid.spec, grid.bias_subtracted, 2.0, 5, 0xabcdef);
  const auto text = chi_grid_to_csv(grid, header);
  const auto back = chi_grid_from_csv(text);
  REQUIRE(back.points.size() == grid.points.size());
  CHECK(back.spec.kind == grid.spec.kind);
  CHECK(back.spec.spacing == grid.spec.spacing);
  CHECK(back.bias_subtracted == grid.bias_subtracted);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    CHECK(back.points[i].beta == grid.points[i].beta);
    CHECK(back.points[i].est == grid.points[i].est);
    CHECK(back.points[i].sem == grid.points[i].sem);
    CHECK(back.points[i].prov == grid.points[i].prov);
    CHECK(back.points[i].im_measured == grid.points[i].im_measured);
  }
}

TEST_CASE("record and population emitters") {
  ReadoutRecord r;
  r.beta = cplx(0.5, -1.0);
  r.theta = 0.0;
  r.shots = 100;
  r.ups = 73;
  r.estimate = 0.46;
  r.sem = 0.0888;
  SECTION("csv column order is fixed") {
    const auto text = records_to_csv({r});
    CHECK(text.rfind("re_beta,im_beta,theta,shots,ups,estimate,sem\n", 0) == 0);
    CHECK(text.find("0.5,-1,0,100,73,") != std::string::npos);
  }
  SECTION("json array form carries the same fields") {
    const auto arr = records_to_json({r});
    REQUIRE(arr.size() == 1);
    CHECK(arr[0]["ups"] == 73);
    CHECK(arr[0]["re_beta"] == Approx(0.5));
    CHECK(arr[0]["sem"] == Approx(0.0888));
  }
  SECTION("population and trace emitters") {
    PopulationVector pv{{0.25, 0.75}, cplx(1.0, 0.0)};
    const auto ptext = populations_to_csv(pv);
    CHECK(ptext.find("n,p\n0,0.25\n1,0.75\n") != std::string::npos);
    const auto tr = synthesize_rabi_trace(pv, 2.0 * M_PI * 20.0, {0.0, 0.1});
    const auto ttext = rabi_trace_to_csv(tr);
    CHECK(ttext.find("t,value\n0,1\n") != std::string::npos);
  }
}

TEST_CASE("plot matrices") {
  SECTION("3x3 grid renders 3 rows by 3 columns") {
    ChiGrid g;
    g.spec = {GridKind::full_square, 1.0, 1.0};
    for (const auto& beta : build_grid(g.spec))
      g.points.push_back({beta, cplx(beta.real() + 10.0 * beta.imag(), 0.0), cplx(0.0, 0.0),
                          Provenance::measured, true});
    const auto text = grid_to_matrix(g, [](const ChiGridPoint& p) { return p.est.real(); });
    std::stringstream ss(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(ss, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "3 -1 0 1");
    CHECK(lines[1] == "-1 -11 -10 -9");
    CHECK(lines[3] == "1 9 10 11");
  }
  SECTION("empty bundle rejected") {
    ExperimentBundle empty;
    CHECK_THROWS_AS(emit_plotdata(empty, "/tmp/cft_should_not_exist"), std::invalid_argument);
  }
}

TEST_CASE("quadrant experiment end to end") {
  json doc = {
      {"state", {{"family", "gkp"}, {"params", {{"l_re", 1.5}, {"r", 0.4}, {"theta", 0.0}}}}},
      {"grid", {{"kind", "positive_quadrant"}, {"extent", 4.2}, {"spacing", 0.14}}},
      {"shots", 150},
      {"quadratures", {0.0}},
      {"bias", -0.002},
      {"seed", 3},
      {"pipeline",
       {{"subtract_bias", true},
        {"pad_factor", 2.0},
        {"output_grid", {{"kind", "full_square"}, {"extent", 2.0}, {"spacing", 0.2}}}}},
  };
  const auto cfg = parse_config(doc);
  CHECK_FALSE(cfg.measure_imag);
  const auto b = run_experiment(cfg);
  // Quadrant mirroring reconstructs the full square.
  const int n = int(4.2 / 0.14 + 1e-9);
  CHECK(b.processed.points.size() == std::size_t((2 * n + 1) * (2 * n + 1)));
  CHECK(b.parity_corrected > 0.8);
  CHECK(b.parity_corrected < 1.05);
}
