#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "covact/errors.hpp"
#include "covact/hermitian.hpp"
#include "covact/scenario.hpp"
#include "test_util.hpp"

using covact::ObservationMode;
using covact::Scenario;
using covact::ScenarioConfig;

namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig cfg;
  cfg.B = 1;
  cfg.N = 8;
  cfg.K = 2;
  cfg.L = 8;
  cfg.M = 64;
  return cfg;
}

double dist(const covact::Point& p, const covact::Point& q) {
  return std::hypot(p[0] - q[0], p[1] - q[1]);
}

}  // namespace

TEST_CASE("config validation rejects malformed inputs") {
  ScenarioConfig cfg;
  cfg.B = 0;
  CHECK_THROWS_AS(covact::validate_config(cfg), covact::UnsupportedLayout);
  cfg = ScenarioConfig{};
  cfg.K = cfg.N + 1;
  CHECK_THROWS_AS(covact::validate_config(cfg), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.L = 0;
  CHECK_THROWS_AS(covact::validate_config(cfg), std::invalid_argument);
}

TEST_CASE("noise variance from the power budget") {
  ScenarioConfig cfg;  // defaults: -169 dBm/Hz over 10 MHz, 23 dBm transmit
  CHECK(covact::noise_variance(cfg) ==
        doctest::Approx(std::pow(10.0, -12.2)).epsilon(1e-12));

  // total noise power equal to the transmit power -> variance 1
  cfg.noise_psd_dbm_hz = -70.0;
  cfg.bandwidth_hz = 1e7;
  cfg.tx_power_dbm = 0.0;
  CHECK(covact::noise_variance(cfg) == doctest::Approx(1.0).epsilon(1e-12));

  cfg.noise_psd_dbm_hz = -30.0;
  cfg.bandwidth_hz = 1.0;
  cfg.tx_power_dbm = 0.0;
  CHECK(covact::noise_variance(cfg) == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("path-loss gain follows the dB formula") {
  ScenarioConfig cfg;
  // 250 m: PL = 128.1 + 37.6 log10(0.25) ~ 105.463 dB
  const double pl_db = cfg.pathloss_a_db + cfg.pathloss_b * std::log10(0.25);
  CHECK(covact::pathloss_gain(cfg, 250.0) ==
        doctest::Approx(std::pow(10.0, -pl_db / 10.0)).epsilon(1e-12));
  CHECK(covact::pathloss_gain(cfg, 250.0) == doctest::Approx(2.843e-11).epsilon(1e-3));
  // 1 km: exactly the dB offset
  CHECK(covact::pathloss_gain(cfg, 1000.0) ==
        doctest::Approx(std::pow(10.0, -128.1 / 10.0)).epsilon(1e-12));
  // distances below the clamp saturate instead of blowing up
  CHECK(covact::pathloss_gain(cfg, 0.0) == covact::pathloss_gain(cfg, 5.0));
  CHECK(covact::pathloss_gain(cfg, 1.0) == covact::pathloss_gain(cfg, 5.0));
}

TEST_CASE("single-cell geometry puts one BS at the origin") {
  ScenarioConfig cfg = tiny_config();
  covact::Rng rng(1);
  auto geo = covact::build_geometry(cfg, rng);
  REQUIRE(geo.bs_positions.size() == 1);
  CHECK(geo.bs_positions[0][0] == 0.0);
  CHECK(geo.bs_positions[0][1] == 0.0);
  REQUIRE(geo.device_positions.size() == 1);
  CHECK(geo.device_positions[0].size() == 8);
  for (const auto& p : geo.device_positions[0])
    CHECK(dist(p, geo.bs_positions[0]) <= cfg.cell_radius_m + 1e-9);
}

TEST_CASE("seven-cell geometry keeps devices within their hexagon") {
  ScenarioConfig cfg;
  cfg.N = 40;
  covact::Rng rng(3);
  auto geo = covact::build_geometry(cfg, rng);
  REQUIRE(geo.bs_positions.size() == 7);
  REQUIRE(geo.wrap_shifts.size() == 7);  // identity plus six neighbor images
  CHECK(geo.wrap_shifts[0][0] == 0.0);
  CHECK(geo.wrap_shifts[0][1] == 0.0);
  for (int j = 0; j < 7; ++j)
    for (const auto& p : geo.device_positions[static_cast<std::size_t>(j)])
      CHECK(dist(p, geo.bs_positions[static_cast<std::size_t>(j)]) <=
            cfg.cell_radius_m + 1e-9);
}

TEST_CASE("geometry generation is a pure function of the seed") {
  ScenarioConfig cfg;
  cfg.N = 10;
  cfg.K = 2;
  covact::Rng r1(9), r2(9);
  auto g1 = covact::build_geometry(cfg, r1);
  auto g2 = covact::build_geometry(cfg, r2);
  REQUIRE(g1.device_positions.size() == g2.device_positions.size());
  for (std::size_t j = 0; j < g1.device_positions.size(); ++j)
    for (std::size_t n = 0; n < g1.device_positions[j].size(); ++n) {
      CHECK(g1.device_positions[j][n][0] == g2.device_positions[j][n][0]);
      CHECK(g1.device_positions[j][n][1] == g2.device_positions[j][n][1]);
    }
}

TEST_CASE("wrap-around images shorten cross-cell distances") {
  ScenarioConfig cfg;
  cfg.N = 60;
  const Scenario scn = covact::make_scenario(cfg);
  const auto& geo = scn.geometry;

  // somewhere in a 60-device-per-cell instance a device must be closer to a
  // wrapped image of a remote BS than to the direct one
  bool wrapped_wins = false;
  for (int b = 0; b < cfg.B; ++b) {
    const auto bs = geo.bs_positions[static_cast<std::size_t>(b)];
    for (int j = 0; j < cfg.B; ++j) {
      for (const auto& p : geo.device_positions[static_cast<std::size_t>(j)]) {
        const double direct = dist(p, bs);
        double best = direct;
        for (const auto& sh : geo.wrap_shifts) {
          const covact::Point img{p[0] + sh[0], p[1] + sh[1]};
          best = std::min(best, dist(img, bs));
        }
        if (best < direct - 1e-9) wrapped_wins = true;
      }
    }
  }
  CHECK(wrapped_wins);

  // gains are exactly the path-loss law evaluated at the minimum-image distance
  for (int b = 0; b < cfg.B; ++b)
    for (int j = 0; j < cfg.B; ++j)
      for (int n = 0; n < cfg.N; n += 17) {
        const auto& p = geo.device_positions[static_cast<std::size_t>(j)]
                                            [static_cast<std::size_t>(n)];
        double best = std::numeric_limits<double>::infinity();
        for (const auto& sh : geo.wrap_shifts) {
          const covact::Point img{p[0] + sh[0], p[1] + sh[1]};
          best = std::min(best, dist(img, geo.bs_positions[static_cast<std::size_t>(b)]));
        }
        CHECK(scn.gain(b, j, n) ==
              doctest::Approx(covact::pathloss_gain(cfg, best)).epsilon(1e-12));
      }
}

TEST_CASE("all gains are finite and strictly positive") {
  ScenarioConfig cfg;
  cfg.N = 20;
  const Scenario scn = covact::make_scenario(cfg);
  for (double g : scn.gains) {
    CHECK(g > 0.0);
    CHECK(std::isfinite(g));
  }
}

TEST_CASE("antenna count does not perturb geometry or signatures") {
  ScenarioConfig a = tiny_config();
  ScenarioConfig b = tiny_config();
  b.M = 512;
  const Scenario sa = covact::make_scenario(a);
  const Scenario sb = covact::make_scenario(b);
  CHECK(sa.gains == sb.gains);
  CHECK(sa.signatures[0] == sb.signatures[0]);
  CHECK(sa.geometry.device_positions[0][3][0] == sb.geometry.device_positions[0][3][0]);
}

TEST_CASE("noise normalization rescales gains and pins the variance at one") {
  ScenarioConfig cfg = tiny_config();
  const Scenario raw = covact::make_scenario(cfg);
  cfg.normalize_noise = true;
  const Scenario scaled = covact::make_scenario(cfg);
  CHECK(scaled.noise_var == doctest::Approx(1.0).epsilon(1e-14));
  const double c = covact::noise_variance(cfg);
  for (std::size_t i = 0; i < raw.gains.size(); ++i)
    CHECK(scaled.gains[i] == doctest::Approx(raw.gains[i] / c).epsilon(1e-12));
}

TEST_CASE("ground truth has exactly K actives per cell") {
  ScenarioConfig cfg;
  cfg.N = 200;
  cfg.K = 20;
  auto truth = covact::draw_truth(cfg);
  REQUIRE(truth.active.size() == static_cast<std::size_t>(cfg.coords()));
  for (int b = 0; b < cfg.B; ++b) {
    int ones = 0;
    for (int n = 0; n < cfg.N; ++n)
      ones += truth.active[static_cast<std::size_t>(b * cfg.N + n)];
    CHECK(ones == cfg.K);
  }
  CHECK(truth.actives() == cfg.B * cfg.K);

  cfg.K = 0;
  auto none = covact::draw_truth(cfg);
  CHECK(none.actives() == 0);
  cfg.K = cfg.N;
  auto all = covact::draw_truth(cfg);
  CHECK(all.actives() == cfg.coords());

  cfg.K = 20;
  auto again = covact::draw_truth(cfg);
  CHECK(again.active == covact::draw_truth(cfg).active);
}

TEST_CASE("ideal observations at an all-inactive truth are pure noise") {
  ScenarioConfig cfg = tiny_config();
  cfg.K = 0;
  const Scenario scn = covact::make_scenario(cfg);
  const auto truth = covact::draw_truth(cfg);
  const auto obs = covact::synthesize_observations(scn, truth, ObservationMode::Ideal);
  CHECK(obs.antennas_used == 0);
  CHECK(obs.mode == ObservationMode::Ideal);
  const auto expect = covact::ComplexMatrix::scaled_identity(
      static_cast<std::size_t>(cfg.L), scn.noise_var);
  CHECK(covact::frobenius_distance(obs.sample_covs[0], expect) == doctest::Approx(0.0));
}

TEST_CASE("ideal observations match a brute-force model covariance") {
  ScenarioConfig cfg;
  cfg.B = 2;
  cfg.N = 5;
  cfg.K = 2;
  cfg.L = 6;
  const Scenario scn = covact::make_scenario(cfg);
  const auto truth = covact::draw_truth(cfg);
  const auto obs = covact::synthesize_observations(scn, truth, ObservationMode::Ideal);

  for (int b = 0; b < cfg.B; ++b) {
    Eigen::MatrixXcd expect =
        scn.noise_var * Eigen::MatrixXcd::Identity(cfg.L, cfg.L);
    for (int j = 0; j < cfg.B; ++j)
      for (int n = 0; n < cfg.N; ++n) {
        if (!truth.active[static_cast<std::size_t>(j * cfg.N + n)]) continue;
        auto s = scn.signature(j, n);
        Eigen::VectorXcd se(cfg.L);
        for (int l = 0; l < cfg.L; ++l) se(l) = s[static_cast<std::size_t>(l)];
        expect += scn.gain(b, j, n) * se * se.adjoint();
      }
    CHECK((testutil::eigen_of(obs.sample_covs[static_cast<std::size_t>(b)]) - expect)
              .norm() < 1e-12);
  }
}

TEST_CASE("sampled covariances are Hermitian PSD") {
  ScenarioConfig cfg = tiny_config();
  const Scenario scn = covact::make_scenario(cfg);
  const auto truth = covact::draw_truth(cfg);
  const auto obs = covact::synthesize_observations(scn, truth, ObservationMode::Sampled);
  CHECK(obs.antennas_used == cfg.M);
  for (const auto& cov : obs.sample_covs) {
    CHECK(cov.is_hermitian());
    covact::ComplexMatrix shifted = cov;
    for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += 1e-12;
    CHECK_NOTHROW((void)covact::cholesky_factor(shifted));
  }
}

TEST_CASE("sample covariance converges toward the model as M grows") {
  ScenarioConfig cfg = tiny_config();
  double err_small = 0.0, err_large = 0.0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    cfg.seed = seed;
    cfg.M = 64;
    const Scenario small = covact::make_scenario(cfg);
    const auto truth = covact::draw_truth(cfg);
    std::vector<double> a(truth.active.begin(), truth.active.end());
    const auto model = covact::model_covariance(small, a, 0);
    err_small += covact::frobenius_distance(
        covact::synthesize_observations(small, truth, ObservationMode::Sampled)
            .sample_covs[0],
        model);
    cfg.M = 4096;
    const Scenario big = covact::make_scenario(cfg);
    err_large += covact::frobenius_distance(
        covact::synthesize_observations(big, truth, ObservationMode::Sampled)
            .sample_covs[0],
        model);
  }
  CHECK(err_large < err_small);
}

TEST_CASE("container round-trip is bit-exact") {
  ScenarioConfig cfg = tiny_config();
  covact::SavedInstance inst;
  inst.scenario = covact::make_scenario(cfg);
  inst.truth = covact::draw_truth(cfg);
  inst.observations =
      covact::synthesize_observations(inst.scenario, inst.truth, ObservationMode::Sampled);

  const std::string path = (std::filesystem::temp_directory_path() / "covact_rt.scn").string();
  covact::save_scenario(path, inst);
  const auto back = covact::load_scenario(path);

  CHECK(back.scenario.config.N == cfg.N);
  CHECK(back.scenario.config.seed == cfg.seed);
  CHECK(back.scenario.noise_var == inst.scenario.noise_var);
  CHECK(back.scenario.gains == inst.scenario.gains);
  CHECK(back.scenario.signatures[0] == inst.scenario.signatures[0]);
  CHECK(back.truth.active == inst.truth.active);
  CHECK(back.observations.antennas_used == inst.observations.antennas_used);
  CHECK(back.observations.sample_covs[0] == inst.observations.sample_covs[0]);

  // saving the loaded instance reproduces the file byte for byte
  const std::string path2 = path + ".again";
  covact::save_scenario(path2, back);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("container rejects bad magic and truncation") {
  ScenarioConfig cfg = tiny_config();
  covact::SavedInstance inst;
  inst.scenario = covact::make_scenario(cfg);
  inst.truth = covact::draw_truth(cfg);
  inst.observations =
      covact::synthesize_observations(inst.scenario, inst.truth, ObservationMode::Ideal);

  const std::string path = (std::filesystem::temp_directory_path() / "covact_bad.scn").string();
  covact::save_scenario(path, inst);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  {
    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::ofstream out(path, std::ios::binary);
    out.write(corrupt.data(), static_cast<std::streamsize>(corrupt.size()));
  }
  CHECK_THROWS_AS((void)covact::load_scenario(path), covact::SchemaVersionMismatch);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS((void)covact::load_scenario(path), covact::IoError);
  CHECK_THROWS_AS((void)covact::load_scenario("/nonexistent/covact.scn"), covact::IoError);
  std::remove(path.c_str());
}
