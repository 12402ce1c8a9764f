// Synthetic multi-cell network instances: hexagonal geometry with wrap-around,
// path-loss gains, Gaussian signatures, random activity, Rayleigh channels and
// per-BS sample covariance matrices, plus binary (de)serialization.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "covact/complex_matrix.hpp"
#include "covact/rng.hpp"

namespace covact {

struct ScenarioConfig {
  int B = 7;             // cells
  int N = 200;           // devices per cell
  int K = 20;            // active devices per cell
  int L = 20;            // signature length
  int M = 512;           // antennas per BS
  double cell_radius_m = 250.0;
  double pathloss_a_db = 128.1;   // dB offset at 1 km
  double pathloss_b = 37.6;       // dB per decade of distance
  double tx_power_dbm = 23.0;
  double noise_psd_dbm_hz = -169.0;
  double bandwidth_hz = 10e6;
  std::uint64_t seed = 1;
  // divide all gains and the noise variance by sigma_w^2; the solver
  // trajectory is invariant under this rescaling
  bool normalize_noise = false;

  int coords() const { return B * N; }
};

void validate_config(const ScenarioConfig& cfg);

using Point = std::array<double, 2>;

struct Geometry {
  std::vector<Point> bs_positions;                      // [cell]
  std::vector<std::vector<Point>> device_positions;     // [cell][device]
  std::vector<Point> wrap_shifts;                       // identity first
};

struct Scenario {
  ScenarioConfig config;
  Geometry geometry;
  // large-scale gains, linear scale, flat [observing BS b][home cell j][device n]
  std::vector<double> gains;
  // signatures[j] is N x L row-major: row n holds s_jn
  std::vector<ComplexMatrix> signatures;
  double noise_var = 0.0;

  double gain(int b, int j, int n) const {
    return gains[(static_cast<std::size_t>(b) * config.B + j) * config.N + n];
  }
  std::span<const cxd> signature(int j, int n) const {
    return signatures[j].row(n);
  }
};

struct GroundTruth {
  std::vector<std::uint8_t> active;  // flat b*N + n, exactly K ones per cell block
  int actives() const;
};

enum class ObservationMode { Sampled, Ideal };

struct ObservationSet {
  std::vector<ComplexMatrix> sample_covs;  // B Hermitian L x L
  int antennas_used = 0;                   // 0 in ideal (infinite-antenna) mode
  ObservationMode mode = ObservationMode::Sampled;
};

// sigma_w^2 from the power budget, normalized by the transmit power
double noise_variance(const ScenarioConfig& cfg);

// path-loss gain at distance d_m meters (after the minimum-distance clamp)
double pathloss_gain(const ScenarioConfig& cfg, double d_m);

Geometry build_geometry(const ScenarioConfig& cfg, Rng& rng);

// flat [b][j][n] table of linear gains; distances take the minimum over all
// wrap-around images
std::vector<double> compute_gains(const Geometry& geo, const ScenarioConfig& cfg);

// geometry + gains + signatures + noise variance, all from named substreams of
// cfg.seed
Scenario make_scenario(const ScenarioConfig& cfg);

GroundTruth draw_truth(const ScenarioConfig& cfg);

ObservationSet synthesize_observations(const Scenario& scn, const GroundTruth& truth,
                                       ObservationMode mode);

// exact model covariance at an arbitrary activity vector (also the ideal-mode
// observation when evaluated at the binary truth)
ComplexMatrix model_covariance(const Scenario& scn, std::span<const double> a, int b);

struct SavedInstance {
  Scenario scenario;
  GroundTruth truth;
  ObservationSet observations;
};

void save_scenario(const std::string& path, const SavedInstance& inst);
SavedInstance load_scenario(const std::string& path);

}  // namespace covact
