#include "covact/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "covact/errors.hpp"

namespace covact {

static_assert(std::endian::native == std::endian::little,
              "scenario container assumes a little-endian host");

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kMinDistanceM = 5.0;  // BS-device distance clamp
constexpr char kMagic[8] = {'C', 'O', 'V', 'A', 'C', 'T', 'S', 'C'};
constexpr std::uint32_t kVersion = 1;

bool in_hexagon(double x, double y, double r) {
  // flat-top hexagon, circumradius r, centered at the origin
  return std::abs(x) <= r && std::abs(y) <= kSqrt3 * r / 2.0 &&
         kSqrt3 * std::abs(x) + std::abs(y) <= kSqrt3 * r;
}

Point sample_in_hexagon(double r, Rng& rng) {
  for (;;) {
    const double x = (2.0 * rng.uniform() - 1.0) * r;
    const double y = (2.0 * rng.uniform() - 1.0) * (kSqrt3 * r / 2.0);
    if (in_hexagon(x, y, r)) return {x, y};
  }
}

// axial hex coordinate to the plane; neighboring centers are sqrt(3)*r apart
Point axial_point(int q, int r_ax, double r) {
  return {q * 1.5 * r, q * (kSqrt3 * r / 2.0) + r_ax * (kSqrt3 * r)};
}

}  // namespace

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.B < 1) throw UnsupportedLayout("cell count must be >= 1");
  if (cfg.N < 1 || cfg.L < 1 || cfg.M < 1)
    throw std::invalid_argument("N, L, M must be >= 1");
  if (cfg.K < 0 || cfg.K > cfg.N)
    throw std::invalid_argument("K must satisfy 0 <= K <= N");
  if (!(cfg.cell_radius_m > 0.0)) throw std::invalid_argument("cell radius must be > 0");
  if (!(cfg.bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
}

double noise_variance(const ScenarioConfig& cfg) {
  const double noise_dbm = cfg.noise_psd_dbm_hz + 10.0 * std::log10(cfg.bandwidth_hz);
  return std::pow(10.0, (noise_dbm - cfg.tx_power_dbm) / 10.0);
}

double pathloss_gain(const ScenarioConfig& cfg, double d_m) {
  const double d_km = std::max(d_m, kMinDistanceM) / 1000.0;
  const double pl_db = cfg.pathloss_a_db + cfg.pathloss_b * std::log10(d_km);
  return std::pow(10.0, -pl_db / 10.0);
}

Geometry build_geometry(const ScenarioConfig& cfg, Rng& rng) {
  validate_config(cfg);
  const double r = cfg.cell_radius_m;
  Geometry geo;
  geo.wrap_shifts.push_back({0.0, 0.0});

  if (cfg.B == 7) {
    // hexagonal cluster with wrap-around: the cluster tiles the plane under
    // the lattice spanned by axial (2,1) and (-1,3); the six nearest images
    // sit at +-(2,1), +-(-1,3), +-(3,-2)
    static constexpr int kCluster[7][2] = {{0, 0}, {1, 0},  {0, 1}, {-1, 1},
                                           {-1, 0}, {0, -1}, {1, -1}};
    static constexpr int kShifts[6][2] = {{2, 1},  {-2, -1}, {-1, 3},
                                          {1, -3}, {3, -2},  {-3, 2}};
    for (const auto& c : kCluster)
      geo.bs_positions.push_back(axial_point(c[0], c[1], r));
    for (const auto& s : kShifts)
      geo.wrap_shifts.push_back(axial_point(s[0], s[1], r));
  } else if (cfg.B == 1) {
    geo.bs_positions.push_back({0.0, 0.0});
  } else {
    // torus grid fallback: as-square-as-possible rows x cols layout with the
    // hexagonal neighbor spacing, wrapped periodically in both axes
    int rows = 1;
    for (int d = static_cast<int>(std::sqrt(static_cast<double>(cfg.B))); d >= 1; --d) {
      if (cfg.B % d == 0) {
        rows = d;
        break;
      }
    }
    const int cols = cfg.B / rows;
    const double spacing = kSqrt3 * r;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        geo.bs_positions.push_back({j * spacing, i * spacing});
    const double wx = cols * spacing;
    const double wy = rows * spacing;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        if (i != 0 || j != 0) geo.wrap_shifts.push_back({j * wx, i * wy});
  }

  geo.device_positions.resize(cfg.B);
  for (int b = 0; b < cfg.B; ++b) {
    geo.device_positions[b].reserve(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
      const Point p = sample_in_hexagon(r, rng);
      geo.device_positions[b].push_back(
          {geo.bs_positions[b][0] + p[0], geo.bs_positions[b][1] + p[1]});
    }
  }
  return geo;
}

std::vector<double> compute_gains(const Geometry& geo, const ScenarioConfig& cfg) {
  std::vector<double> gains(static_cast<std::size_t>(cfg.B) * cfg.B * cfg.N);
  std::size_t idx = 0;
  for (int b = 0; b < cfg.B; ++b) {
    const Point bs = geo.bs_positions[b];
    for (int j = 0; j < cfg.B; ++j) {
      for (int n = 0; n < cfg.N; ++n) {
        const Point dev = geo.device_positions[j][n];
        double best = std::numeric_limits<double>::infinity();
        for (const Point& s : geo.wrap_shifts) {
          const double dx = dev[0] + s[0] - bs[0];
          const double dy = dev[1] + s[1] - bs[1];
          best = std::min(best, dx * dx + dy * dy);
        }
        gains[idx++] = pathloss_gain(cfg, std::sqrt(best));
      }
    }
  }
  return gains;
}

Scenario make_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  Scenario scn;
  scn.config = cfg;

  Rng master(cfg.seed);
  Rng pos_rng = master.substream(Stream::Positions);
  scn.geometry = build_geometry(cfg, pos_rng);
  scn.gains = compute_gains(scn.geometry, cfg);

  Rng sig_rng = master.substream(Stream::Signatures);
  scn.signatures.reserve(cfg.B);
  for (int j = 0; j < cfg.B; ++j) {
    ComplexMatrix s(cfg.N, cfg.L);
    for (int n = 0; n < cfg.N; ++n)
      for (int l = 0; l < cfg.L; ++l) s(n, l) = sig_rng.cgaussian();
    scn.signatures.push_back(std::move(s));
  }

  scn.noise_var = noise_variance(cfg);
  if (cfg.normalize_noise) {
    for (double& g : scn.gains) g /= scn.noise_var;
    scn.noise_var = 1.0;
  }
  return scn;
}

int GroundTruth::actives() const {
  int k = 0;
  for (auto v : active) k += v;
  return k;
}

GroundTruth draw_truth(const ScenarioConfig& cfg) {
  validate_config(cfg);
  Rng rng = Rng(cfg.seed).substream(Stream::Activity);
  GroundTruth truth;
  truth.active.assign(static_cast<std::size_t>(cfg.B) * cfg.N, 0);
  std::vector<int> idx(cfg.N);
  for (int b = 0; b < cfg.B; ++b) {
    for (int n = 0; n < cfg.N; ++n) idx[n] = n;
    for (int i = 0; i < cfg.K; ++i) {
      const auto j = i + static_cast<int>(rng.uniform_below(cfg.N - i));
      std::swap(idx[i], idx[j]);
      truth.active[static_cast<std::size_t>(b) * cfg.N + idx[i]] = 1;
    }
  }
  return truth;
}

ComplexMatrix model_covariance(const Scenario& scn, std::span<const double> a, int b) {
  const int big_l = scn.config.L;
  ComplexMatrix cov = ComplexMatrix::scaled_identity(big_l, scn.noise_var);
  for (int j = 0; j < scn.config.B; ++j) {
    for (int n = 0; n < scn.config.N; ++n) {
      const double w = a[static_cast<std::size_t>(j) * scn.config.N + n] * scn.gain(b, j, n);
      if (w == 0.0) continue;
      const auto s = scn.signature(j, n);
      for (int i = 0; i < big_l; ++i) {
        cov(i, i) += cxd(w * std::norm(s[i]), 0.0);
        for (int k = i + 1; k < big_l; ++k) cov(i, k) += w * s[i] * std::conj(s[k]);
      }
    }
  }
  for (int i = 0; i < big_l; ++i) {
    cov(i, i) = cxd(cov(i, i).real(), 0.0);
    for (int k = i + 1; k < big_l; ++k) cov(k, i) = std::conj(cov(i, k));
  }
  return cov;
}

ObservationSet synthesize_observations(const Scenario& scn, const GroundTruth& truth,
                                       ObservationMode mode) {
  const auto& cfg = scn.config;
  ObservationSet obs;
  obs.mode = mode;
  obs.sample_covs.reserve(cfg.B);

  if (mode == ObservationMode::Ideal) {
    obs.antennas_used = 0;
    std::vector<double> a(truth.active.begin(), truth.active.end());
    for (int b = 0; b < cfg.B; ++b)
      obs.sample_covs.push_back(model_covariance(scn, a, b));
    return obs;
  }

  obs.antennas_used = cfg.M;
  Rng master(cfg.seed);
  Rng chan_rng = master.substream(Stream::Channels);
  Rng noise_rng = master.substream(Stream::Noise);
  const double noise_std = std::sqrt(scn.noise_var);

  ComplexVector y(static_cast<std::size_t>(cfg.L) * cfg.M);
  ComplexVector h(cfg.M);
  for (int b = 0; b < cfg.B; ++b) {
    std::fill(y.begin(), y.end(), cxd{0.0, 0.0});
    for (int j = 0; j < cfg.B; ++j) {
      for (int n = 0; n < cfg.N; ++n) {
        if (!truth.active[static_cast<std::size_t>(j) * cfg.N + n]) continue;
        const double amp = std::sqrt(scn.gain(b, j, n));
        for (int m = 0; m < cfg.M; ++m) h[m] = chan_rng.cgaussian();
        const auto s = scn.signature(j, n);
        for (int l = 0; l < cfg.L; ++l) {
          const cxd c = amp * s[l];
          cxd* row = y.data() + static_cast<std::size_t>(l) * cfg.M;
          for (int m = 0; m < cfg.M; ++m) row[m] += c * h[m];
        }
      }
    }
    for (int l = 0; l < cfg.L; ++l) {
      cxd* row = y.data() + static_cast<std::size_t>(l) * cfg.M;
      for (int m = 0; m < cfg.M; ++m) row[m] += noise_std * noise_rng.cgaussian();
    }

    ComplexMatrix cov(cfg.L, cfg.L);
    for (int i = 0; i < cfg.L; ++i) {
      const cxd* ri = y.data() + static_cast<std::size_t>(i) * cfg.M;
      for (int k = i; k < cfg.L; ++k) {
        const cxd* rk = y.data() + static_cast<std::size_t>(k) * cfg.M;
        cxd s{0.0, 0.0};
        for (int m = 0; m < cfg.M; ++m) s += ri[m] * std::conj(rk[m]);
        s /= static_cast<double>(cfg.M);
        if (k == i) {
          cov(i, i) = cxd(s.real(), 0.0);
        } else {
          cov(i, k) = s;
          cov(k, i) = std::conj(s);
        }
      }
    }
    obs.sample_covs.push_back(std::move(cov));
  }
  return obs;
}

// ---------------------------------------------------------------------------
// binary container

namespace {

void put_raw(std::ostream& os, const void* p, std::size_t bytes) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
  if (!os) throw IoError("scenario container: write failed");
}

void get_raw(std::istream& is, void* p, std::size_t bytes) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (is.gcount() != static_cast<std::streamsize>(bytes))
    throw IoError("scenario container: truncated read");
}

template <typename T>
void put(std::ostream& os, const T& v) {
  put_raw(os, &v, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  get_raw(is, &v, sizeof(T));
  return v;
}

void put_matrix(std::ostream& os, const ComplexMatrix& m) {
  put<std::uint64_t>(os, m.rows());
  put<std::uint64_t>(os, m.cols());
  put_raw(os, m.data(), m.size() * sizeof(cxd));
}

ComplexMatrix get_matrix(std::istream& is) {
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  if (rows > (1u << 20) || cols > (1u << 20))
    throw IoError("scenario container: implausible matrix shape");
  ComplexMatrix m(rows, cols);
  get_raw(is, m.data(), m.size() * sizeof(cxd));
  return m;
}

}  // namespace

void save_scenario(const std::string& path, const SavedInstance& inst) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  put_raw(os, kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);

  const ScenarioConfig& c = inst.scenario.config;
  put<std::int32_t>(os, c.B);
  put<std::int32_t>(os, c.N);
  put<std::int32_t>(os, c.K);
  put<std::int32_t>(os, c.L);
  put<std::int32_t>(os, c.M);
  put(os, c.cell_radius_m);
  put(os, c.pathloss_a_db);
  put(os, c.pathloss_b);
  put(os, c.tx_power_dbm);
  put(os, c.noise_psd_dbm_hz);
  put(os, c.bandwidth_hz);
  put<std::uint64_t>(os, c.seed);
  put<std::uint8_t>(os, c.normalize_noise ? 1 : 0);

  const Geometry& g = inst.scenario.geometry;
  put_raw(os, g.bs_positions.data(), g.bs_positions.size() * sizeof(Point));
  for (const auto& cell : g.device_positions)
    put_raw(os, cell.data(), cell.size() * sizeof(Point));
  put<std::uint64_t>(os, g.wrap_shifts.size());
  put_raw(os, g.wrap_shifts.data(), g.wrap_shifts.size() * sizeof(Point));

  put_raw(os, inst.scenario.gains.data(), inst.scenario.gains.size() * sizeof(double));
  put(os, inst.scenario.noise_var);
  for (const auto& s : inst.scenario.signatures) put_matrix(os, s);

  put<std::uint8_t>(os, inst.truth.active.empty() ? 0 : 1);
  if (!inst.truth.active.empty())
    put_raw(os, inst.truth.active.data(), inst.truth.active.size());

  put<std::uint8_t>(os, inst.observations.sample_covs.empty() ? 0 : 1);
  if (!inst.observations.sample_covs.empty()) {
    put<std::int32_t>(os, inst.observations.antennas_used);
    put<std::uint8_t>(os, inst.observations.mode == ObservationMode::Ideal ? 1 : 0);
    for (const auto& m : inst.observations.sample_covs) put_matrix(os, m);
  }
  os.flush();
  if (!os) throw IoError("scenario container: flush failed for " + path);
}

SavedInstance load_scenario(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);

  char magic[8];
  get_raw(is, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw SchemaVersionMismatch("bad magic header in " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion)
    throw SchemaVersionMismatch("unsupported container version " +
                                std::to_string(version));

  SavedInstance inst;
  ScenarioConfig& c = inst.scenario.config;
  c.B = get<std::int32_t>(is);
  c.N = get<std::int32_t>(is);
  c.K = get<std::int32_t>(is);
  c.L = get<std::int32_t>(is);
  c.M = get<std::int32_t>(is);
  c.cell_radius_m = get<double>(is);
  c.pathloss_a_db = get<double>(is);
  c.pathloss_b = get<double>(is);
  c.tx_power_dbm = get<double>(is);
  c.noise_psd_dbm_hz = get<double>(is);
  c.bandwidth_hz = get<double>(is);
  c.seed = get<std::uint64_t>(is);
  c.normalize_noise = get<std::uint8_t>(is) != 0;
  validate_config(c);

  Geometry& g = inst.scenario.geometry;
  g.bs_positions.resize(c.B);
  get_raw(is, g.bs_positions.data(), g.bs_positions.size() * sizeof(Point));
  g.device_positions.assign(c.B, std::vector<Point>(c.N));
  for (auto& cell : g.device_positions)
    get_raw(is, cell.data(), cell.size() * sizeof(Point));
  g.wrap_shifts.resize(get<std::uint64_t>(is));
  if (g.wrap_shifts.empty() || g.wrap_shifts.size() > 16)
    throw IoError("scenario container: implausible wrap shift count");
  get_raw(is, g.wrap_shifts.data(), g.wrap_shifts.size() * sizeof(Point));

  inst.scenario.gains.resize(static_cast<std::size_t>(c.B) * c.B * c.N);
  get_raw(is, inst.scenario.gains.data(), inst.scenario.gains.size() * sizeof(double));
  inst.scenario.noise_var = get<double>(is);
  inst.scenario.signatures.reserve(c.B);
  for (int j = 0; j < c.B; ++j) {
    ComplexMatrix s = get_matrix(is);
    if (s.rows() != static_cast<std::size_t>(c.N) ||
        s.cols() != static_cast<std::size_t>(c.L))
      throw IoError("scenario container: signature shape mismatch");
    inst.scenario.signatures.push_back(std::move(s));
  }

  if (get<std::uint8_t>(is) != 0) {
    inst.truth.active.resize(static_cast<std::size_t>(c.B) * c.N);
    get_raw(is, inst.truth.active.data(), inst.truth.active.size());
  }

  if (get<std::uint8_t>(is) != 0) {
    inst.observations.antennas_used = get<std::int32_t>(is);
    inst.observations.mode =
        get<std::uint8_t>(is) != 0 ? ObservationMode::Ideal : ObservationMode::Sampled;
    inst.observations.sample_covs.reserve(c.B);
    for (int b = 0; b < c.B; ++b) {
      ComplexMatrix m = get_matrix(is);
      if (m.rows() != static_cast<std::size_t>(c.L) || !m.is_square())
        throw IoError("scenario container: covariance shape mismatch");
      inst.observations.sample_covs.push_back(std::move(m));
    }
  }
  return inst;
}

}  // namespace covact
