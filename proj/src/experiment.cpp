#include "covact/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include "json.hpp"

#include "covact/detection.hpp"
#include "covact/errors.hpp"

namespace covact {

namespace fs = std::filesystem;

namespace {

double cpu_seconds() {
  timespec ts;
  if (clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts) != 0) return 0.0;
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

std::vector<std::string> algorithms_for(const ExperimentSpec& spec) {
  if (spec.algorithm == "both") return {"random-cd", "active-set-cd"};
  return {spec.algorithm};
}

SolveResult run_algorithm(const std::string& name, const Scenario& scn,
                          const ObservationSet& obs, const SolverConfig& cfg) {
  if (name == "random-cd") return random_cd(scn, obs, cfg);
  if (name == "active-set-cd") return active_set_cd(scn, obs, cfg);
  throw std::invalid_argument("unknown algorithm: " + name);
}

struct TrialInstance {
  Scenario scenario;
  GroundTruth truth;
  ObservationSet observations;
};

TrialInstance make_trial_instance(const ExperimentSpec& spec, int trial) {
  ScenarioConfig cfg = spec.scenario;
  cfg.seed = trial_seed(spec.scenario.seed, trial);
  TrialInstance inst;
  inst.scenario = make_scenario(cfg);
  inst.truth = draw_truth(cfg);
  inst.observations = synthesize_observations(
      inst.scenario, inst.truth,
      spec.ideal_mode ? ObservationMode::Ideal : ObservationMode::Sampled);
  return inst;
}

SolverConfig trial_solver_config(const ExperimentSpec& spec, int trial) {
  SolverConfig cfg = spec.solver;
  cfg.seed = trial_seed(spec.solver.seed, trial);
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::string trial_tag(int trial) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%04d", trial);
  return buf;
}

// run fn(0..trials-1) on up to `width` workers; exceptions are re-thrown in
// trial order after all workers drain
void parallel_trials(int trials, int width, const std::function<void(int)>& fn) {
  if (width <= 1 || trials <= 1) {
    for (int t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(trials);
  std::vector<std::thread> pool;
  const int workers = std::min(width, trials);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t; (t = next.fetch_add(1)) < trials;) {
        try {
          fn(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_trace(const ExperimentSpec& spec, const std::string& algo, int trial,
                 std::uint64_t scenario_seed, const SolverReport& rep,
                 double cpu_time_s) {
  nlohmann::json j;
  j["experiment"] = spec.experiment_id;
  j["algorithm"] = algo;
  j["trial"] = trial;
  j["seed"] = scenario_seed;
  j["objective"] = rep.objective_trace;
  j["residual"] = rep.residual_trace;
  j["active_set_size"] = rep.active_set_sizes;
  j["delta_norms"] = rep.delta_norms;
  j["terminated_by"] =
      rep.terminated_by == Termination::Residual ? "residual" : "iter-cap";
  j["iterations"] = rep.iterations;
  j["successful_updates"] = rep.successful_updates;
  j["unnecessary_checks"] = rep.unnecessary_checks;
  j["final_residual"] = rep.final_residual;
  j["wall_time_s"] = rep.wall_time_total;
  j["cpu_time_s"] = cpu_time_s;
  const fs::path path = fs::path(spec.output_dir) /
                        (spec.experiment_id + "_" + algo + "_" + trial_tag(trial) + ".json");
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

}  // namespace

void validate_spec(const ExperimentSpec& spec) {
  validate_config(spec.scenario);
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!std::is_sorted(spec.thresholds.begin(), spec.thresholds.end()))
    throw std::invalid_argument("thresholds must be ascending");
  for (double t : spec.thresholds)
    if (!(t >= 0.0) || !(t <= 1.0))
      throw std::invalid_argument("thresholds must lie in [0,1]");
  for (const auto& [n, k, l] : spec.sweep)
    if (k > n || k < 0 || n < 1 || l < 1)
      throw std::invalid_argument("sweep triple must satisfy 0 <= K <= N, L >= 1");
  if (spec.algorithm != "both" && spec.algorithm != "random-cd" &&
      spec.algorithm != "active-set-cd")
    throw std::invalid_argument("algorithm must be random-cd, active-set-cd or both");
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, (1ULL << 32) + static_cast<std::uint64_t>(trial));
}

int trial_worker_count() {
  if (const char* env = std::getenv("COVACT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    return n >= 1 ? static_cast<int>(n) : 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw) : 1;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "experiment,trial,algorithm,N,K,L,M,threshold,pm,pfa,wall_time_s,"
        "iterations,successful_updates,unnecessary_checks,final_residual\n";
  for (const ResultRow& r : rows) {
    os << r.experiment << ',' << r.trial << ',' << r.algorithm << ',' << fmt(r.N)
       << ',' << fmt(r.K) << ',' << fmt(r.L) << ',' << fmt(r.M) << ','
       << fmt(r.threshold) << ',' << fmt(r.pm) << ',' << fmt(r.pfa) << ','
       << fmt(r.wall_time_s) << ',' << fmt(r.iterations) << ','
       << fmt(r.successful_updates) << ',' << fmt(r.unnecessary_checks) << ','
       << fmt(r.final_residual) << '\n';
  }
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "experiment,algorithm,N,K,L,M,trials,mean_time_s,std_time_s,mean_updates,"
        "mean_checks\n";
  for (const BenchRow& r : rows) {
    os << r.experiment << ',' << r.algorithm << ',' << fmt(r.N) << ',' << fmt(r.K)
       << ',' << fmt(r.L) << ',' << fmt(r.M) << ',' << fmt(r.trials) << ','
       << fmt(r.mean_time_s) << ',' << fmt(r.std_time_s) << ','
       << fmt(r.mean_updates) << ',' << fmt(r.mean_checks) << '\n';
  }
}

void run_generate(const ExperimentSpec& spec, std::ostream& progress) {
  validate_spec(spec);
  ensure_dir(spec.output_dir);
  for (int t = 0; t < spec.trials; ++t) {
    const TrialInstance inst = make_trial_instance(spec, t);
    const fs::path path = fs::path(spec.output_dir) /
                          (spec.experiment_id + "_" + trial_tag(t) + ".scn");
    save_scenario(path.string(),
                  {inst.scenario, inst.truth, inst.observations});
    progress << "generate " << (t + 1) << "/" << spec.trials << " -> " << path.string()
             << '\n';
  }
}

RunSummary run_solve(const ExperimentSpec& spec, std::ostream& progress) {
  validate_spec(spec);
  const auto algos = algorithms_for(spec);

  struct TrialRecord {
    std::uint64_t seed = 0;
    std::vector<ResultRow> rows;
    std::vector<SolverReport> reports;  // parallel to algos
    std::vector<double> cpu_times;
  };
  std::vector<TrialRecord> records(spec.trials);

  parallel_trials(spec.trials, trial_worker_count(), [&](int t) {
    const TrialInstance inst = make_trial_instance(spec, t);
    SolverConfig scfg = trial_solver_config(spec, t);
    scfg.record_objective_trace = spec.traces;
    TrialRecord& rec = records[t];
    rec.seed = inst.scenario.config.seed;
    for (const std::string& algo : algos) {
      const double cpu0 = cpu_seconds();
      const SolveResult result = run_algorithm(algo, inst.scenario,
                                               inst.observations, scfg);
      rec.cpu_times.push_back(cpu_seconds() - cpu0);
      rec.reports.push_back(result.report);
      for (double thr : spec.thresholds) {
        const ErrorRates rates = error_rates(decide(result.a, thr), inst.truth);
        ResultRow row;
        row.experiment = spec.experiment_id;
        row.trial = t;
        row.algorithm = algo;
        row.N = inst.scenario.config.N;
        row.K = inst.scenario.config.K;
        row.L = inst.scenario.config.L;
        row.M = inst.scenario.config.M;
        row.threshold = thr;
        row.pm = rates.pm;
        row.pfa = rates.pfa;
        row.wall_time_s = result.report.wall_time_total;
        row.iterations = result.report.iterations;
        row.successful_updates = static_cast<double>(result.report.successful_updates);
        row.unnecessary_checks = static_cast<double>(result.report.unnecessary_checks);
        row.final_residual = result.report.final_residual;
        rec.rows.push_back(std::move(row));
      }
    }
  });

  RunSummary summary;
  for (int t = 0; t < spec.trials; ++t) {
    const TrialRecord& rec = records[t];
    summary.rows.insert(summary.rows.end(), rec.rows.begin(), rec.rows.end());
    for (std::size_t i = 0; i < rec.reports.size(); ++i) {
      if (rec.reports[i].terminated_by == Termination::IterCap)
        summary.hit_iter_cap = true;
    }
    progress << "solve trial " << (t + 1) << "/" << spec.trials << " done\n";
  }

  if (spec.traces) {
    ensure_dir(spec.output_dir);
    for (int t = 0; t < spec.trials; ++t)
      for (std::size_t i = 0; i < algos.size(); ++i)
        write_trace(spec, algos[i], t, records[t].seed, records[t].reports[i],
                    records[t].cpu_times[i]);
  }

  if (spec.to_stdout) {
    write_results_csv(std::cout, summary.rows);
  } else {
    ensure_dir(spec.output_dir);
    const fs::path path =
        fs::path(spec.output_dir) / (spec.experiment_id + "_results.csv");
    auto os = open_out(path);
    write_results_csv(os, summary.rows);
    progress << "wrote " << path.string() << '\n';
  }
  return summary;
}

RunSummary run_roc(const ExperimentSpec& spec, std::ostream& progress) {
  validate_spec(spec);
  if (spec.thresholds.empty())
    throw std::invalid_argument("roc needs a nonempty threshold list");
  const auto algos = algorithms_for(spec);

  struct TrialRecord {
    std::vector<SolverReport> reports;
    std::vector<std::vector<ErrorRates>> rates;    // [algo][threshold]
    std::vector<std::vector<ErrorCounts>> counts;  // [algo][threshold]
  };
  std::vector<TrialRecord> records(spec.trials);

  parallel_trials(spec.trials, trial_worker_count(), [&](int t) {
    const TrialInstance inst = make_trial_instance(spec, t);
    SolverConfig scfg = trial_solver_config(spec, t);
    scfg.record_objective_trace = false;
    TrialRecord& rec = records[t];
    for (const std::string& algo : algos) {
      const SolveResult result = run_algorithm(algo, inst.scenario,
                                               inst.observations, scfg);
      rec.reports.push_back(result.report);
      std::vector<ErrorRates> rates;
      std::vector<ErrorCounts> counts;
      for (double thr : spec.thresholds) {
        const DecisionResult dec = decide(result.a, thr);
        rates.push_back(error_rates(dec, inst.truth));
        counts.push_back(error_counts(dec, inst.truth));
      }
      rec.rates.push_back(std::move(rates));
      rec.counts.push_back(std::move(counts));
    }
  });

  RunSummary summary;
  for (int t = 0; t < spec.trials; ++t) {
    for (const SolverReport& rep : records[t].reports)
      if (rep.terminated_by == Termination::IterCap) summary.hit_iter_cap = true;
    progress << "roc trial " << (t + 1) << "/" << spec.trials << " done\n";
  }

  for (std::size_t ai = 0; ai < algos.size(); ++ai) {
    // per-trial means for the counter columns of the aggregate rows
    double mean_wall = 0.0, mean_iters = 0.0, mean_updates = 0.0, mean_checks = 0.0,
           mean_residual = 0.0;
    for (int t = 0; t < spec.trials; ++t) {
      const SolverReport& rep = records[t].reports[ai];
      mean_wall += rep.wall_time_total;
      mean_iters += rep.iterations;
      mean_updates += static_cast<double>(rep.successful_updates);
      mean_checks += static_cast<double>(rep.unnecessary_checks);
      mean_residual += rep.final_residual;
    }
    const double inv = 1.0 / spec.trials;
    mean_wall *= inv;
    mean_iters *= inv;
    mean_updates *= inv;
    mean_checks *= inv;
    mean_residual *= inv;

    for (std::size_t ti = 0; ti < spec.thresholds.size(); ++ti) {
      ErrorRates agg;
      if (spec.pooled) {
        std::vector<ErrorCounts> counts;
        for (int t = 0; t < spec.trials; ++t) counts.push_back(records[t].counts[ai][ti]);
        agg = aggregate_pooled(counts);
      } else {
        std::vector<ErrorRates> rates;
        for (int t = 0; t < spec.trials; ++t) rates.push_back(records[t].rates[ai][ti]);
        agg = aggregate_mean(rates);
      }
      ResultRow row;
      row.experiment = spec.experiment_id;
      row.trial = -1;  // aggregate over all trials
      row.algorithm = algos[ai];
      row.N = spec.scenario.N;
      row.K = spec.scenario.K;
      row.L = spec.scenario.L;
      row.M = spec.scenario.M;
      row.threshold = spec.thresholds[ti];
      row.pm = agg.pm;
      row.pfa = agg.pfa;
      row.wall_time_s = mean_wall;
      row.iterations = mean_iters;
      row.successful_updates = mean_updates;
      row.unnecessary_checks = mean_checks;
      row.final_residual = mean_residual;
      summary.rows.push_back(std::move(row));
    }
  }

  if (spec.to_stdout) {
    write_results_csv(std::cout, summary.rows);
  } else {
    ensure_dir(spec.output_dir);
    const fs::path path = fs::path(spec.output_dir) / (spec.experiment_id + "_roc.csv");
    auto os = open_out(path);
    write_results_csv(os, summary.rows);
    progress << "wrote " << path.string() << '\n';
  }
  return summary;
}

RunSummary run_bench(const ExperimentSpec& spec, std::ostream& progress) {
  validate_spec(spec);
  if (spec.sweep.empty())
    throw std::invalid_argument("bench needs a nonempty sweep");
  const auto algos = algorithms_for(spec);

  RunSummary summary;
  for (const auto& [n, k, l] : spec.sweep) {
    ExperimentSpec point = spec;
    point.scenario.N = n;
    point.scenario.K = k;
    point.scenario.L = l;
    std::vector<std::vector<double>> wall(algos.size());
    std::vector<std::vector<double>> updates(algos.size());
    std::vector<std::vector<double>> checks(algos.size());
    // timed region: strictly sequential so wall-clock numbers stay honest
    for (int t = 0; t < spec.trials; ++t) {
      const TrialInstance inst = make_trial_instance(point, t);
      SolverConfig scfg = trial_solver_config(point, t);
      scfg.record_objective_trace = false;
      for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        const SolveResult result = run_algorithm(algos[ai], inst.scenario,
                                                 inst.observations, scfg);
        if (result.report.terminated_by == Termination::IterCap)
          summary.hit_iter_cap = true;
        wall[ai].push_back(result.report.wall_time_total);
        updates[ai].push_back(static_cast<double>(result.report.successful_updates));
        checks[ai].push_back(static_cast<double>(result.report.unnecessary_checks));
      }
      progress << "bench N=" << n << " K=" << k << " L=" << l << " trial " << (t + 1)
               << "/" << spec.trials << " done\n";
    }
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
      const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      const double mt = mean(wall[ai]);
      double var = 0.0;
      for (double x : wall[ai]) var += (x - mt) * (x - mt);
      var /= static_cast<double>(wall[ai].size());  // population: 0 for one trial
      BenchRow row;
      row.experiment = spec.experiment_id;
      row.algorithm = algos[ai];
      row.N = n;
      row.K = k;
      row.L = l;
      row.M = spec.scenario.M;
      row.trials = spec.trials;
      row.mean_time_s = mt;
      row.std_time_s = std::sqrt(var);
      row.mean_updates = mean(updates[ai]);
      row.mean_checks = mean(checks[ai]);
      summary.bench_rows.push_back(std::move(row));
    }
  }

  if (spec.to_stdout) {
    write_bench_csv(std::cout, summary.bench_rows);
  } else {
    ensure_dir(spec.output_dir);
    const fs::path path = fs::path(spec.output_dir) / (spec.experiment_id + "_bench.csv");
    auto os = open_out(path);
    write_bench_csv(os, summary.bench_rows);
    progress << "wrote " << path.string() << '\n';
  }
  return summary;
}

}  // namespace covact
