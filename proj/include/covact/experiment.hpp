// Experiment drivers shared by the CLI and the test suite: Monte-Carlo trial
// orchestration (parallel when untimed, sequential when timed), CSV emission
// with fixed headers, and optional per-run JSON traces.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "covact/scenario.hpp"
#include "covact/solvers.hpp"

namespace covact {

struct ExperimentSpec {
  ScenarioConfig scenario;
  SolverConfig solver;
  int trials = 1;
  std::vector<std::array<int, 3>> sweep;  // (N, K, L) triples for bench
  std::vector<double> thresholds{0.5};    // ascending
  std::string output_dir = ".";
  std::string experiment_id = "covact";
  std::string algorithm = "both";  // random-cd | active-set-cd | both
  bool ideal_mode = false;         // exact model covariances instead of sampled
  bool pooled = false;             // pooled-count ROC aggregation
  bool traces = false;             // emit per-run JSON traces
  bool to_stdout = false;          // stream the CSV to stdout instead of a file
};

void validate_spec(const ExperimentSpec& spec);

// per-trial seed from a master seed; the tag space is disjoint from the
// named substream tags so trial streams never collide with purpose streams
std::uint64_t trial_seed(std::uint64_t master, int trial);

// one CSV record per (trial, algorithm, threshold); roc aggregation rows use
// trial = -1 and per-trial means in the counter columns
struct ResultRow {
  std::string experiment;
  long long trial = 0;
  std::string algorithm;
  int N = 0, K = 0, L = 0, M = 0;
  double threshold = 0.0;
  double pm = 0.0;
  double pfa = 0.0;
  double wall_time_s = 0.0;
  double iterations = 0.0;
  double successful_updates = 0.0;
  double unnecessary_checks = 0.0;
  double final_residual = 0.0;
};

struct BenchRow {
  std::string experiment;
  std::string algorithm;
  int N = 0, K = 0, L = 0, M = 0;
  int trials = 0;
  double mean_time_s = 0.0;
  double std_time_s = 0.0;
  double mean_updates = 0.0;
  double mean_checks = 0.0;
};

struct RunSummary {
  std::vector<ResultRow> rows;
  std::vector<BenchRow> bench_rows;
  bool hit_iter_cap = false;
};

// fixed headers; '.' decimal separator, shortest round-trip doubles, NaN as
// "nan" for absent rates
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

// scenario containers, one per trial, written to spec.output_dir
void run_generate(const ExperimentSpec& spec, std::ostream& progress);

// per-trial solves with per-threshold decision rows (parallel across trials)
RunSummary run_solve(const ExperimentSpec& spec, std::ostream& progress);

// timing sweep over spec.sweep; trials are strictly sequential while timed
RunSummary run_bench(const ExperimentSpec& spec, std::ostream& progress);

// per-threshold rates aggregated across trials for both algorithms
RunSummary run_roc(const ExperimentSpec& spec, std::ostream& progress);

// COVACT_THREADS when set, else hardware concurrency
int trial_worker_count();

}  // namespace covact
