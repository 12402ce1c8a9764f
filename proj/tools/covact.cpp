// covact: generate | solve | bench | roc over an INI spec with flag overrides.
// Progress goes to stderr; stdout carries the CSV only under --stdout.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "covact/experiment.hpp"

namespace {

// CLI11 maps an INI section to a subcommand of the same name, but the spec
// sections are namespaces for dotted flags (--scenario.N and friends), so the
// section is folded back into the key before option matching.
class SectionConfig : public CLI::ConfigINI {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> flat;
    for (const auto& item : CLI::ConfigINI::from_config(input)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      CLI::ConfigItem entry;
      entry.name = item.fullname();
      entry.inputs = item.inputs;
      flat.push_back(entry);
    }
    return flat;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariance-based device activity detection for multi-cell massive MIMO"};
  app.require_subcommand(1);
  app.set_config("--spec", "",
                 "spec file with [scenario], [solver] and [experiment] sections; "
                 "flags win over file values");
  app.config_formatter(std::make_shared<SectionConfig>());

  covact::ExperimentSpec spec;
  std::string delta_schedule = "paper";
  std::vector<int> sweep_flat;

  app.add_option("--scenario.B", spec.scenario.B, "cells");
  app.add_option("--scenario.N", spec.scenario.N, "devices per cell");
  app.add_option("--scenario.K", spec.scenario.K, "active devices per cell");
  app.add_option("--scenario.L", spec.scenario.L, "signature length");
  app.add_option("--scenario.M", spec.scenario.M, "antennas per BS");
  app.add_option("--scenario.cell_radius_m", spec.scenario.cell_radius_m, "cell radius [m]");
  app.add_option("--scenario.pathloss_a_db", spec.scenario.pathloss_a_db,
                 "path loss offset at 1 km [dB]");
  app.add_option("--scenario.pathloss_b", spec.scenario.pathloss_b,
                 "path loss slope [dB/decade]");
  app.add_option("--scenario.tx_power_dbm", spec.scenario.tx_power_dbm, "device TX power [dBm]");
  app.add_option("--scenario.noise_psd_dbm_hz", spec.scenario.noise_psd_dbm_hz,
                 "noise PSD [dBm/Hz]");
  app.add_option("--scenario.bandwidth_hz", spec.scenario.bandwidth_hz, "bandwidth [Hz]");
  app.add_option("--scenario.seed", spec.scenario.seed, "master scenario seed");
  app.add_flag("--scenario.normalize_noise", spec.scenario.normalize_noise,
               "rescale gains so the noise variance becomes 1");

  app.add_option("--solver.epsilon", spec.solver.epsilon, "termination tolerance");
  app.add_option("--solver.max_outer_iters", spec.solver.max_outer_iters, "iteration cap");
  app.add_option("--solver.update_threshold", spec.solver.update_threshold,
                 "minimum |step| counted as an update");
  app.add_option("--solver.seed", spec.solver.seed, "permutation master seed");
  app.add_option("--solver.delta_schedule", delta_schedule, "paper | zero | custom")
      ->check(CLI::IsMember({"paper", "zero", "custom"}));
  app.add_option("--solver.custom_delta", spec.solver.custom_delta,
                 "constant threshold for the custom schedule");

  app.add_option("--experiment.trials", spec.trials, "Monte-Carlo trials");
  app.add_option("--experiment.thresholds", spec.thresholds,
                 "ascending decision thresholds");
  app.add_option("--experiment.sweep", sweep_flat, "flat N K L triples for bench");
  app.add_option("--experiment.output_dir", spec.output_dir, "output directory");
  app.add_option("--experiment.id", spec.experiment_id, "experiment id used in file names");
  app.add_option("--experiment.algorithm", spec.algorithm,
                 "random-cd | active-set-cd | both")
      ->check(CLI::IsMember({"random-cd", "active-set-cd", "both"}));
  app.add_flag("--experiment.ideal", spec.ideal_mode,
               "exact model covariances instead of sampled ones");
  app.add_flag("--experiment.pooled", spec.pooled, "pooled-count roc aggregation");
  app.add_flag("--experiment.traces", spec.traces, "write per-run JSON traces");
  app.add_flag("--stdout", spec.to_stdout, "stream the CSV to stdout");

  auto* cmd_generate = app.add_subcommand("generate", "write scenario containers to disk");
  auto* cmd_solve = app.add_subcommand("solve", "run the detectors, one row per trial/threshold");
  auto* cmd_bench = app.add_subcommand("bench", "timing sweep with sequential timed trials");
  auto* cmd_roc = app.add_subcommand("roc", "threshold sweep with rates aggregated over trials");
  for (auto* cmd : {cmd_generate, cmd_solve, cmd_bench, cmd_roc}) cmd->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (delta_schedule == "zero")
    spec.solver.delta_schedule = covact::DeltaScheduleKind::Zero;
  else if (delta_schedule == "custom")
    spec.solver.delta_schedule = covact::DeltaScheduleKind::Custom;
  else
    spec.solver.delta_schedule = covact::DeltaScheduleKind::Paper;

  if (sweep_flat.size() % 3 != 0) {
    std::cerr << "error: --experiment.sweep expects N K L triples\n";
    return 1;
  }
  for (std::size_t i = 0; i < sweep_flat.size(); i += 3)
    spec.sweep.push_back({sweep_flat[i], sweep_flat[i + 1], sweep_flat[i + 2]});

  try {
    if (cmd_generate->parsed()) {
      covact::run_generate(spec, std::cerr);
      return 0;
    }
    covact::RunSummary summary;
    if (cmd_solve->parsed())
      summary = covact::run_solve(spec, std::cerr);
    else if (cmd_bench->parsed())
      summary = covact::run_bench(spec, std::cerr);
    else
      summary = covact::run_roc(spec, std::cerr);
    if (summary.hit_iter_cap) {
      std::cerr << "warning: at least one run hit the iteration cap\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
