// har: experiment driver for subject-invariant activity recognition.
//
// Subcommands: prepare, loso, disc-compare, shift, sweep, plot.
// CLI flags override config-file keys; HAR_DATA_ROOT overrides dataset_root.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "har/config.hpp"
#include "har/errors.hpp"
#include "har/experiments.hpp"
#include "har/plots.hpp"
#include "har/records.hpp"
#include "har/shift.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string dataset;
  std::string mode;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  bool deterministic = false;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Experiment config file (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--dataset", o.dataset,
                  "Dataset name: pamap2, mhealth, realdisp, synthetic");
  cmd->add_option("--mode", o.mode,
                  "Training mode: supervised_only, through_step2, full");
  cmd->add_option("--seeds", o.seeds, "Run seeds (comma separated)")->delimiter(',');
  cmd->add_option("--out", o.out_dir, "Output directory for records and plots");
  cmd->add_flag("--deterministic", o.deterministic,
                "Bit-reproducible records (omits wall-clock fields)");
  cmd->add_option("--workers", o.workers, "Fold worker threads")
      ->check(CLI::PositiveNumber);
}

har::ExperimentConfig resolve_config(const CLI::App* cmd, const CommonOpts& o) {
  har::ExperimentConfig config;
  if (!o.config_path.empty()) config = har::ExperimentConfig::load(o.config_path);
  if (cmd->count("--dataset") > 0) config.dataset = o.dataset;
  if (cmd->count("--mode") > 0) config.mode = o.mode;
  if (cmd->count("--seeds") > 0) config.seeds = o.seeds;
  if (cmd->count("--out") > 0) config.out_dir = o.out_dir;
  if (cmd->count("--deterministic") > 0) config.deterministic = true;
  if (cmd->count("--workers") > 0) config.workers = o.workers;
  config.validate();
  return config;
}

void print_shift_report(const har::ShiftReport& report, const std::string& dataset) {
  std::printf("latent shift, train vs held-out subject (%s)\n", dataset.c_str());
  std::printf("  %-10s %12s %12s %10s\n", "activity", "after step2", "after step3",
              "change %");
  std::printf("  %-10s %12.6f %12.6f %+9.2f%%\n", "overall", report.overall_step2,
              report.overall_step3, report.overall_pct_change);
  for (const auto& row : report.per_activity) {
    if (!row.valid) {
      std::printf("  %-10d %12s %12s %10s\n", row.activity, "-", "-", "skipped");
      continue;
    }
    std::printf("  %-10d %12.6f %12.6f %+9.2f%%\n", row.activity, row.d_step2,
                row.d_step3, row.pct_change);
  }
  std::printf("  positive change = distance reduced by the adversarial step\n");
}

void write_shift_plots(const har::ShiftReport& report, const fs::path& out_dir,
                       const std::string& dataset) {
  std::vector<har::BarItem> overall{{dataset, report.overall_pct_change}};
  har::write_bar_chart_svg(out_dir / "shift_overall.svg",
                           "Latent distance change, step 2 to step 3", overall,
                           "change (%)");
  std::vector<har::BarItem> per_act;
  for (const auto& row : report.per_activity) {
    if (!row.valid) continue;
    per_act.push_back({"class " + std::to_string(row.activity), row.pct_change});
  }
  if (!per_act.empty()) {
    har::write_bar_chart_svg(out_dir / "shift_per_activity.svg",
                             "Per-activity latent distance change (" + dataset + ")",
                             per_act, "change (%)");
  }
  std::printf("plots: %s\n", (out_dir / "shift_overall.svg").string().c_str());
}

void print_outcome(const std::string& title, const har::LosoOutcome& outcome) {
  std::fputs(har::format_aggregate_table(title, outcome.stats).c_str(), stdout);
}

int cmd_prepare(const har::ExperimentConfig& config) {
  bool cache_hit = false;
  auto windows = har::load_windows(config, /*use_cache=*/true, &cache_hit);
  std::map<int, int> per_subject;
  for (const auto& w : windows) ++per_subject[w.s];
  std::printf("dataset %s: %zu windows, %zu subjects (%s)\n", config.dataset.c_str(),
              windows.size(), per_subject.size(), cache_hit ? "cache hit" : "built");
  for (const auto& [subject, count] : per_subject)
    std::printf("  subject %d: %d windows\n", subject, count);
  return 0;
}

int cmd_loso(const har::ExperimentConfig& config) {
  auto outcome = har::run_loso(config);
  print_outcome(config.dataset + " / " + config.mode, outcome);
  if (outcome.has_shift) {
    print_shift_report(outcome.shift, config.dataset);
    write_shift_plots(outcome.shift, config.out_dir, config.dataset);
  }
  std::printf("records: %s\n",
              (fs::path(config.out_dir) / "records.jsonl").string().c_str());
  return 0;
}

int cmd_disc_compare(const har::ExperimentConfig& config) {
  auto outcomes = har::compare_discriminators(config);
  for (const auto& [variant, outcome] : outcomes)
    print_outcome(config.dataset + " / discriminator " + variant, outcome);
  return 0;
}

int cmd_shift(const har::ExperimentConfig& config) {
  har::ExperimentConfig run = config;
  run.mode = "full";
  run.shift_per_activity = true;
  auto outcome = har::run_loso(run);
  if (!outcome.has_shift) {
    std::fprintf(stderr, "har shift: no shift measurements were produced\n");
    return 1;
  }
  print_shift_report(outcome.shift, run.dataset);
  write_shift_plots(outcome.shift, run.out_dir, run.dataset);
  return 0;
}

int cmd_sweep(const har::ExperimentConfig& config, const std::string& which,
              const std::vector<double>& values) {
  auto points = har::weight_sweep(config, which, values);
  std::printf("sweep of %s on %s (%s mode)\n", which.c_str(), config.dataset.c_str(),
              config.mode.c_str());
  std::printf("  %10s %18s %18s\n", which.c_str(), "accuracy", "macro F1");
  har::Series acc{"accuracy", {}, {}};
  har::Series f1{"macro F1", {}, {}};
  for (const auto& p : points) {
    std::printf("  %10.4f %9.4f +- %5.4f %9.4f +- %5.4f\n", p.value,
                p.stats.mean_accuracy, p.stats.std_accuracy, p.stats.mean_macro_f1,
                p.stats.std_macro_f1);
    acc.x.push_back(p.value);
    acc.y.push_back(p.stats.mean_accuracy);
    f1.x.push_back(p.value);
    f1.y.push_back(p.stats.mean_macro_f1);
  }
  fs::path plot = fs::path(config.out_dir) / ("sweep_" + which + ".svg");
  har::write_line_chart_svg(plot, "LOSO metrics vs " + which, {acc, f1}, which,
                            "metric");
  std::printf("plot: %s\n", plot.string().c_str());
  return 0;
}

int cmd_plot(const har::ExperimentConfig& config, const std::string& records_arg) {
  fs::path records_file = records_arg.empty()
                              ? fs::path(config.out_dir) / "records.jsonl"
                              : fs::path(records_arg);
  std::ifstream in(records_file);
  if (!in) {
    std::fprintf(stderr, "har plot: cannot open %s\n", records_file.string().c_str());
    return 1;
  }
  std::vector<har::LatentShift> step2, step3;
  std::map<std::string, std::vector<nlohmann::json>> by_mode;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    by_mode[j.value("mode", std::string())].push_back(j);
    auto rec = har::record_from_json(j);
    if (rec.has_shift_step2 && rec.has_shift_step3) {
      step2.push_back(rec.shift_step2);
      step3.push_back(rec.shift_step3);
    }
  }
  for (const auto& [mode, records] : by_mode) {
    auto stats = har::aggregate_records(records, mode);
    std::fputs(
        har::format_aggregate_table(config.dataset + " / " + mode, stats).c_str(),
        stdout);
  }
  if (!step2.empty()) {
    auto report = har::shift_delta(step2, step3);
    print_shift_report(report, config.dataset);
    write_shift_plots(report, config.out_dir, config.dataset);
  } else {
    std::printf("no shift measurements in %s; only tables were produced\n",
                records_file.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subject-invariant activity recognition experiments"};
  app.require_subcommand(1);

  CommonOpts prepare_opts, loso_opts, disc_opts, shift_opts, sweep_opts, plot_opts;

  auto* prepare = app.add_subcommand("prepare", "Parse, segment, and cache windows");
  add_common(prepare, prepare_opts);

  auto* loso = app.add_subcommand("loso", "Leave-one-subject-out run for one mode");
  add_common(loso, loso_opts);

  auto* disc = app.add_subcommand("disc-compare",
                                  "Compare discriminator variants, encoder fixed");
  add_common(disc, disc_opts);

  auto* shift = app.add_subcommand("shift",
                                   "Full-mode run plus latent shift report and plots");
  add_common(shift, shift_opts);

  auto* sweep = app.add_subcommand("sweep", "Sweep one loss weight over given values");
  add_common(sweep, sweep_opts);
  std::string sweep_which;
  std::vector<double> sweep_values;
  sweep->add_option("--which", sweep_which, "Weight to sweep: w_A, w_R, or w_C")
      ->required();
  sweep->add_option("--values", sweep_values, "Sweep values (comma separated)")
      ->required()
      ->delimiter(',');

  auto* plot = app.add_subcommand("plot", "Re-emit tables and plots from records");
  add_common(plot, plot_opts);
  std::string plot_records;
  plot->add_option("--records", plot_records, "Records file (JSONL)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) return cmd_prepare(resolve_config(prepare, prepare_opts));
    if (loso->parsed()) return cmd_loso(resolve_config(loso, loso_opts));
    if (disc->parsed()) return cmd_disc_compare(resolve_config(disc, disc_opts));
    if (shift->parsed()) return cmd_shift(resolve_config(shift, shift_opts));
    if (sweep->parsed())
      return cmd_sweep(resolve_config(sweep, sweep_opts), sweep_which, sweep_values);
    if (plot->parsed()) return cmd_plot(resolve_config(plot, plot_opts), plot_records);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "har: %s\n", e.what());
    return 1;
  }
  return 0;
}
