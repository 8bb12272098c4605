// lfi: command-line driver for the experiment pipeline.
//
// Exit status: 0 success, 1 invalid input, 2 I/O failure, 3 numerical,
// training or fit failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lfi/error.hpp"
#include "lfi/eval.hpp"
#include "lfi/io.hpp"
#include "lfi/log.hpp"
#include "lfi/pipeline.hpp"

namespace {

using namespace lfi;
namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> out;
  std::string log_level = "info";
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config_path, "experiment config (JSON)");
  if (needs_config) opt->required();
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "run directory (overrides the config and $" + std::string(pipeline::kOutputRootEnv) + ")");
  cmd->add_option("--log-level", c.log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
}

void apply_log_level(const std::string& name) {
  if (name == "debug") log::set_level(log::Level::debug);
  else if (name == "warn") log::set_level(log::Level::warn);
  else if (name == "error") log::set_level(log::Level::error);
  else log::set_level(log::Level::info);
}

struct Run {
  pipeline::ExperimentConfig config;
  pipeline::Layout layout;
};

Run open_run(const Common& c) {
  Run r;
  r.config = pipeline::load_config(c.config_path);
  if (c.seed) r.config.seed = *c.seed;
  r.config.validate();
  std::optional<fs::path> out;
  if (c.out) out = fs::path(*c.out);
  r.layout.root = pipeline::resolve_output(r.config, out);
  return r;
}

void print_summary(const pipeline::EvaluationSummary& s) {
  for (const auto& m : s.methods) {
    std::printf("%-10s tasks=%zu", m.method.c_str(), m.tasks);
    if (m.mean_kl >= 0.0) std::printf(" mean_kl=%.6f", m.mean_kl);
    std::printf(" mean_rel_error=[");
    for (std::size_t j = 0; j < m.mean_relative_error.size(); ++j) {
      std::printf("%s%.6f", j ? ", " : "", m.mean_relative_error[j]);
    }
    std::printf("]\n");
  }
  if (s.kl_difference_ci) {
    const auto& b = *s.kl_difference_ci;
    std::printf("KL(%s) - KL(%s): %s %.6f, %.0f%% CI [%.6f, %.6f]\n", s.pair->first.c_str(), s.pair->second.c_str(),
                eval::to_string(b.statistic).c_str(), b.average, 100.0 * b.level, b.lower, b.upper);
  }
  for (std::size_t j = 0; j < s.rel_error_difference_ci.size(); ++j) {
    const auto& b = s.rel_error_difference_ci[j];
    std::printf("dRE theta%zu (%s - %s): %s %.6f, %.0f%% CI [%.6f, %.6f]\n", j + 1, s.pair->first.c_str(),
                s.pair->second.c_str(), eval::to_string(b.statistic).c_str(), b.average, 100.0 * b.level, b.lower,
                b.upper);
  }
  if (s.excluded_tasks) std::printf("excluded tasks (near-zero true parameter): %zu\n", s.excluded_tasks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Likelihood-free inference workbench: learned summaries + ratio estimation"};
  app.require_subcommand(1);
  Common common;

  auto* simulate = app.add_subcommand("simulate", "generate the training set and observed datasets");
  add_common(simulate, common, true);

  bool resume = false;
  auto* train = app.add_subcommand("train", "train the summary network");
  add_common(train, common, true);
  train->add_flag("--resume", resume, "continue from the saved checkpoint");

  pipeline::InferOptions infer_opts;
  std::optional<std::string> checkpoint, observed;
  auto* infer = app.add_subcommand("infer", "fit ratio models on the grid and compute posteriors");
  add_common(infer, common, true);
  infer->add_option("--checkpoint", checkpoint, "network checkpoint (default: the run's)");
  infer->add_option("--observed", observed, "observed datasets SimBatch (default: the run's)");
  infer->add_flag("--constant-summary", infer_opts.constant_summary,
                  "use the intercept-only summary (posterior must equal the prior)");

  auto* evaluate = app.add_subcommand("evaluate", "score posteriors and write reports");
  add_common(evaluate, common, true);

  std::string input, column, statistic = "mean";
  std::size_t resamples = 200;
  double level = 0.95;
  std::optional<std::string> report;
  auto* bootstrap = app.add_subcommand("bootstrap", "percentile bootstrap interval for a column of numbers");
  add_common(bootstrap, common, false);
  bootstrap->add_option("--input", input, "CSV file (with --column) or one number per line")->required();
  bootstrap->add_option("--column", column, "CSV column name");
  bootstrap->add_option("--statistic", statistic, "mean or median")->check(CLI::IsMember({"mean", "median"}));
  bootstrap->add_option("--resamples", resamples, "bootstrap resamples")->check(CLI::PositiveNumber);
  bootstrap->add_option("--level", level, "interval level")->check(CLI::Range(0.0, 1.0));
  bootstrap->add_option("--report", report, "write the report JSON here");

  auto* smoke = app.add_subcommand("smoke", "tiny end-to-end ARCH run; prints the artifact digest");
  add_common(smoke, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  apply_log_level(common.log_level);

  try {
    if (*simulate) {
      auto run = open_run(common);
      pipeline::write_config(run.config, run.layout);
      pipeline::cmd_simulate(run.config, run.layout, common.threads);
      pipeline::record_stage(run.layout, "simulate", "ok");
    } else if (*train) {
      auto run = open_run(common);
      const auto ck = pipeline::cmd_train(run.config, run.layout, common.threads, resume);
      pipeline::record_stage(run.layout, "train", "ok");
      std::printf("epochs=%zu best_epoch=%zu best_val_loss=%.6g\n", ck.net.report.epochs_run,
                  ck.net.report.best_epoch, ck.net.report.best_val_loss);
    } else if (*infer) {
      auto run = open_run(common);
      if (checkpoint) infer_opts.checkpoint = fs::path(*checkpoint);
      if (observed) infer_opts.observed = fs::path(*observed);
      pipeline::cmd_infer(run.config, run.layout, common.threads, infer_opts);
      pipeline::record_stage(run.layout, "infer", "ok");
    } else if (*evaluate) {
      auto run = open_run(common);
      const auto summary = pipeline::cmd_evaluate(run.config, run.layout, common.threads);
      pipeline::record_stage(run.layout, "evaluate", "ok");
      print_summary(summary);
    } else if (*bootstrap) {
      const auto samples = pipeline::read_samples(input, column);
      const auto r = eval::bootstrap_ci(samples, eval::parse_statistic(statistic), resamples, level,
                                        common.seed.value_or(0), common.threads);
      const auto doc = eval::to_json(r);
      if (report) io::write_json(*report, doc);
      std::cout << doc.dump(2) << '\n';
    } else if (*smoke) {
      auto config = pipeline::smoke_config(common.seed.value_or(1));
      pipeline::Layout layout{pipeline::resolve_output(config, common.out ? std::optional<fs::path>(*common.out)
                                                                          : std::nullopt)};
      pipeline::write_config(config, layout);
      pipeline::cmd_simulate(config, layout, common.threads);
      pipeline::record_stage(layout, "simulate", "ok");
      pipeline::cmd_train(config, layout, common.threads);
      pipeline::record_stage(layout, "train", "ok");
      pipeline::cmd_infer(config, layout, common.threads);
      pipeline::record_stage(layout, "infer", "ok");
      print_summary(pipeline::cmd_evaluate(config, layout, common.threads));
      pipeline::record_stage(layout, "evaluate", "ok");
      std::string listing;
      for (const auto& [path, digest] : pipeline::artifact_digests(layout)) listing += digest + "  " + path + "\n";
      std::printf("artifacts=%s digest=%s\n", layout.root.string().c_str(), io::sha256_hex(listing).c_str());
    }
  } catch (const Error& e) {
    log::error(std::string(to_string(e.kind())) + " error: " + e.what());
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    log::error(std::string("io error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log::error(std::string("unexpected error: ") + e.what());
    return 3;
  }
  return 0;
}
