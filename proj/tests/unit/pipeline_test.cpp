#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "gen.hpp"
#include "lfi/error.hpp"
#include "lfi/io.hpp"
#include "lfi/pipeline.hpp"

using namespace lfi;
using namespace lfi::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lfi_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

/// ARCH run small enough for a unit test; manual summaries only, so no training.
ExperimentConfig manual_only(std::uint64_t seed) {
  auto c = smoke_config(seed);
  c.methods = {lfire::SummaryKind::manual};
  c.m = 100;
  c.grid = {4, 4};
  c.n_theta = 30;
  c.n_marginal = 30;
  c.tasks = 3;
  c.bootstrap.resamples = 20;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LFI_CLI_PATH) + " " + args + " --log-level error > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config round trip") {
  const auto defaults = ExperimentConfig{};
  CHECK(config_from_json(to_json(defaults)) == defaults);
  gen::for_all(20, 91, [](gen::Gen& g, std::size_t) {
    auto c = smoke_config(g.size(0, 1000000));
    c.m = g.size(2, 50000);
    c.tasks = g.size(1, 600);
    c.n_theta = g.size(2, 2000);
    c.n_marginal = g.size(2, 2000);
    c.fit.folds = g.size(2, 10);
    c.fit.path_length = g.size(2, 100);
    c.fresh_marginal = g.coin();
    c.bootstrap.statistic = g.coin() ? eval::Statistic::mean : eval::Statistic::median;
    c.kde.bandwidth = g.real(0.01, 0.1);
    c.train.adam.lr = g.real(1e-4, 1e-2);
    if (g.coin()) c.methods = {lfire::SummaryKind::manual, lfire::SummaryKind::direnet};
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    REQUIRE(back == c);
    REQUIRE(to_json(back).dump() == j.dump());
  });
  nlohmann::json bad = to_json(defaults);
  bad["surprise"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), Error);
}

TEST_CASE("config validation") {
  auto c = smoke_config(1);
  c.m = 0;
  try {
    c.validate();
    FAIL("m = 0 must be rejected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
    CHECK(exit_code(e.kind()) == 1);
  }
  auto ricker = smoke_config(1);
  ricker.model = ModelId::ricker;
  ricker.prior = default_prior(ModelId::ricker);
  ricker.grid = {5, 5, 5};
  CHECK_THROWS_AS(ricker.validate(), Error);
}

TEST_CASE("stage seeds differ") {
  const auto s = stage_seeds(7);
  const std::uint64_t all[] = {s.training_set, s.observed, s.network, s.banks, s.bootstrap};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) CHECK(all[i] != all[j]);
  }
}

TEST_CASE("output root resolution") {
  auto c = smoke_config(1);
  c.output = "runs/x";
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  CHECK(resolve_output(c, std::nullopt) == fs::path("/tmp/root/runs/x"));
  CHECK(resolve_output(c, fs::path("/elsewhere")) == fs::path("/elsewhere"));
  c.output = "/abs/run";
  CHECK(resolve_output(c, std::nullopt) == fs::path("/abs/run"));
  ::unsetenv(kOutputRootEnv);
  c.output = "runs/x";
  CHECK(resolve_output(c, std::nullopt) == fs::path("runs/x"));
}

TEST_CASE("simulate is byte-identical per seed") {
  auto c = manual_only(5);
  const Layout a{scratch("sim_a")}, b{scratch("sim_b")};
  cmd_simulate(c, a, 1);
  cmd_simulate(c, b, 2);
  CHECK(slurp(a.train_batch()) == slurp(b.train_batch()));
  CHECK(slurp(a.observed()) == slurp(b.observed()));
  c.seed = 6;
  const Layout other{scratch("sim_c")};
  cmd_simulate(c, other, 1);
  CHECK(slurp(a.train_batch()) != slurp(other.train_batch()));
  for (const auto& l : {a, b, other}) fs::remove_all(l.root);
}

TEST_CASE("infer and evaluate") {
  const auto c = manual_only(8);
  const Layout run{scratch("run")};
  write_config(c, run);
  cmd_simulate(c, run, 1);
  cmd_infer(c, run, 1);
  for (std::size_t t = 0; t < c.tasks; ++t) {
    CHECK(fs::exists(run.posterior("manual", t)));
    CHECK(fs::exists(run.posterior(kExactMethod, t)));
  }

  SUBCASE("report is reproducible") {
    const auto s1 = cmd_evaluate(c, run, 1);
    const auto csv1 = slurp(run.results_csv());
    const auto json1 = slurp(run.summary());
    const auto s2 = cmd_evaluate(c, run, 2);
    CHECK(slurp(run.results_csv()) == csv1);
    CHECK(slurp(run.summary()) == json1);
    REQUIRE(s1.methods.size() == 1);
    CHECK(s1.methods[0].mean_kl >= 0.0);
    CHECK(csv1.find(",kl\n") != std::string::npos);
  }
  SUBCASE("a missing posterior is an unpaired input") {
    fs::remove(run.posterior("manual", 1));
    try {
      cmd_evaluate(c, run, 1);
      FAIL("evaluation must refuse unpaired inputs");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::configuration);
    }
  }
  SUBCASE("constant summary gives the discretized prior") {
    InferOptions opt;
    opt.constant_summary = true;
    cmd_infer(c, run, 1, opt);
    const auto post = load_posterior_grid(run.posterior("constant", 0));
    std::size_t inside = 0;
    for (std::size_t i = 0; i < post.grid.size(); ++i) inside += c.prior.contains(post.grid.node(i));
    for (std::size_t i = 0; i < post.masses.size(); ++i) {
      CHECK(std::abs(post.masses[i] - 1.0 / static_cast<double>(inside)) < 1e-10);
    }
  }
  SUBCASE("direnet without a checkpoint is a configuration error") {
    auto d = c;
    d.methods = {lfire::SummaryKind::direnet};
    CHECK_THROWS_AS(cmd_infer(d, run, 1), Error);
  }
  fs::remove_all(run.root);
}

TEST_CASE("manifest lists every artifact with its digest") {
  const auto c = manual_only(9);
  const Layout run{scratch("manifest")};
  write_config(c, run);
  cmd_simulate(c, run, 1);
  record_stage(run, "simulate", "ok");
  const auto doc = io::read_json(run.manifest());
  CHECK(doc.at("stages").at("simulate").at("status") == "ok");
  const auto digests = artifact_digests(run);
  CHECK(digests.size() == doc.at("artifacts").size());
  for (const auto& [path, digest] : digests) CHECK(io::sha256_hex(slurp(run.root / path)) == digest);
  fs::remove_all(run.root);
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  auto c = manual_only(3);
  c.output = (dir / "run").string();
  c.m = 0;
  io::write_json(dir / "bad.json", to_json(c));
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string()) == 1);
  CHECK(run_cli("simulate --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("frobnicate") == 1);

  c.m = 100;
  c.methods = {lfire::SummaryKind::direnet};
  io::write_json(dir / "direnet.json", to_json(c));
  CHECK(run_cli("simulate --config " + (dir / "direnet.json").string()) == 0);
  CHECK(run_cli("infer --config " + (dir / "direnet.json").string()) == 1);

  std::ofstream(dir / "values.txt") << "1.0\n2.0\n3.0\n";
  CHECK(run_cli("bootstrap --input " + (dir / "values.txt").string() + " --resamples 10") == 0);
  fs::remove_all(dir);
}
