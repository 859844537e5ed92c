#include "modsat/harness.hpp"

#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace modsat;

namespace {

struct Proc {
  int code = 0;
  std::string out;
};

Proc run(const std::string& args) {
  const std::string cmd = std::string(MODSAT_CLI_PATH) + " " + args + " 2>&1";
  Proc p;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) p.out.append(buf, n);
  const int status = pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("modsat_test_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kTiny =
    "--set 'hidden=[8,8]' --set batch_size=8 --set warmup_steps=20 --set eval_interval=40 "
    "--set eval_episodes=2 --set max_control_steps=10 --set buffer_capacity=1000";

}  // namespace

TEST_CASE("config JSON round trip") {
  RunConfig cfg;
  cfg.algo = "ga";
  cfg.dims = 5;
  cfg.seeds = {3, 9};
  cfg.trainer.network.hidden = {32};
  cfg.episode.target_axis = Vec3::UnitY();
  cfg.ga.population = 6;
  RunConfig back;
  apply_json(back, to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.seeds == cfg.seeds);
  CHECK(back.episode.target_axis->y() == 1.0);
}

TEST_CASE("unknown keys and bad values are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(apply_json(cfg, json{{"learning_rate", 1}}), HarnessError);
  CHECK_THROWS_AS(apply_json(cfg, json{{"dims", "three"}}), HarnessError);
  CHECK_THROWS_AS(apply_override(cfg, "no_equals_sign"), HarnessError);
  apply_override(cfg, "lr_actor=0.001");
  CHECK(cfg.trainer.lr_actor == 0.001);
  apply_override(cfg, "algo=ga");
  CHECK(cfg.algo == "ga");
  apply_override(cfg, "hidden=[5,6]");
  CHECK(cfg.trainer.network.hidden == std::vector<int>{5, 6});
}

TEST_CASE("run config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.seeds.size() == 6);
  cfg.dims = 4;
  CHECK_THROWS_AS(cfg.validate(), HarnessError);
  cfg.dims = 3;
  cfg.seeds = {1, 1};
  CHECK_THROWS_AS(cfg.validate(), HarnessError);
  cfg.seeds = {1};
  cfg.trainer.gamma = 2.0;
  try {
    cfg.validate();
    FAIL("expected an error");
  } catch (const HarnessError& e) {
    CHECK(e.kind() == "invalid_config");
  }
}

TEST_CASE("morphology JSON") {
  Morphology m(3);
  m.set({2, 2, 2}, ModuleType::Actuator);
  CHECK(morphology_from_json(morphology_to_json(m)) == m);
  CHECK_THROWS_AS(morphology_from_json(json{{"dims", 3}}), MorphologyError);
}

TEST_CASE("curve CSV round trip and aggregation") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  const std::vector<CurvePoint> a{{0, -10.0, 1.0, 50.0}, {100, -4.0, 0.5, 20.0}};
  const std::vector<CurvePoint> b{{0, -20.0, 2.0, 70.0}, {100, -2.0, 0.1, 10.0}};
  write_curve_csv(dir / "a.csv", a);
  const auto back = read_curve_csv(dir / "a.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].mean_return == -4.0);
  CHECK(back[1].env_steps == 100);

  const auto agg = aggregate_curves({a, b});
  CHECK(agg[0].mean_return == doctest::Approx(-15.0));
  CHECK(agg[0].std_return == doctest::Approx(5.0));
  CHECK(agg[1].mean_return == doctest::Approx(-3.0));
  CHECK(agg[1].mean_final_theta_err_deg == doctest::Approx(15.0));

  std::ofstream(dir / "bad.csv") << "x,y\n";
  CHECK_THROWS_AS(read_curve_csv(dir / "bad.csv"), HarnessError);
  CHECK_THROWS_AS(read_curve_csv(dir / "missing.csv"), HarnessError);
  fs::remove_all(dir);
}

TEST_CASE("CLI reports errors as one JSON line") {
  const Proc bad = run("train --dims 4 --out /tmp/never");
  CHECK(bad.code != 0);
  const json j = json::parse(bad.out);
  CHECK(j.at("error") == "invalid_config");

  const Proc usage = run("frobnicate");
  CHECK(usage.code != 0);
  CHECK(json::parse(usage.out).at("error") == "usage");

  const Proc unwritable = run("train --seeds 1 --budget 10 --out /proc/forbidden/run");
  CHECK(unwritable.code != 0);
  CHECK(json::parse(unwritable.out).at("error") == "unwritable_path");

  const Proc missing = run("eval --ckpt /nonexistent.bin --episodes 2");
  CHECK(missing.code != 0);
  CHECK(json::parse(missing.out).at("error") == "checkpoint");
}

TEST_CASE("print-config applies precedence") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"dims": 5, "lr_actor": 0.5, "seeds": [4]})";
  const Proc p = run("train --config " + (dir / "c.json").string() + " --dims 3 --set lr_actor=0.25 --print-config");
  REQUIRE(p.code == 0);
  const json j = json::parse(p.out);
  CHECK(j.at("dims") == 3);
  CHECK(j.at("lr_actor") == 0.25);
  CHECK(j.at("seeds") == json::array({4}));
  fs::remove_all(dir);
}

TEST_CASE("train, eval, export and compare end to end") {
  const fs::path rl = scratch("rl"), rl2 = scratch("rl2"), ga = scratch("ga");
  const std::string common = " --dims 3 --seeds 1,2 --budget 100 " + kTiny;
  REQUIRE(run("train --algo rl --out " + rl.string() + common).code == 0);
  REQUIRE(run("train --algo rl --out " + rl2.string() + common).code == 0);
  REQUIRE(run("train --algo ga --out " + ga.string() + common + " --set population=2 --set generations=2").code == 0);

  for (auto s : {1, 2}) {
    const fs::path d = seed_dir(rl, static_cast<std::uint64_t>(s));
    CHECK(fs::exists(d / "curve.csv"));
    CHECK(fs::exists(d / "checkpoint.bin"));
    CHECK(fs::exists(d / "config.json"));
    CHECK(slurp(d / "curve.csv") == slurp(seed_dir(rl2, static_cast<std::uint64_t>(s)) / "curve.csv"));
    CHECK(slurp(d / "checkpoint.bin") == slurp(seed_dir(rl2, static_cast<std::uint64_t>(s)) / "checkpoint.bin"));
    // Evaluations at 0, 40, 80, 100.
    CHECK(read_curve_csv(d / "curve.csv").size() == 4);
  }
  const auto c1 = read_curve_csv(seed_dir(rl, 1) / "curve.csv");
  const auto c2 = read_curve_csv(seed_dir(rl, 2) / "curve.csv");
  const auto agg = read_curve_csv(rl / "aggregate.csv");
  REQUIRE(agg.size() == c1.size());
  for (std::size_t i = 0; i < agg.size(); ++i) {
    CHECK(agg[i].mean_return == doctest::Approx((c1[i].mean_return + c2[i].mean_return) / 2));
  }
  const auto gc = read_curve_csv(seed_dir(ga, 1) / "curve.csv");
  REQUIRE(gc.size() == 2);
  CHECK(gc.back().env_steps == 100);

  const std::string ckpt = (seed_dir(rl, 1) / "checkpoint.bin").string();
  const Proc e1 = run("eval --ckpt " + ckpt + " --episodes 3 --seed 7");
  const Proc e2 = run("eval --ckpt " + ckpt + " --episodes 3 --seed 7");
  REQUIRE(e1.code == 0);
  CHECK(e1.out == e2.out);
  const json report = json::parse(e1.out);
  CHECK(report.at("episode_results").size() == 3);
  CHECK_NOTHROW(morphology_from_json(report.at("morphology")));
  CHECK(run("eval --ckpt " + ckpt + " --episodes 0").code != 0);

  const fs::path morph = rl / "morph.json";
  const Proc ex = run("export-morphology --ckpt " + ckpt + " --out " + morph.string());
  REQUIRE(ex.code == 0);
  const Morphology m = morphology_from_json(json::parse(slurp(morph)));
  CHECK(m == morphology_from_json(report.at("morphology")));
  CHECK(slurp(morph.string() + ".txt") == render_layers(m));

  const fs::path same = rl / "same.csv";
  const Proc cmp_same = run("compare --rl " + rl.string() + " --ga " + rl2.string() + " --out " + same.string());
  REQUIRE(cmp_same.code == 0);
  std::istringstream rows(slurp(same));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "env_steps,rl_mean,rl_std,ga_mean,ga_std,diff");
  while (std::getline(rows, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");

  const CompareSummary s = cmd_compare(rl, ga, rl / "cmp.csv");
  CHECK(s.seeds == 2);
  CHECK(s.rl_wins + s.ga_wins + s.ties == 2);

  fs::remove(seed_dir(ga, 2) / "curve.csv");
  const Proc missing = run("compare --rl " + rl.string() + " --ga " + ga.string() + " --out " + (rl / "x.csv").string());
  CHECK(missing.code != 0);
  CHECK(json::parse(missing.out).at("error") == "missing_file");

  const fs::path other = scratch("other");
  REQUIRE(run("train --algo rl --out " + other.string() + " --dims 3 --seeds 1,2 --budget 60 " + kTiny).code == 0);
  const Proc mismatch = run("compare --rl " + rl.string() + " --ga " + other.string() + " --out " + (rl / "y.csv").string());
  CHECK(json::parse(mismatch.out).at("error") == "mismatched_budgets");

  for (const auto& d : {rl, rl2, ga, other}) fs::remove_all(d);
}
