#include "modsat/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <malloc.h>
#include <iostream>
#include <sstream>

using modsat::HarnessError;
using modsat::json;

namespace {

void on_sigint(int) { modsat::stop_flag().store(true); }

int fail(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
  return 1;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      if (item.empty() || item[0] == '-') throw std::invalid_argument(item);
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw HarnessError("invalid_config", "bad seed '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Batch-sized temporaries are otherwise mmapped and unmapped on every update.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  CLI::App app{"Modular satellite morphology and attitude control co-design"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train RL co-design or the GA baseline over several seeds");
  std::string algo, seeds, out, config_file;
  int dims = 0, jobs = 0;
  long budget = 0;
  std::vector<std::string> overrides;
  bool print_config = false;
  auto* o_algo = train->add_option("--algo", algo, "rl or ga");
  auto* o_dims = train->add_option("--dims", dims, "grid size (3 or 5)");
  auto* o_seeds = train->add_option("--seeds", seeds, "comma-separated seed list");
  auto* o_budget = train->add_option("--budget", budget, "env steps per seed");
  auto* o_out = train->add_option("--out", out, "run directory");
  auto* o_jobs = train->add_option("--jobs", jobs, "parallel seed jobs");
  train->add_option("--config", config_file, "flat JSON config file");
  train->add_option("--set", overrides, "key=value override (repeatable)");
  train->add_flag("--print-config", print_config, "print the resolved config and exit");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint deterministically");
  std::string ckpt, trace;
  int episodes = 5;
  std::uint64_t eval_seed = 0;
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "number of episodes");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--trace", trace, "write a JSON-lines step trace");

  auto* exp = app.add_subcommand("export-morphology", "Export the designed morphology of a checkpoint");
  std::string exp_ckpt, exp_out;
  exp->add_option("--ckpt", exp_ckpt, "checkpoint file")->required();
  exp->add_option("--out", exp_out, "output JSON file")->required();

  auto* cmp = app.add_subcommand("compare", "Compare an RL run with a GA run");
  std::string rl_dir, ga_dir, cmp_out;
  cmp->add_option("--rl", rl_dir, "RL run directory")->required();
  cmp->add_option("--ga", ga_dir, "GA run directory")->required();
  cmp->add_option("--out", cmp_out, "comparison CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  std::signal(SIGINT, on_sigint);
  try {
    if (train->parsed()) {
      modsat::RunConfig cfg = config_file.empty() ? modsat::RunConfig{} : modsat::load_config_file(config_file);
      if (o_algo->count()) cfg.algo = algo;
      if (o_dims->count()) cfg.dims = dims;
      if (o_seeds->count()) cfg.seeds = parse_seeds(seeds);
      if (o_budget->count()) cfg.budget = budget;
      if (o_out->count()) cfg.out = out;
      if (o_jobs->count()) cfg.jobs = jobs;
      for (const auto& s : overrides) modsat::apply_override(cfg, s);
      cfg.validate();
      if (print_config) {
        std::cout << modsat::to_json(cfg).dump(2) << std::endl;
        return 0;
      }
      const auto summary = modsat::cmd_train(cfg);
      std::cout << json{{"run_dir", summary.run_dir.string()},
                        {"aggregate", summary.aggregate_file.string()},
                        {"interrupted", summary.interrupted}}
                       .dump()
                << std::endl;
      return summary.interrupted ? 130 : 0;
    }
    if (eval->parsed()) {
      std::cout << modsat::cmd_eval(ckpt, episodes, eval_seed, trace).dump(2) << std::endl;
      return 0;
    }
    if (exp->parsed()) {
      std::cout << modsat::cmd_export_morphology(exp_ckpt, exp_out);
      return 0;
    }
    if (cmp->parsed()) {
      std::cout << modsat::cmd_compare(rl_dir, ga_dir, cmp_out).line() << std::endl;
      return 0;
    }
  } catch (const HarnessError& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return fail("usage", "no subcommand");
}
