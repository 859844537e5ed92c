#include "modsat/harness.hpp"

#include "modsat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace modsat {

namespace {

struct Field {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
Field member(T RunConfig::*m) {
  return {[m](const RunConfig& c) { return json(c.*m); }, [m](RunConfig& c, const json& v) { c.*m = v.get<T>(); }};
}
template <typename T>
Field episode(T EpisodeConfig::*m) {
  return {[m](const RunConfig& c) { return json(c.episode.*m); },
          [m](RunConfig& c, const json& v) { c.episode.*m = v.get<T>(); }};
}
template <typename T>
Field trainer(T TrainerConfig::*m) {
  return {[m](const RunConfig& c) { return json(c.trainer.*m); },
          [m](RunConfig& c, const json& v) { c.trainer.*m = v.get<T>(); }};
}
template <typename T>
Field ga(T GaConfig::*m) {
  return {[m](const RunConfig& c) { return json(c.ga.*m); }, [m](RunConfig& c, const json& v) { c.ga.*m = v.get<T>(); }};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw HarnessError("invalid_config", "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["algo"] = member(&RunConfig::algo);
    t["dims"] = member(&RunConfig::dims);
    t["seeds"] = member(&RunConfig::seeds);
    t["budget"] = member(&RunConfig::budget);
    t["out"] = member(&RunConfig::out);
    t["jobs"] = member(&RunConfig::jobs);

    t["design_rounds"] = episode(&EpisodeConfig::design_rounds);
    t["max_control_steps"] = episode(&EpisodeConfig::max_control_steps);
    t["frame_skip"] = episode(&EpisodeConfig::frame_skip);
    t["dt"] = episode(&EpisodeConfig::dt);
    t["torque_scale"] = episode(&EpisodeConfig::torque_scale);
    t["omega_max"] = episode(&EpisodeConfig::omega_max);
    t["k_q"] = episode(&EpisodeConfig::k_q);
    t["k_omega"] = episode(&EpisodeConfig::k_omega);
    t["k_u"] = episode(&EpisodeConfig::k_u);
    t["k_safe"] = episode(&EpisodeConfig::k_safe);
    t["charge_truncated_horizon"] = episode(&EpisodeConfig::charge_truncated_horizon);
    t["torque_axes"] = episode(&EpisodeConfig::torque_axes);
    t["min_target_deg"] = episode(&EpisodeConfig::min_target_deg);
    t["max_target_deg"] = episode(&EpisodeConfig::max_target_deg);
    t["disturbance"] = {[](const RunConfig& c) { return vec3_json(c.episode.disturbance); },
                        [](RunConfig& c, const json& v) { c.episode.disturbance = vec3_from(v); }};
    t["target_axis"] = {[](const RunConfig& c) { return c.episode.target_axis ? vec3_json(*c.episode.target_axis) : json(nullptr); },
                        [](RunConfig& c, const json& v) {
                          if (v.is_null()) c.episode.target_axis.reset();
                          else c.episode.target_axis = vec3_from(v);
                        }};
    t["fixed_morphology"] = {[](const RunConfig& c) {
                               return c.episode.fixed_morphology ? morphology_to_json(*c.episode.fixed_morphology) : json(nullptr);
                             },
                             [](RunConfig& c, const json& v) {
                               if (v.is_null()) c.episode.fixed_morphology.reset();
                               else c.episode.fixed_morphology = morphology_from_json(v);
                             }};

    t["lr_actor"] = trainer(&TrainerConfig::lr_actor);
    t["lr_critic"] = trainer(&TrainerConfig::lr_critic);
    t["gamma"] = trainer(&TrainerConfig::gamma);
    t["target_retention"] = trainer(&TrainerConfig::target_retention);
    t["exploration_noise"] = trainer(&TrainerConfig::exploration_noise);
    t["target_noise"] = trainer(&TrainerConfig::target_noise);
    t["noise_clip"] = trainer(&TrainerConfig::noise_clip);
    t["policy_delay"] = trainer(&TrainerConfig::policy_delay);
    t["batch_size"] = trainer(&TrainerConfig::batch_size);
    t["buffer_capacity"] = trainer(&TrainerConfig::buffer_capacity);
    t["warmup_steps"] = trainer(&TrainerConfig::warmup_steps);
    t["update_every"] = trainer(&TrainerConfig::update_every);
    t["cut_phase_boundary"] = trainer(&TrainerConfig::cut_phase_boundary);
    t["action_masks"] = trainer(&TrainerConfig::action_masks);
    t["eval_interval"] = trainer(&TrainerConfig::eval_interval);
    t["eval_episodes"] = trainer(&TrainerConfig::eval_episodes);
    t["hidden"] = {[](const RunConfig& c) { return json(c.trainer.network.hidden); },
                   [](RunConfig& c, const json& v) { c.trainer.network.hidden = v.get<std::vector<int>>(); }};

    t["population"] = ga(&GaConfig::population);
    t["survivor_fraction"] = ga(&GaConfig::survivor_fraction);
    t["mutation_prob"] = ga(&GaConfig::mutation_prob);
    t["generations"] = ga(&GaConfig::generations);
    return t;
  }();
  return table;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw HarnessError("unwritable_path", "cannot write " + path.string());
  os << text;
  if (!os) throw HarnessError("unwritable_path", "failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw HarnessError("missing_file", "cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw HarnessError("invalid_json", path.string() + ": " + e.what());
  }
}

Checkpoint load_or_fail(const fs::path& path) {
  try {
    return load_checkpoint(path);
  } catch (const CheckpointError& e) {
    throw HarnessError("checkpoint", e.what());
  }
}

json checkpoint_meta(const RunConfig& cfg, std::uint64_t seed, long env_steps, bool partial,
                     const std::optional<Morphology>& fixed) {
  json snapshot = to_json(cfg);
  snapshot.erase("out");
  snapshot.erase("jobs");
  return {{"format", "modsat-checkpoint"},
          {"algo", cfg.algo},
          {"seed", seed},
          {"env_steps", env_steps},
          {"partial", partial},
          {"config", snapshot},
          {"fixed_morphology", fixed ? morphology_to_json(*fixed) : json(nullptr)}};
}

struct SeedOutcome {
  std::vector<CurvePoint> curve;
  bool interrupted = false;
};

SeedOutcome train_rl_seed(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  const EpisodeConfig ep = cfg.resolved_episode();
  Td3Trainer trainer([ep] { return CodesignEnv(ep); }, cfg.trainer, seed);
  SeedOutcome out;
  long steps = 0;
  TrainHooks hooks;
  hooks.on_eval = [&](const CurvePoint& p, const Td3Agent& agent) {
    out.curve.push_back(p);
    steps = p.env_steps;
    write_curve_csv(dir / "curve.csv", out.curve);
    save_checkpoint(dir / "checkpoint.bin", {kCheckpointVersion, checkpoint_meta(cfg, seed, steps, true, {}), agent.networks()});
  };
  hooks.should_stop = [] { return stop_flag().load(); };
  const TrainResult r = trainer.train(cfg.budget, hooks);
  out.interrupted = r.interrupted;
  write_curve_csv(dir / "curve.csv", out.curve);
  save_checkpoint(dir / "checkpoint.bin",
                  {kCheckpointVersion, checkpoint_meta(cfg, seed, r.env_steps, r.interrupted, {}), trainer.agent().networks()});
  json meta = {{"algo", "rl"},           {"seed", seed},
               {"env_steps", r.env_steps}, {"critic_updates", r.critic_updates},
               {"actor_updates", r.actor_updates}, {"interrupted", r.interrupted},
               {"config", to_json(cfg)}};
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
  return out;
}

SeedOutcome train_ga_seed(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  const EpisodeConfig ep = cfg.resolved_episode();
  SeedOutcome out;
  GaHooks hooks;
  hooks.on_generation = [&](int, const CurvePoint& p, const FitnessResult& best) {
    out.curve.push_back(p);
    write_curve_csv(dir / "curve.csv", out.curve);
    save_checkpoint(dir / "checkpoint.bin",
                    {kCheckpointVersion, checkpoint_meta(cfg, seed, p.env_steps, true, best.morphology), best.networks});
  };
  hooks.should_stop = [] { return stop_flag().load(); };
  const GaResult r = run_ga(cfg.ga, ep, cfg.trainer, cfg.budget, seed, hooks);
  out.interrupted = r.interrupted;
  write_curve_csv(dir / "curve.csv", out.curve);
  if (!r.curve.empty()) {
    save_checkpoint(dir / "checkpoint.bin", {kCheckpointVersion,
                                             checkpoint_meta(cfg, seed, r.env_steps, r.interrupted, r.best.morphology),
                                             r.best.networks});
    write_text(dir / "best_morphology.json", morphology_to_json(r.best.morphology).dump() + "\n");
  }
  json meta = {{"algo", "ga"},
               {"seed", seed},
               {"env_steps", r.env_steps},
               {"evaluations", r.evaluations},
               {"per_genome_budget", per_genome_budget(cfg.ga, cfg.budget)},
               {"best_fitness", r.best.fitness},
               {"all_fitness", r.all_fitness},
               {"interrupted", r.interrupted},
               {"config", to_json(cfg)}};
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
  return out;
}

// Value of a step curve at x: the last point at or before x (NaN before the first).
double hold_value(const std::vector<CurvePoint>& c, long x, double CurvePoint::*field) {
  double v = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : c) {
    if (p.env_steps > x) break;
    v = p.*field;
  }
  return v;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw HarnessError("invalid_config", m); };
  if (algo != "rl" && algo != "ga") fail("algo must be rl or ga");
  if (dims != 3 && dims != 5) fail("dims must be 3 or 5");
  if (seeds.empty()) fail("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) fail("seeds must be distinct");
  if (budget < 1) fail("budget must be positive");
  if (jobs < 1) fail("jobs must be positive");
  if (episode.fixed_morphology && episode.fixed_morphology->dims() != dims) fail("fixed_morphology dims differ from dims");
  try {
    trainer.validate();
    if (algo == "ga") {
      ga.validate();
      if (per_genome_budget(ga, budget) < 1) fail("budget too small for population x generations");
    }
    (void)resolved_episode();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

EpisodeConfig RunConfig::resolved_episode() const {
  EpisodeConfig ep = episode;
  ep.dims = dims;
  return ep.resolved();
}

json to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [key, field] : fields()) j[key] = field.get(cfg);
  return j;
}

void apply_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw HarnessError("invalid_config", "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw HarnessError("invalid_config", "unknown config key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const json::exception& e) {
      throw HarnessError("invalid_config", "bad value for '" + key + "': " + e.what());
    } catch (const MorphologyError& e) {
      throw HarnessError("invalid_config", "bad value for '" + key + "': " + e.what());
    }
  }
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw HarnessError("invalid_config", "override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_json(cfg, json{{key, value}});
}

RunConfig load_config_file(const fs::path& path) {
  RunConfig cfg;
  apply_json(cfg, read_json(path));
  return cfg;
}

json morphology_to_json(const Morphology& m) { return {{"dims", m.dims()}, {"cells", m.codes()}}; }

Morphology morphology_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("cells")) {
    throw MorphologyError("morphology JSON needs dims and cells");
  }
  const int dims = j.at("dims").get<int>();
  const auto codes = j.at("cells").get<std::vector<int>>();
  return Morphology::from_codes(dims, codes);
}

void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << kCurveHeader << "\n";
  for (const auto& p : curve) {
    os << p.env_steps << "," << fmt(p.mean_return) << "," << fmt(p.std_return) << ","
       << fmt(p.mean_final_theta_err_deg) << "\n";
  }
  write_text(path, os.str());
}

std::vector<CurvePoint> read_curve_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw HarnessError("missing_file", "missing curve file " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kCurveHeader) {
    throw HarnessError("invalid_csv", "unexpected curve header in " + path.string());
  }
  std::vector<CurvePoint> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    CurvePoint p;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> p.env_steps >> c1 >> p.mean_return >> c2 >> p.std_return >> c3 >> p.mean_final_theta_err_deg) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw HarnessError("invalid_csv", "malformed row in " + path.string() + ": " + line);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<CurvePoint>>& per_seed) {
  if (per_seed.empty()) return {};
  std::size_t rows = per_seed.front().size();
  for (const auto& c : per_seed) rows = std::min(rows, c.size());
  std::vector<CurvePoint> out;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> returns;
    double theta = 0.0;
    const long x = per_seed.front()[r].env_steps;
    for (const auto& c : per_seed) {
      if (c[r].env_steps != x) throw HarnessError("curve_mismatch", "per-seed curves have different x values");
      returns.push_back(c[r].mean_return);
      theta += c[r].mean_final_theta_err_deg;
    }
    const auto [m, s] = mean_std(returns);
    out.push_back({x, m, s, theta / static_cast<double>(per_seed.size())});
  }
  return out;
}

fs::path seed_dir(const fs::path& run_dir, std::uint64_t seed) { return run_dir / ("seed_" + std::to_string(seed)); }

std::atomic<bool>& stop_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

TrainSummary cmd_train(const RunConfig& cfg) {
  cfg.validate();
  TrainSummary summary;
  summary.run_dir = cfg.out;
  std::error_code ec;
  fs::create_directories(summary.run_dir, ec);
  if (ec) throw HarnessError("unwritable_path", "cannot create " + summary.run_dir.string() + ": " + ec.message());
  write_text(summary.run_dir / "run.json", to_json(cfg).dump(2) + "\n");

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        const fs::path dir = seed_dir(summary.run_dir, cfg.seeds[i]);
        fs::create_directories(dir);
        json snap = to_json(cfg);
        snap["seed"] = cfg.seeds[i];
        write_text(dir / "config.json", snap.dump(2) + "\n");
        outcomes[i] = cfg.algo == "rl" ? train_rl_seed(cfg, cfg.seeds[i], dir) : train_ga_seed(cfg, cfg.seeds[i], dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(cfg.jobs, static_cast<int>(cfg.seeds.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::vector<CurvePoint>> curves;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    summary.curve_files.push_back(seed_dir(summary.run_dir, cfg.seeds[i]) / "curve.csv");
    curves.push_back(outcomes[i].curve);
    summary.interrupted = summary.interrupted || outcomes[i].interrupted;
  }
  summary.aggregate_file = summary.run_dir / "aggregate.csv";
  write_curve_csv(summary.aggregate_file, aggregate_curves(curves));
  return summary;
}

EpisodeConfig episode_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("config")) throw HarnessError("checkpoint", "checkpoint metadata has no config");
  RunConfig cfg;
  apply_json(cfg, ckpt.meta.at("config"));
  EpisodeConfig ep = cfg.resolved_episode();
  if (ckpt.meta.contains("fixed_morphology") && !ckpt.meta.at("fixed_morphology").is_null()) {
    ep.fixed_morphology = morphology_from_json(ckpt.meta.at("fixed_morphology"));
  }
  if (ckpt.nets.actor.trunk.input_size() != kStateWidth) {
    throw HarnessError("checkpoint", "actor input width does not match the environment state width");
  }
  return ep;
}

json cmd_eval(const fs::path& checkpoint, int episodes, std::uint64_t seed, const fs::path& trace_out) {
  if (episodes < 1) throw HarnessError("invalid_argument", "episodes must be positive");
  const Checkpoint ckpt = load_or_fail(checkpoint);
  CodesignEnv env(episode_from_checkpoint(ckpt));
  auto rng = substream(seed, "eval");
  std::vector<std::uint64_t> seeds;
  for (int e = 0; e < episodes; ++e) seeds.push_back(rng());
  const EvalResult r = evaluate_policy(ckpt.nets.actor, env, seeds, !trace_out.empty());

  json detail = json::array();
  std::string trace_text;
  for (std::size_t e = 0; e < r.episodes.size(); ++e) {
    const auto& ep = r.episodes[e];
    detail.push_back({{"return", ep.episode_return},
                      {"final_theta_err_deg", ep.final_theta_err_deg},
                      {"final_omega_norm", ep.final_omega_norm},
                      {"control_steps", ep.control_steps},
                      {"failed", ep.failed}});
    for (const auto& rec : ep.trace) trace_text += trace_json_line(rec) + "\n";
  }
  if (!trace_out.empty()) write_text(trace_out, trace_text);
  return {{"checkpoint", checkpoint.string()},
          {"episodes", episodes},
          {"seed", seed},
          {"mean_return", r.mean_return},
          {"std_return", r.std_return},
          {"mean_final_theta_err_deg", r.mean_final_theta_err_deg},
          {"mean_final_omega_norm", r.mean_final_omega_norm},
          {"episode_results", detail},
          {"morphology", morphology_to_json(r.episodes.front().morphology)}};
}

std::string cmd_export_morphology(const fs::path& checkpoint, const fs::path& out) {
  const Checkpoint ckpt = load_or_fail(checkpoint);
  CodesignEnv env(episode_from_checkpoint(ckpt));
  const Morphology m = design_morphology(ckpt.nets.actor, env, 0);
  const std::string text = render_layers(m);
  write_text(out, morphology_to_json(m).dump() + "\n");
  write_text(fs::path(out.string() + ".txt"), text);
  return text;
}

std::string CompareSummary::line() const {
  std::ostringstream os;
  os << "summary seeds=" << seeds << " rl_wins=" << rl_wins << " ga_wins=" << ga_wins << " ties=" << ties
     << " rl_final_mean=" << fmt(rl_final_mean) << " ga_final_mean=" << fmt(ga_final_mean)
     << " rl_steps_to_ga_final=" << rl_steps_to_ga_final << " ga_steps_to_final=" << ga_steps_to_final;
  return os.str();
}

CompareSummary cmd_compare(const fs::path& rl_dir, const fs::path& ga_dir, const fs::path& out) {
  const json rl_run = read_json(rl_dir / "run.json");
  const json ga_run = read_json(ga_dir / "run.json");
  if (rl_run.at("dims") != ga_run.at("dims")) throw HarnessError("mismatched_dims", "runs use different dims");
  if (rl_run.at("budget") != ga_run.at("budget")) throw HarnessError("mismatched_budgets", "runs use different budgets");
  const auto seeds = rl_run.at("seeds").get<std::vector<std::uint64_t>>();

  std::vector<std::vector<CurvePoint>> rl, ga;
  for (auto s : seeds) {
    rl.push_back(read_curve_csv(seed_dir(rl_dir, s) / "curve.csv"));
    ga.push_back(read_curve_csv(seed_dir(ga_dir, s) / "curve.csv"));
    if (rl.back().empty() || ga.back().empty()) {
      throw HarnessError("missing_file", "empty curve for seed " + std::to_string(s));
    }
  }

  std::set<long> xs;
  for (const auto* group : {&rl, &ga}) {
    for (const auto& c : *group) {
      for (const auto& p : c) xs.insert(p.env_steps);
    }
  }
  auto method_at = [](const std::vector<std::vector<CurvePoint>>& curves, long x) {
    std::vector<double> v;
    for (const auto& c : curves) v.push_back(hold_value(c, x, &CurvePoint::mean_return));
    return mean_std(v);
  };

  CompareSummary summary;
  summary.seeds = static_cast<int>(seeds.size());
  std::ostringstream os;
  os << "env_steps,rl_mean,rl_std,ga_mean,ga_std,diff\n";
  for (long x : xs) {
    const auto [rm, rs] = method_at(rl, x);
    const auto [gm, gs] = method_at(ga, x);
    auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
    os << x << "," << cell(rm) << "," << cell(rs) << "," << cell(gm) << "," << cell(gs) << "," << cell(rm - gm) << "\n";
  }
  write_text(out, os.str());

  std::vector<double> rl_final, ga_final;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const double r = rl[i].back().mean_return;
    const double g = ga[i].back().mean_return;
    rl_final.push_back(r);
    ga_final.push_back(g);
    if (r > g) ++summary.rl_wins;
    else if (g > r) ++summary.ga_wins;
    else ++summary.ties;
  }
  summary.rl_final_mean = mean_std(rl_final).first;
  summary.ga_final_mean = mean_std(ga_final).first;
  for (long x : xs) {
    const double rm = method_at(rl, x).first;
    if (summary.rl_steps_to_ga_final < 0 && !std::isnan(rm) && rm >= summary.ga_final_mean) summary.rl_steps_to_ga_final = x;
    const double gm = method_at(ga, x).first;
    if (summary.ga_steps_to_final < 0 && !std::isnan(gm) && gm >= summary.ga_final_mean) summary.ga_steps_to_final = x;
  }
  json s = {{"seeds", summary.seeds},
            {"rl_wins", summary.rl_wins},
            {"ga_wins", summary.ga_wins},
            {"ties", summary.ties},
            {"rl_final_mean", summary.rl_final_mean},
            {"ga_final_mean", summary.ga_final_mean},
            {"rl_steps_to_ga_final", summary.rl_steps_to_ga_final},
            {"ga_steps_to_final", summary.ga_steps_to_final}};
  write_text(fs::path(out.string() + ".summary.json"), s.dump(2) + "\n");
  return summary;
}

}  // namespace modsat
