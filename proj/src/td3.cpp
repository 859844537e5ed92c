#include "modsat/td3.hpp"

#include "modsat/rng.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace modsat {

namespace {

ActionSeq clip_unit(ActionSeq a) { return a.cwiseMax(-1.0).cwiseMin(1.0); }

double population_std(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

void TrainerConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid trainer config: " + what); };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0, 1)");
  if (!(target_retention > 0.0 && target_retention < 1.0)) fail("target_retention must be in (0, 1)");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) fail("learning rates must be positive");
  if (exploration_noise < 0.0 || target_noise < 0.0 || noise_clip < 0.0) fail("noise scales must be non-negative");
  if (policy_delay < 1 || batch_size < 1 || update_every < 1) fail("delays and sizes must be positive");
  if (buffer_capacity == 0) fail("buffer_capacity must be positive");
  if (warmup_steps < 0) fail("warmup_steps must be non-negative");
  if (eval_interval < 1 || eval_episodes < 1) fail("evaluation settings must be positive");
  if (network.hidden.empty()) fail("network needs hidden layers");
}

Td3Networks Td3Networks::create(const NetworkShape& shape, std::mt19937_64& rng) {
  Td3Networks n;
  n.actor = Actor(shape);
  n.actor.initialize(rng);
  n.critic1 = Critic(shape);
  n.critic1.initialize(rng);
  n.critic2 = Critic(shape);
  n.critic2.initialize(rng);
  n.actor_target = n.actor;
  n.critic1_target = n.critic1;
  n.critic2_target = n.critic2;
  return n;
}

EpisodeSummary run_episode(const Actor& actor, CodesignEnv& env, std::uint64_t seed, bool record_trace) {
  env.set_record_trace(record_trace);
  StepResult res = env.reset(seed);
  EpisodeSummary out;
  while (!env.done()) {
    res = env.step(actor.evaluate(res.states, env.phase()));
    out.episode_return += res.reward;
    out.failed = res.failed;
  }
  out.final_theta_err_deg = env.theta_err_deg();
  out.final_omega_norm = env.attitude().omega.norm();
  out.control_steps = env.control_step_count();
  out.morphology = env.morphology();
  if (record_trace) out.trace = env.trace();
  env.set_record_trace(false);
  return out;
}

EvalResult evaluate_policy(const Actor& actor, CodesignEnv& env, const std::vector<std::uint64_t>& seeds,
                           bool record_trace) {
  EvalResult r;
  std::vector<double> returns;
  for (auto s : seeds) {
    r.episodes.push_back(run_episode(actor, env, s, record_trace));
    returns.push_back(r.episodes.back().episode_return);
    r.mean_final_theta_err_deg += r.episodes.back().final_theta_err_deg;
    r.mean_final_omega_norm += r.episodes.back().final_omega_norm;
  }
  const auto n = static_cast<double>(seeds.size());
  if (n > 0) {
    r.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    r.std_return = population_std(returns, r.mean_return);
    r.mean_final_theta_err_deg /= n;
    r.mean_final_omega_norm /= n;
  }
  return r;
}

Morphology design_morphology(const Actor& actor, CodesignEnv& env, std::uint64_t seed) {
  StepResult res = env.reset(seed);
  while (env.phase() == Phase::Design) res = env.design_step(actor.evaluate(res.states, Phase::Design));
  return env.morphology();
}

Td3Agent::Td3Agent(const TrainerConfig& cfg, std::uint64_t seed)
    : Td3Agent(cfg,
               [&] {
                 auto rng = substream(seed, "init");
                 return Td3Networks::create(cfg.network, rng);
               }(),
               seed) {}

Td3Agent::Td3Agent(const TrainerConfig& cfg, Td3Networks nets, std::uint64_t seed)
    : cfg_(cfg),
      nets_(std::move(nets)),
      actor_opt_trunk_(nets_.actor.trunk, cfg.lr_actor),
      actor_opt_design_(nets_.actor.design_head, cfg.lr_actor),
      actor_opt_control_(nets_.actor.control_head, cfg.lr_actor),
      critic1_opt_(nets_.critic1.net, cfg.lr_critic),
      critic2_opt_(nets_.critic2.net, cfg.lr_critic),
      noise_rng_(derive_seed(seed, "trainer")) {
  cfg_.validate();
}

ActionSeq Td3Agent::select_action(const StateSeq& states, Phase phase, bool explore) {
  ActionSeq a = nets_.actor.evaluate(states, phase);
  if (explore) {
    std::normal_distribution<double> noise(0.0, cfg_.exploration_noise);
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) += noise(noise_rng_);
    }
  }
  return clip_unit(std::move(a));
}

Eigen::VectorXd Td3Agent::bootstrap(const Eigen::VectorXd& reward, const Eigen::VectorXd& not_terminal,
                                    const Eigen::VectorXd& q1, const Eigen::VectorXd& q2, double gamma) {
  return reward + gamma * not_terminal.cwiseProduct(q1.cwiseMin(q2));
}

Eigen::VectorXd Td3Agent::compute_target(const Batch& batch) {
  ActionSeq next = nets_.actor_target.evaluate(batch.next_states, batch.next_control_mask);
  std::normal_distribution<double> noise(0.0, cfg_.target_noise);
  for (Eigen::Index c = 0; c < next.cols(); ++c) {
    for (Eigen::Index r = 0; r < next.rows(); ++r) {
      next(r, c) += std::clamp(noise(noise_rng_), -cfg_.noise_clip, cfg_.noise_clip);
    }
  }
  next = clip_unit(std::move(next));
  const Eigen::MatrixXd x = Critic::stack_inputs(batch.next_states, next);
  const Eigen::VectorXd q1 = group_mean(nets_.critic1_target.net.evaluate(x).row(0), batch.modules);
  const Eigen::VectorXd q2 = group_mean(nets_.critic2_target.net.evaluate(x).row(0), batch.modules);
  return bootstrap(batch.reward, batch.not_terminal, q1, q2, cfg_.gamma);
}

double Td3Agent::critic_loss(const Batch& batch, const Eigen::VectorXd& targets) const {
  const Eigen::MatrixXd x = Critic::stack_inputs(batch.states, batch.actions);
  double total = 0.0;
  for (const Critic* c : {&nets_.critic1, &nets_.critic2}) {
    const Eigen::VectorXd q = group_mean(c->net.evaluate(x).row(0), batch.modules);
    total += (q - targets).squaredNorm() / static_cast<double>(batch.size);
  }
  return total / 2.0;
}

double Td3Agent::update_critics(const Batch& batch) { return update_critics(batch, compute_target(batch)); }

double Td3Agent::update_critics(const Batch& batch, const Eigen::VectorXd& targets) {
  if (targets.size() != batch.size) throw TrainingError("target count does not match batch size");
  const Eigen::MatrixXd x = Critic::stack_inputs(batch.states, batch.actions);
  const double per_column = 1.0 / static_cast<double>(batch.size * batch.modules);
  double total = 0.0;
  int which = 1;
  for (auto [critic, opt] : {std::pair{&nets_.critic1, &critic1_opt_}, std::pair{&nets_.critic2, &critic2_opt_}}) {
    MlpCache cache;
    const Eigen::MatrixXd& q_modules = critic->forward(x, cache);
    const Eigen::VectorXd diff = group_mean(q_modules.row(0), batch.modules) - targets;
    const double loss = diff.squaredNorm() / static_cast<double>(batch.size);
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "non-finite loss in critic " << which << " (batch " << batch.size << ", max |target| "
         << targets.cwiseAbs().maxCoeff() << ")";
      throw TrainingError(os.str());
    }
    // dL/dQ_module = 2 (Q - y) / N / n for every module of the sample.
    Eigen::MatrixXd grad(1, x.cols());
    for (Eigen::Index s = 0; s < batch.size; ++s) {
      grad.middleCols(s * batch.modules, batch.modules).setConstant(2.0 * diff(s) * per_column);
    }
    LayerStack grads = critic->net.zero_grads();
    critic->net.backward(cache, grad, grads);
    opt->step(critic->net, grads);
    total += loss;
    ++which;
  }
  return total / 2.0;
}

bool Td3Agent::update_actor_and_targets(const Batch& batch, long update_step) {
  if (update_step % cfg_.policy_delay != 0) return false;

  Actor::Cache actor_cache;
  const Eigen::MatrixXd& actions = nets_.actor.forward(batch.states, batch.control_mask, actor_cache);
  MlpCache critic_cache;
  nets_.critic1.forward(Critic::stack_inputs(batch.states, actions), critic_cache);
  // J = (1/N) sum_s mean_modules Q1, so each module column carries 1/(N n).
  const Eigen::MatrixXd upstream =
      Eigen::MatrixXd::Constant(1, actions.cols(), 1.0 / static_cast<double>(batch.size * batch.modules));
  const Eigen::MatrixXd dx = nets_.critic1.net.backward(critic_cache, upstream, nullptr);
  Eigen::MatrixXd grad_actions = -dx.bottomRows(kActionDim);
  if (cfg_.action_masks) grad_actions = grad_actions * batch.actor_mask.asDiagonal();

  ActorGrads grads = nets_.actor.zero_grads();
  nets_.actor.backward(actor_cache, grad_actions, grads);
  actor_opt_trunk_.step(nets_.actor.trunk, grads.trunk);
  if (batch.control_mask.sum() < static_cast<double>(batch.control_mask.size())) {
    actor_opt_design_.step(nets_.actor.design_head, grads.design);
  }
  if (batch.control_mask.sum() > 0.0) actor_opt_control_.step(nets_.actor.control_head, grads.control);

  const double keep = cfg_.target_retention;
  blend_into(nets_.actor_target.trunk, nets_.actor.trunk, keep);
  blend_into(nets_.actor_target.design_head, nets_.actor.design_head, keep);
  blend_into(nets_.actor_target.control_head, nets_.actor.control_head, keep);
  blend_into(nets_.critic1_target.net, nets_.critic1.net, keep);
  blend_into(nets_.critic2_target.net, nets_.critic2.net, keep);
  return true;
}

Td3Trainer::Td3Trainer(EnvFactory factory, const TrainerConfig& cfg, std::uint64_t seed)
    : factory_(std::move(factory)),
      cfg_(cfg),
      agent_(cfg, seed),
      buffer_(cfg.buffer_capacity),
      env_rng_(derive_seed(seed, "env")),
      sample_rng_(derive_seed(seed, "replay")) {
  auto eval_rng = substream(seed, "eval");
  for (int e = 0; e < cfg_.eval_episodes; ++e) eval_seeds_.push_back(eval_rng());
}

EvalResult Td3Trainer::evaluate(bool record_trace) {
  CodesignEnv env = factory_();
  return evaluate_policy(agent_.networks().actor, env, eval_seeds_, record_trace);
}

TrainResult Td3Trainer::train(long total_steps, const TrainHooks& hooks) {
  TrainResult result;
  CodesignEnv env = factory_();
  const auto emit = [&] {
    const EvalResult e = evaluate();
    CurvePoint p{result.env_steps, e.mean_return, e.std_return, e.mean_final_theta_err_deg};
    result.curve.push_back(p);
    if (hooks.on_eval) hooks.on_eval(p, agent_);
  };
  if (hooks.evaluate) emit();

  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  StepResult current;
  bool need_reset = true;
  while (result.env_steps < total_steps) {
    if (hooks.should_stop && hooks.should_stop()) {
      result.interrupted = true;
      break;
    }
    if (need_reset) {
      current = env.reset(env_rng_());
      need_reset = false;
    }
    const CompactObs before = env.observation();
    ActionSeq action;
    if (result.env_steps < cfg_.warmup_steps) {
      action.resize(kActionDim, current.states.cols());
      for (Eigen::Index c = 0; c < action.cols(); ++c) {
        for (Eigen::Index r = 0; r < kActionDim; ++r) action(r, c) = uniform(agent_.noise_rng());
      }
    } else {
      action = agent_.select_action(current.states, env.phase(), true);
    }
    current = env.step(action);
    ++result.env_steps;

    Transition t;
    t.state = before;
    t.actions = Transition::pack_actions(action);
    t.reward = current.reward;
    t.next_state = env.observation();
    t.done = current.done;
    t.terminal = current.failed || (cfg_.cut_phase_boundary && before.phase == Phase::Design &&
                                    t.next_state.phase == Phase::Control);
    buffer_.push(std::move(t));
    need_reset = current.done;

    if (result.env_steps > cfg_.warmup_steps && result.env_steps % cfg_.update_every == 0) {
      const Batch batch = make_batch(buffer_, buffer_.sample_indices(static_cast<std::size_t>(cfg_.batch_size), sample_rng_),
                                     cfg_.action_masks);
      agent_.update_critics(batch);
      ++result.critic_updates;
      if (agent_.update_actor_and_targets(batch, result.critic_updates)) ++result.actor_updates;
    }
    if (hooks.evaluate && result.env_steps % cfg_.eval_interval == 0) emit();
  }
  if (hooks.evaluate && !result.interrupted && result.env_steps % cfg_.eval_interval != 0) emit();
  return result;
}

}  // namespace modsat
