#pragma once

#include "modsat/codesign_env.hpp"
#include "modsat/mlp.hpp"
#include "modsat/policy.hpp"
#include "modsat/replay_buffer.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace modsat {

struct TrainerConfig {
  double lr_actor = 3e-4;
  double lr_critic = 3e-3;
  double gamma = 0.99;
  /// Fraction of the old target kept on each blend.
  double target_retention = 0.995;
  double exploration_noise = 0.2;
  double target_noise = 0.2;
  double noise_clip = 0.5;
  /// Actor and target networks update once per this many critic updates.
  int policy_delay = 2;
  int batch_size = 512;
  std::size_t buffer_capacity = 500000;
  long warmup_steps = 5000;
  /// Critic update cadence in environment steps (1 = every step).
  int update_every = 1;
  /// Treat the last design step as terminal instead of bootstrapping into
  /// the control phase.
  bool cut_phase_boundary = false;
  /// Zero actor gradients from non-actuator modules in the control phase.
  bool action_masks = true;
  long eval_interval = 5000;
  int eval_episodes = 5;
  NetworkShape network;

  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Td3Networks {
  Actor actor;
  Actor actor_target;
  Critic critic1;
  Critic critic2;
  Critic critic1_target;
  Critic critic2_target;

  static Td3Networks create(const NetworkShape& shape, std::mt19937_64& rng);
  bool operator==(const Td3Networks&) const = default;
};

struct CurvePoint {
  long env_steps = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_final_theta_err_deg = 0.0;
};

struct EpisodeSummary {
  double episode_return = 0.0;
  double final_theta_err_deg = 0.0;
  double final_omega_norm = 0.0;
  int control_steps = 0;
  bool failed = false;
  Morphology morphology;
  std::vector<TraceRecord> trace;
};

struct EvalResult {
  std::vector<EpisodeSummary> episodes;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_final_theta_err_deg = 0.0;
  double mean_final_omega_norm = 0.0;
};

/// Runs one deterministic episode of `actor` from env.reset(seed).
EpisodeSummary run_episode(const Actor& actor, CodesignEnv& env, std::uint64_t seed, bool record_trace = false);
EvalResult evaluate_policy(const Actor& actor, CodesignEnv& env, const std::vector<std::uint64_t>& seeds,
                           bool record_trace = false);

/// Rolls out only the design phase deterministically and returns the
/// repaired morphology.
Morphology design_morphology(const Actor& actor, CodesignEnv& env, std::uint64_t seed);

/// Twin critics, target policy smoothing and delayed actor updates.
class Td3Agent {
 public:
  Td3Agent(const TrainerConfig& cfg, std::uint64_t seed);
  Td3Agent(const TrainerConfig& cfg, Td3Networks nets, std::uint64_t seed);

  const TrainerConfig& config() const { return cfg_; }
  Td3Networks& networks() { return nets_; }
  const Td3Networks& networks() const { return nets_; }

  /// Actor output per module; with `explore`, adds N(0, sigma) noise and
  /// clips to [-1, 1].
  ActionSeq select_action(const StateSeq& states, Phase phase, bool explore);

  /// Bootstrapped targets y = r + gamma * not_terminal * min(Q1', Q2')(s', a~).
  Eigen::VectorXd compute_target(const Batch& batch);
  /// Target from given target-critic values (exposed for tests).
  static Eigen::VectorXd bootstrap(const Eigen::VectorXd& reward, const Eigen::VectorXd& not_terminal,
                                   const Eigen::VectorXd& q1, const Eigen::VectorXd& q2, double gamma);

  /// One gradient step on both critics; returns the mean of their losses.
  double update_critics(const Batch& batch);
  double update_critics(const Batch& batch, const Eigen::VectorXd& targets);

  /// Actor ascent on Q1 followed by target blending, only when
  /// `update_step` is a multiple of the policy delay. Returns whether an
  /// update happened.
  bool update_actor_and_targets(const Batch& batch, long update_step);

  /// Critic MSE against fixed targets, without updating (mean of both).
  double critic_loss(const Batch& batch, const Eigen::VectorXd& targets) const;

  std::mt19937_64& noise_rng() { return noise_rng_; }

 private:
  TrainerConfig cfg_;
  Td3Networks nets_;
  Adam actor_opt_trunk_, actor_opt_design_, actor_opt_control_;
  Adam critic1_opt_, critic2_opt_;
  std::mt19937_64 noise_rng_;
};

struct TrainHooks {
  /// Called after each evaluation point.
  std::function<void(const CurvePoint&, const Td3Agent&)> on_eval;
  /// Polled every environment step; returning true stops training.
  std::function<bool()> should_stop;
  /// Skip periodic evaluation entirely (used for GA inner training).
  bool evaluate = true;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  long env_steps = 0;
  long critic_updates = 0;
  long actor_updates = 0;
  bool interrupted = false;
};

using EnvFactory = std::function<CodesignEnv()>;

class Td3Trainer {
 public:
  Td3Trainer(EnvFactory factory, const TrainerConfig& cfg, std::uint64_t seed);

  /// Full loop: warmup with uniform random actions, exploration rollouts,
  /// buffer inserts, critic updates, delayed actor/target updates and
  /// periodic evaluation (including one at step 0).
  TrainResult train(long total_steps, const TrainHooks& hooks = {});

  EvalResult evaluate(bool record_trace = false);

  Td3Agent& agent() { return agent_; }
  const Td3Agent& agent() const { return agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const std::vector<std::uint64_t>& eval_seeds() const { return eval_seeds_; }

 private:
  EnvFactory factory_;
  TrainerConfig cfg_;
  Td3Agent agent_;
  ReplayBuffer buffer_;
  std::mt19937_64 env_rng_;
  std::mt19937_64 sample_rng_;
  std::vector<std::uint64_t> eval_seeds_;
};

}  // namespace modsat
