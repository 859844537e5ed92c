#include "modsat/codesign_env.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace modsat;

namespace {

ActionSeq constant_actions(std::size_t n, const Eigen::Vector3d& a) {
  ActionSeq out(3, static_cast<Eigen::Index>(n));
  out.colwise() = a;
  return out;
}

ActionSeq random_actions(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ActionSeq out(3, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = u(rng);
  return out;
}

EpisodeConfig single_actuator(double scale) {
  EpisodeConfig cfg;
  cfg.dims = 1;
  cfg.torque_scale = scale;
  cfg.fixed_morphology = Morphology::filled(1, ModuleType::Actuator);
  return cfg;
}

}  // namespace

TEST_CASE("episode config defaults") {
  EpisodeConfig cfg;
  const auto r3 = cfg.resolved();
  CHECK(r3.torque_scale == 0.8);
  CHECK(r3.effective_design_rounds() == 3);
  cfg.dims = 5;
  CHECK(cfg.resolved().torque_scale == 1.5);
  CHECK(cfg.resolved().effective_design_rounds() == 5);
  CHECK(r3.max_control_steps == 500);
  CHECK(r3.frame_skip == 20);
  CHECK(r3.dt == 0.01);
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.resolved(), std::invalid_argument);
}

TEST_CASE("design choice uses argmax with ties to the lower index") {
  CHECK(design_choice({-0.2, 0.9, 0.1}) == ModuleType::Rigid);
  CHECK(design_choice({0.5, 0.5, -1.0}) == ModuleType::Empty);
  CHECK(design_choice({-1.0, 0.3, 0.3}) == ModuleType::Rigid);
  CHECK(design_choice({0.0, 0.0, 0.1}) == ModuleType::Actuator);
}

TEST_CASE("reward examples") {
  EpisodeConfig cfg = EpisodeConfig{}.resolved();
  const Quaternion target = Quaternion::from_axis_angle(Vec3::UnitZ(), 0.7);
  AttitudeState at_target{target, Vec3::Zero()};
  CHECK(compute_reward(at_target, target, Vec3::Zero(), cfg).reward == doctest::Approx(0.0).epsilon(1e-15));

  AttitudeState quarter{Quaternion::identity(), Vec3::Zero()};
  const auto r90 = compute_reward(quarter, Quaternion::from_axis_angle(Vec3::UnitX(), std::numbers::pi / 2), Vec3::Zero(), cfg);
  CHECK(r90.reward == doctest::Approx(-0.5));
  CHECK_FALSE(r90.safety_violation);

  AttitudeState fast{target, Vec3(1.2, 0, 0)};
  const auto rs = compute_reward(fast, target, Vec3::Zero(), cfg);
  CHECK(rs.safety_violation);
  CHECK(rs.reward == doctest::Approx(-0.1 * 1.0 - 10.0));

  AttitudeState slow{target, Vec3(0, 0.5, 0)};
  CHECK(compute_reward(slow, target, Vec3(0.3, 0.4, 0), cfg).reward == doctest::Approx(-0.05 - 0.005));
}

TEST_CASE("error quaternion rate") {
  CHECK(q_e_derivative(Quaternion::identity(), Vec3::Zero()).isZero());
  const Eigen::Vector4d d = q_e_derivative(Quaternion::identity(), Vec3(0.2, 0, 0));
  CHECK(d(0) == doctest::Approx(0.0));
  CHECK(d(1) == doctest::Approx(0.1));
  CHECK(d(2) == 0.0);
  CHECK(d(3) == 0.0);
}

TEST_CASE("torque aggregation") {
  Morphology one = Morphology::filled(1, ModuleType::Actuator);
  ActionSeq a(3, 1);
  a << 1.0, -0.5, 0.0;
  const Vec3 t = aggregate_torque(one, a, 0.8);
  CHECK(t.x() == doctest::Approx(0.8));
  CHECK(t.y() == doctest::Approx(-0.4));
  CHECK(t.z() == 0.0);

  Morphology m(3);
  m.set({2, 2, 2}, ModuleType::Actuator);
  m.set({2, 2, 1}, ModuleType::Actuator);
  m.set({2, 1, 2}, ModuleType::Rigid);
  ActionSeq b = ActionSeq::Constant(3, 27, 1.0);
  b.col(static_cast<Eigen::Index>(m.flat_index({2, 2, 1}))) = Eigen::Vector3d(-1, 0, 1);
  const Vec3 mean = aggregate_torque(m, b, 0.8);
  CHECK(mean.x() == doctest::Approx(0.0));
  CHECK(mean.y() == doctest::Approx(0.4));
  CHECK(mean.z() == doctest::Approx(0.8));
  CHECK(aggregate_torque(m, b, 0.8, {true, false, false}).tail<2>().isZero());

  Morphology rigid = Morphology::filled(3, ModuleType::Rigid);
  CHECK(aggregate_torque(rigid, b, 0.8).isZero());
}

TEST_CASE("reset places a rigid seed at the center") {
  CodesignEnv env(EpisodeConfig{});
  const StepResult r = env.reset(42);
  CHECK(r.phase == Phase::Design);
  CHECK(env.morphology().module_count() == 1);
  const auto center = static_cast<Eigen::Index>(env.morphology().flat_index({2, 2, 2}));
  CHECK(r.states.rows() == kStateWidth);
  CHECK(r.states.cols() == 27);
  CHECK(r.states(1, center) == 1.0);
  CHECK(r.states(0, center) == 0.0);
  const double deg = env.target().angle() * 180.0 / std::numbers::pi;
  CHECK(deg >= 30.0);
  CHECK(deg <= 150.0);

  CodesignEnv other(EpisodeConfig{});
  const StepResult r2 = other.reset(42);
  CHECK(r2.states == r.states);
  CHECK(other.target().w == env.target().w);
}

TEST_CASE("design states are one-hot with boundary neighbours empty") {
  CodesignEnv env(EpisodeConfig{});
  env.reset(1);
  std::mt19937_64 rng(4);
  const StepResult r = env.step(random_actions(27, rng));
  for (Eigen::Index c = 0; c < r.states.cols(); ++c) {
    for (int block = 0; block < 7; ++block) CHECK(r.states.col(c).segment<3>(3 * block).sum() == 1.0);
  }
  // Corner (1,1,1): -i, -j and -k neighbours are outside the grid.
  const auto col = r.states.col(0);
  CHECK(col(3 + 0) == 1.0);
  CHECK(col(3 + 3 * 2) == 1.0);
  CHECK(col(3 + 3 * 4) == 1.0);
  CHECK(col.segment<3>(21).isZero());
  CHECK(r.states.col(26).segment<3>(21) == Eigen::Vector3d::Ones());
}

TEST_CASE("design phase takes dims rounds, emits no reward, then control starts") {
  CodesignEnv env(EpisodeConfig{});
  env.reset(3);
  const ActionSeq rigid = constant_actions(27, {-1, 1, -1});
  for (int round = 0; round < 3; ++round) {
    CHECK(env.phase() == Phase::Design);
    const StepResult r = env.step(rigid);
    CHECK(r.reward == 0.0);
    CHECK_FALSE(r.done);
  }
  CHECK(env.phase() == Phase::Control);
  CHECK(env.morphology() == Morphology::filled(3, ModuleType::Rigid));
  CHECK(env.mass_properties().mass == doctest::Approx(27.0));
}

TEST_CASE("all-empty design falls back to the seed") {
  CodesignEnv env(EpisodeConfig{});
  env.reset(5);
  const ActionSeq empty = constant_actions(27, {1, -1, -1});
  for (int round = 0; round < 3; ++round) env.step(empty);
  CHECK(env.morphology().module_count() == 1);
  CHECK(env.morphology().at({2, 2, 2}) == ModuleType::Rigid);
}

TEST_CASE("control states zero out empty modules") {
  CodesignEnv env(EpisodeConfig{});
  env.reset(8);
  ActionSeq a = constant_actions(27, {1, -1, -1});
  a.col(13) = Eigen::Vector3d(-1, -1, 1);
  a.col(12) = Eigen::Vector3d(-1, 1, -1);
  for (int round = 0; round < 3; ++round) env.step(a);
  const StateSeq s = env.states();
  for (Eigen::Index c = 0; c < 27; ++c) {
    if (c == 12 || c == 13) {
      CHECK(s.col(c).head<4>().norm() == doctest::Approx(1.0));
      CHECK(s.col(c).tail<10>().isZero());
    } else {
      CHECK(s.col(c).isZero());
    }
  }
  CHECK(actuator_mask(env.observation())(13) == 1.0);
  CHECK(actuator_mask(env.observation()).sum() == 1.0);
}

TEST_CASE("equilibrium at target with zero actions gives zero reward") {
  EpisodeConfig cfg = single_actuator(0.001);
  cfg.min_target_deg = 0.0;
  cfg.max_target_deg = 0.0;
  CodesignEnv env(cfg);
  env.reset(1);
  for (int i = 0; i < 5; ++i) {
    const StepResult r = env.step(ActionSeq::Zero(3, 1));
    CHECK(r.reward == 0.0);
  }
}

TEST_CASE("control step bookkeeping") {
  EpisodeConfig cfg = single_actuator(1e-4);
  cfg.max_control_steps = 7;
  CodesignEnv env(cfg);
  const StepResult first = env.reset(2);
  CHECK(first.phase == Phase::Control);
  std::mt19937_64 rng(1);
  int steps = 0;
  StepResult r;
  do {
    r = env.step(random_actions(1, rng));
    ++steps;
    CHECK(env.last_substeps() == 20);
  } while (!r.done);
  CHECK(steps == 7);
  CHECK_FALSE(r.failed);
  CHECK(env.substeps_total() == 140);
  CHECK_THROWS_AS(env.step(ActionSeq::Zero(3, 1)), EnvError);
}

TEST_CASE("safety trip ends the episode") {
  CodesignEnv env(single_actuator(0.05));
  env.reset(3);
  StepResult r;
  int steps = 0;
  do {
    r = env.step(ActionSeq::Ones(3, 1));
    ++steps;
  } while (!r.done);
  CHECK(r.failed);
  CHECK(steps < 500);
  CHECK(env.attitude().omega.norm() > 1.0);
  CHECK(r.reward <= -10.0);
}

TEST_CASE("horizon charge on failure is optional") {
  EpisodeConfig cfg = single_actuator(0.05);
  cfg.charge_truncated_horizon = true;
  CodesignEnv charged(cfg);
  CodesignEnv plain(single_actuator(0.05));
  charged.reset(3);
  plain.reset(3);
  StepResult a, b;
  do {
    a = charged.step(ActionSeq::Ones(3, 1));
    b = plain.step(ActionSeq::Ones(3, 1));
  } while (!a.done);
  CHECK(b.done);
  const int remaining = 500 - charged.control_step_count();
  CHECK(a.reward == doctest::Approx(b.reward - remaining));
}

TEST_CASE("malformed actions are rejected") {
  CodesignEnv env(EpisodeConfig{});
  env.reset(1);
  CHECK_THROWS_AS(env.step(ActionSeq::Zero(3, 26)), EnvError);
  CHECK_THROWS_AS(env.step(ActionSeq::Zero(2, 27)), EnvError);
}

TEST_CASE("rollouts are deterministic") {
  auto rollout = [] {
    CodesignEnv env(EpisodeConfig{});
    env.set_record_trace(true);
    env.reset(99);
    std::mt19937_64 rng(5);
    std::vector<double> rewards;
    StepResult r;
    do {
      r = env.step(random_actions(27, rng));
      rewards.push_back(r.reward);
    } while (!r.done);
    return std::make_pair(rewards, env.trace().size());
  };
  const auto a = rollout();
  const auto b = rollout();
  CHECK(a.first == b.first);
  CHECK(a.second == a.first.size());
}

TEST_CASE("reward stays within its bound") {
  CodesignEnv env(EpisodeConfig{});
  const auto& c = env.config();
  const double bound = c.k_q + c.k_omega * c.omega_max + c.k_u * std::sqrt(3.0) * c.torque_scale + c.k_safe;
  std::mt19937_64 rng(21);
  for (int ep = 0; ep < 5; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    StepResult r;
    do {
      r = env.step(random_actions(27, rng));
      CHECK(r.reward <= 0.0);
      CHECK(r.reward >= -bound);
    } while (!r.done);
  }
}

TEST_CASE("trace lines are JSON records") {
  const std::string line = trace_json_line({3, Phase::Control, -0.25, 45.0, 0.125});
  CHECK(line == R"({"step":3,"phase":"control","reward":-0.25,"theta_err_deg":45,"omega_norm":0.125})");
}
