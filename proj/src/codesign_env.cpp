#include "modsat/codesign_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace modsat {

namespace {

constexpr std::array<std::array<int, 3>, 6> kNeighbors{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};

Morphology grid_of(const CompactObs& obs) {
  std::vector<ModuleType> cells;
  cells.reserve(obs.cells.size());
  for (auto c : obs.cells) cells.push_back(static_cast<ModuleType>(c));
  return Morphology(obs.dims, std::move(cells));
}

double normalized(int idx, int dims) { return dims > 1 ? double(idx - 1) / double(dims - 1) : 0.0; }

}  // namespace

const char* phase_name(Phase p) { return p == Phase::Design ? "design" : "control"; }

double default_torque_scale(int dims) {
  switch (dims) {
    case 3: return 0.8;
    case 5: return 1.5;
    default: throw std::invalid_argument("no default torque scale for dims " + std::to_string(dims));
  }
}

int EpisodeConfig::effective_design_rounds() const {
  if (fixed_morphology) return 0;
  return design_rounds < 0 ? dims : design_rounds;
}

EpisodeConfig EpisodeConfig::resolved() const {
  EpisodeConfig c = *this;
  if (c.fixed_morphology) c.dims = c.fixed_morphology->dims();
  if (c.dims < 1) throw std::invalid_argument("dims must be positive");
  c.design_rounds = c.effective_design_rounds();
  if (c.torque_scale <= 0.0) c.torque_scale = default_torque_scale(c.dims);
  if (c.max_control_steps < 1 || c.frame_skip < 1 || !(c.dt > 0.0) || !(c.omega_max > 0.0)) {
    throw std::invalid_argument("episode limits must be positive");
  }
  if (c.k_q < 0 || c.k_omega < 0 || c.k_u < 0 || c.k_safe < 0) {
    throw std::invalid_argument("reward weights must be non-negative");
  }
  if (!(c.min_target_deg <= c.max_target_deg)) throw std::invalid_argument("bad target angle range");
  if (c.target_axis && c.target_axis->norm() < 1e-12) throw std::invalid_argument("zero target axis");
  return c;
}

void build_states(const CompactObs& obs, Eigen::Ref<Eigen::MatrixXd> out) {
  const Morphology grid = grid_of(obs);
  const std::size_t n = grid.size();
  if (out.rows() != kStateWidth || static_cast<std::size_t>(out.cols()) != n) {
    throw EnvError("state buffer has wrong shape");
  }
  out.setZero();
  const bool any = grid.module_count() > 0;
  const Vec3 com = any ? center_of_mass(grid) : Vec3::Zero();
  const int d = grid.dims();

  for (std::size_t f = 0; f < n; ++f) {
    const CellIndex c = grid.cell_index(f);
    const ModuleType self = grid[f];
    auto col = out.col(static_cast<Eigen::Index>(f));
    const double dist = any ? (module_position(c, d) - com).norm() : 0.0;
    const Vec3 pos{normalized(c.i, d), normalized(c.j, d), normalized(c.k, d)};

    if (obs.phase == Phase::Design) {
      col(static_cast<int>(self)) = 1.0;
      for (std::size_t nb = 0; nb < kNeighbors.size(); ++nb) {
        const CellIndex nc{c.i + kNeighbors[nb][0], c.j + kNeighbors[nb][1], c.k + kNeighbors[nb][2]};
        const ModuleType t = grid.in_bounds(nc) ? grid.at(nc) : ModuleType::Empty;
        col(3 + 3 * static_cast<int>(nb) + static_cast<int>(t)) = 1.0;
      }
      col.segment<3>(21) = pos;
      col(24) = dist;
    } else {
      if (self == ModuleType::Empty) continue;
      for (int a = 0; a < 11; ++a) col(a) = obs.attitude[a];
      col.segment<3>(11) = pos;
      col(14) = dist;
    }
  }
}

StateSeq build_states(const CompactObs& obs) {
  StateSeq out(kStateWidth, static_cast<Eigen::Index>(obs.cells.size()));
  build_states(obs, out);
  return out;
}

Eigen::RowVectorXd actuator_mask(const CompactObs& obs) {
  Eigen::RowVectorXd mask(static_cast<Eigen::Index>(obs.cells.size()));
  for (std::size_t f = 0; f < obs.cells.size(); ++f) {
    mask(static_cast<Eigen::Index>(f)) = obs.cells[f] == static_cast<std::uint8_t>(ModuleType::Actuator) ? 1.0 : 0.0;
  }
  return mask;
}

RewardResult compute_reward(const AttitudeState& state, const Quaternion& target, const Vec3& control,
                            const EpisodeConfig& cfg) {
  const double theta = error_angle(quat_error(state.q, target));
  const double w = state.omega.norm();
  RewardResult r;
  r.reward = -cfg.k_q * theta / std::numbers::pi - cfg.k_omega * std::min(w, cfg.omega_max) -
             cfg.k_u * control.norm();
  if (!(w <= cfg.omega_max)) {
    r.safety_violation = true;
    r.reward -= cfg.k_safe;
  }
  return r;
}

Eigen::Vector4d q_e_derivative(const Quaternion& q_e, const Vec3& omega) {
  const QuatRate d = quat_derivative(q_e, omega);
  return {d.w, d.v.x(), d.v.y(), d.v.z()};
}

ModuleType design_choice(const Eigen::Vector3d& action) {
  int best = 0;
  for (int a = 1; a < 3; ++a) {
    if (action(a) > action(best)) best = a;
  }
  return static_cast<ModuleType>(best);
}

Vec3 aggregate_torque(const Morphology& m, const ActionSeq& actions, double scale,
                      const std::array<bool, 3>& axes) {
  Vec3 sum = Vec3::Zero();
  int count = 0;
  for (std::size_t f = 0; f < m.size(); ++f) {
    if (m[f] != ModuleType::Actuator) continue;
    sum += actions.col(static_cast<Eigen::Index>(f)).cwiseMax(-1.0).cwiseMin(1.0);
    ++count;
  }
  if (count == 0) return Vec3::Zero();
  Vec3 torque = scale * sum / count;
  for (int a = 0; a < 3; ++a) {
    if (!axes[a]) torque(a) = 0.0;
  }
  return torque;
}

std::string trace_json_line(const TraceRecord& r) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"step\":" << r.step << ",\"phase\":\"" << phase_name(r.phase) << "\",\"reward\":" << r.reward
     << ",\"theta_err_deg\":" << r.theta_err_deg << ",\"omega_norm\":" << r.omega_norm << "}";
  return os.str();
}

CodesignEnv::CodesignEnv(EpisodeConfig cfg) : cfg_(cfg.resolved()) {
  slots_ = static_cast<std::size_t>(cfg_.grid_dims()) * cfg_.grid_dims() * cfg_.grid_dims();
  design_rounds_ = cfg_.effective_design_rounds();
  if (cfg_.fixed_morphology && cfg_.fixed_morphology->module_count() == 0) {
    throw EnvError("no modules");
  }
}

StepResult CodesignEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  if (cfg_.target_axis) {
    std::uniform_real_distribution<double> angle(cfg_.min_target_deg, cfg_.max_target_deg);
    std::bernoulli_distribution flip(0.5);
    const double phi = angle(rng_) * std::numbers::pi / 180.0;
    const Vec3 axis = flip(rng_) ? Vec3(-*cfg_.target_axis) : Vec3(*cfg_.target_axis);
    target_ = Quaternion::from_axis_angle(axis, phi);
  } else {
    target_ = sample_target(rng_, cfg_.min_target_deg, cfg_.max_target_deg);
  }
  attitude_ = {};
  last_torque_ = Vec3::Zero();
  substeps_total_ = 0;
  last_substeps_ = 0;
  design_round_ = 0;
  control_steps_ = 0;
  step_counter_ = 0;
  done_ = false;
  trace_.clear();

  if (cfg_.fixed_morphology) {
    grid_ = *cfg_.fixed_morphology;
    begin_control();
  } else {
    grid_ = Morphology(cfg_.dims);
    grid_.set(grid_.center(), ModuleType::Rigid);
    props_ = {};
    phase_ = Phase::Design;
    if (design_rounds_ == 0) finalize_design();
  }
  return {states(), 0.0, false, false, phase_};
}

void CodesignEnv::check_actions(const ActionSeq& actions) const {
  if (actions.rows() != kActionDim || static_cast<std::size_t>(actions.cols()) != slots_) {
    throw EnvError("malformed action sequence: expected 3 x " + std::to_string(slots_));
  }
  if (done_) throw EnvError("episode is over; call reset");
}

StepResult CodesignEnv::step(const ActionSeq& actions) {
  return phase_ == Phase::Design ? design_step(actions) : control_step(actions);
}

StepResult CodesignEnv::design_step(const ActionSeq& actions) {
  check_actions(actions);
  if (phase_ != Phase::Design) throw EnvError("design step outside the design phase");
  Morphology next(grid_.dims());
  for (std::size_t f = 0; f < slots_; ++f) {
    next.set_flat(f, design_choice(actions.col(static_cast<Eigen::Index>(f))));
  }
  grid_ = std::move(next);
  ++design_round_;
  ++step_counter_;
  record(0.0);
  if (design_round_ >= design_rounds_) finalize_design();
  return {states(), 0.0, false, false, phase_};
}

const Morphology& CodesignEnv::finalize_design() {
  grid_ = repair(grid_);
  begin_control();
  return grid_;
}

void CodesignEnv::begin_control() {
  props_ = inertia_body_frame(grid_);
  phase_ = Phase::Control;
  attitude_ = {};
}

StepResult CodesignEnv::control_step(const ActionSeq& actions) {
  check_actions(actions);
  if (phase_ != Phase::Control) throw EnvError("control step outside the control phase");
  const Vec3 torque = aggregate_torque(grid_, actions, cfg_.torque_scale, cfg_.torque_axes);
  last_torque_ = torque;
  const TorqueInput input{torque, cfg_.disturbance};

  bool diverged = false;
  last_substeps_ = 0;
  for (int s = 0; s < cfg_.frame_skip; ++s) {
    try {
      attitude_ = modsat::step(attitude_, props_.inertia, input, cfg_.dt);
    } catch (const DynamicsError&) {
      diverged = true;
      break;
    }
    ++last_substeps_;
    ++substeps_total_;
  }
  ++control_steps_;
  ++step_counter_;

  StepResult out;
  out.phase = Phase::Control;
  const int remaining = cfg_.max_control_steps - control_steps_;
  if (diverged) {
    out.reward = -(cfg_.k_q + cfg_.k_omega * cfg_.omega_max + cfg_.k_u * torque.norm() + cfg_.k_safe);
    out.failed = true;
  } else {
    const RewardResult r = compute_reward(attitude_, target_, torque, cfg_);
    out.reward = r.reward;
    out.failed = r.safety_violation;
  }
  if (out.failed && cfg_.charge_truncated_horizon) out.reward -= cfg_.k_q * remaining;
  out.done = out.failed || remaining <= 0;
  done_ = out.done;
  record(out.reward);
  out.states = states();
  return out;
}

double CodesignEnv::theta_err_deg() const {
  return error_angle(quat_error(attitude_.q, target_)) * 180.0 / std::numbers::pi;
}

CompactObs CodesignEnv::observation() const {
  CompactObs obs;
  obs.phase = phase_;
  obs.dims = grid_.dims();
  obs.cells.reserve(grid_.size());
  for (auto t : grid_.cells()) obs.cells.push_back(static_cast<std::uint8_t>(t));
  if (phase_ == Phase::Control) {
    const Quaternion qe = quat_error(attitude_.q, target_);
    const Eigen::Vector4d dqe = q_e_derivative(qe, attitude_.omega);
    obs.attitude = {qe.w, qe.v.x(), qe.v.y(), qe.v.z(), dqe(0), dqe(1), dqe(2), dqe(3),
                    attitude_.omega.x(), attitude_.omega.y(), attitude_.omega.z()};
  }
  return obs;
}

void CodesignEnv::record(double reward) {
  if (!record_trace_) return;
  trace_.push_back({step_counter_, phase_, reward, phase_ == Phase::Control ? theta_err_deg() : 0.0,
                    attitude_.omega.norm()});
}

}  // namespace modsat
