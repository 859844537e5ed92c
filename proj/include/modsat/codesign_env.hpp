#pragma once

#include "modsat/attitude.hpp"
#include "modsat/morphology.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace modsat {

/// Width of every per-module state vector, both phases (zero padded).
inline constexpr int kStateWidth = 25;
inline constexpr int kDesignFeatures = 25;
inline constexpr int kControlFeatures = 15;
inline constexpr int kActionDim = 3;

/// Column-per-module layouts: states are kStateWidth x n, actions 3 x n.
using StateSeq = Eigen::MatrixXd;
using ActionSeq = Eigen::MatrixXd;

enum class Phase : std::uint8_t { Design = 0, Control = 1 };

const char* phase_name(Phase p);

struct EpisodeConfig {
  int dims = 3;
  /// Negative means "same as dims".
  int design_rounds = -1;
  int max_control_steps = 500;
  int frame_skip = 20;
  double dt = 0.01;
  /// Non-positive means the default for dims (0.8 for 3, 1.5 for 5).
  double torque_scale = 0.0;
  double omega_max = 1.0;
  double k_q = 1.0;
  double k_omega = 0.1;
  double k_u = 0.01;
  double k_safe = 10.0;
  /// On a safety trip, also charge k_q for every control decision cut off
  /// by the early termination.
  bool charge_truncated_horizon = false;
  Vec3 disturbance = Vec3::Zero();
  std::array<bool, 3> torque_axes{true, true, true};
  double min_target_deg = 30.0;
  double max_target_deg = 150.0;
  /// When set, targets rotate about +/- this axis only.
  std::optional<Vec3> target_axis;
  /// When set, the design phase is skipped and this morphology is used.
  std::optional<Morphology> fixed_morphology;

  /// Copy with defaults filled in; throws std::invalid_argument on bad values.
  EpisodeConfig resolved() const;
  int effective_design_rounds() const;
  int grid_dims() const { return fixed_morphology ? fixed_morphology->dims() : dims; }
};

double default_torque_scale(int dims);

/// Compact snapshot from which per-module states are rebuilt. The replay
/// buffer stores these instead of full state matrices.
struct CompactObs {
  Phase phase = Phase::Design;
  int dims = 0;
  std::vector<std::uint8_t> cells;
  /// q_e (4), dq_e/dt (4), omega (3); zero in the design phase.
  std::array<double, 11> attitude{};
};

/// Writes kStateWidth x n per-module states for `obs` into `out` (which must
/// already have that shape).
void build_states(const CompactObs& obs, Eigen::Ref<Eigen::MatrixXd> out);
StateSeq build_states(const CompactObs& obs);

/// Per-module actuator mask of an observation (1 for actuator cells).
Eigen::RowVectorXd actuator_mask(const CompactObs& obs);

struct RewardResult {
  double reward = 0.0;
  bool safety_violation = false;
};

/// Shaped slew reward: -k_q theta/pi - k_omega min(|w|, w_max) - k_u |Mc|,
/// with an extra -k_safe when |w| exceeds w_max.
RewardResult compute_reward(const AttitudeState& state, const Quaternion& target, const Vec3& control,
                            const EpisodeConfig& cfg);

/// Quaternion kinematics of the error quaternion under body rate omega.
Eigen::Vector4d q_e_derivative(const Quaternion& q_e, const Vec3& omega);

/// Type selected by a design action: argmax, ties to the lower index.
ModuleType design_choice(const Eigen::Vector3d& action);

/// Mean of the actuator modules' actions, times the scale, restricted to the
/// enabled axes. Zero when there are no actuators.
Vec3 aggregate_torque(const Morphology& m, const ActionSeq& actions, double scale,
                      const std::array<bool, 3>& axes = {true, true, true});

struct StepResult {
  StateSeq states;
  double reward = 0.0;
  bool done = false;
  /// True when the episode ended through a failure (safety trip or
  /// divergence) rather than the decision limit.
  bool failed = false;
  Phase phase = Phase::Design;
};

struct TraceRecord {
  int step = 0;
  Phase phase = Phase::Design;
  double reward = 0.0;
  double theta_err_deg = 0.0;
  double omega_norm = 0.0;
};

std::string trace_json_line(const TraceRecord& r);

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Design phase (grid rewriting) followed by a frame-skipped attitude slew,
/// packaged as one episode.
class CodesignEnv {
 public:
  explicit CodesignEnv(EpisodeConfig cfg);

  const EpisodeConfig& config() const { return cfg_; }
  std::size_t module_slots() const { return slots_; }

  StepResult reset(std::uint64_t seed);
  /// Dispatches to design_step or control_step depending on the phase.
  StepResult step(const ActionSeq& actions);

  StepResult design_step(const ActionSeq& actions);
  const Morphology& finalize_design();
  StepResult control_step(const ActionSeq& actions);

  Phase phase() const { return phase_; }
  bool done() const { return done_; }
  int design_round() const { return design_round_; }
  int control_step_count() const { return control_steps_; }
  const Morphology& morphology() const { return grid_; }
  const MassProperties& mass_properties() const { return props_; }
  const AttitudeState& attitude() const { return attitude_; }
  const Quaternion& target() const { return target_; }
  double theta_err_deg() const;

  CompactObs observation() const;
  StateSeq states() const { return build_states(observation()); }

  // Instrumentation.
  const Vec3& last_control_torque() const { return last_torque_; }
  long substeps_total() const { return substeps_total_; }
  int last_substeps() const { return last_substeps_; }

  void set_record_trace(bool on) { record_trace_ = on; }
  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  void check_actions(const ActionSeq& actions) const;
  void begin_control();
  void record(double reward);

  EpisodeConfig cfg_;
  std::size_t slots_ = 0;
  int design_rounds_ = 0;
  std::mt19937_64 rng_;
  Phase phase_ = Phase::Design;
  bool done_ = true;
  int design_round_ = 0;
  int control_steps_ = 0;
  int step_counter_ = 0;
  Morphology grid_;
  MassProperties props_;
  AttitudeState attitude_;
  Quaternion target_;
  Vec3 last_torque_ = Vec3::Zero();
  long substeps_total_ = 0;
  int last_substeps_ = 0;
  bool record_trace_ = false;
  std::vector<TraceRecord> trace_;
};

}  // namespace modsat
