#pragma once

#include "modsat/codesign_env.hpp"
#include "modsat/mlp.hpp"

#include <Eigen/Core>

#include <random>
#include <vector>

namespace modsat {

struct NetworkShape {
  int state_width = kStateWidth;
  std::vector<int> hidden{400, 300};
  bool operator==(const NetworkShape&) const = default;
};

struct ActorGrads {
  LayerStack trunk;
  LayerStack design;
  LayerStack control;
};

/// Shared-trunk policy: the same hidden layers feed a design head and a
/// control head, each ending in tanh. Applied column-wise to per-module
/// states.
class Actor {
 public:
  struct Cache {
    MlpCache trunk;
    MlpCache design;
    MlpCache control;
    Eigen::RowVectorXd control_mask;
    Eigen::MatrixXd output;
  };

  Actor() = default;
  explicit Actor(const NetworkShape& shape);

  void initialize(std::mt19937_64& rng);

  /// `control_mask` selects the head per column: 1 = control, 0 = design.
  const Eigen::MatrixXd& forward(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                 const Eigen::RowVectorXd& control_mask, Cache& cache) const;
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& states, Phase phase) const;
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& states,
                           const Eigen::RowVectorXd& control_mask) const;

  /// Accumulates gradients of a loss whose output gradient is `grad_out`
  /// (3 x n). Each head only receives its own columns.
  void backward(const Cache& cache, const Eigen::Ref<const Eigen::MatrixXd>& grad_out, ActorGrads& grads) const;

  ActorGrads zero_grads() const;

  Mlp trunk;
  Mlp design_head;
  Mlp control_head;

  bool operator==(const Actor&) const = default;
};

/// Per-module Q network over [state; action]; the morphology value is the
/// mean over its modules.
class Critic {
 public:
  Critic() = default;
  explicit Critic(const NetworkShape& shape);

  void initialize(std::mt19937_64& rng);

  static Eigen::MatrixXd stack_inputs(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                      const Eigen::Ref<const Eigen::MatrixXd>& actions);

  /// Per-module Q values (1 x n).
  const Eigen::MatrixXd& forward(const Eigen::Ref<const Eigen::MatrixXd>& inputs, MlpCache& cache) const {
    return net.forward(inputs, cache);
  }
  Eigen::RowVectorXd per_module(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                const Eigen::Ref<const Eigen::MatrixXd>& actions) const;

  Mlp net;

  bool operator==(const Critic&) const = default;
};

/// Mean of the per-module Q values of one morphology.
double critic_forward(const Critic& critic, const Eigen::Ref<const Eigen::MatrixXd>& states,
                      const Eigen::Ref<const Eigen::MatrixXd>& actions);

/// Averages consecutive groups of `group` columns: 1 x (N*group) -> N values.
Eigen::VectorXd group_mean(const Eigen::Ref<const Eigen::RowVectorXd>& values, Eigen::Index group);

}  // namespace modsat
