#pragma once

#include "modsat/codesign_env.hpp"

#include <cstddef>
#include <random>
#include <vector>

namespace modsat {

/// One decision step. States are kept in compact form and expanded to
/// per-module state sequences when a batch is assembled.
struct Transition {
  CompactObs state;
  std::vector<float> actions;  // 3 x n, column-major
  double reward = 0.0;
  CompactObs next_state;
  /// Episode ended (decision limit or failure).
  bool done = false;
  /// Bootstrapping is cut: failure termination, or the design/control
  /// boundary when that cut is enabled.
  bool terminal = false;

  std::size_t modules() const { return state.cells.size(); }
  ActionSeq action_matrix() const;
  static std::vector<float> pack_actions(const ActionSeq& a);
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Number of inserts ever made.
  std::size_t total_inserted() const { return inserted_; }
  /// Logical index 0 is the oldest retained transition.
  const Transition& at(std::size_t logical) const;

  /// Uniform sample with replacement over the current contents.
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;
  const Transition& raw(std::size_t slot) const { return data_[slot]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t inserted_ = 0;
  std::vector<Transition> data_;
};

/// Mini-batch expanded to per-module columns: sample b occupies columns
/// [b*n, (b+1)*n).
struct Batch {
  Eigen::Index size = 0;
  Eigen::Index modules = 0;
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::MatrixXd next_states;
  Eigen::RowVectorXd control_mask;
  Eigen::RowVectorXd next_control_mask;
  /// Per-column weight for actor gradients: actuator mask in the control
  /// phase, 1 everywhere in the design phase.
  Eigen::RowVectorXd actor_mask;
  Eigen::VectorXd reward;
  Eigen::VectorXd not_terminal;
};

Batch make_batch(const std::vector<const Transition*>& samples, bool mask_non_actuators = true);
Batch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& slots, bool mask_non_actuators = true);

}  // namespace modsat
