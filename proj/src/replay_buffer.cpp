#include "modsat/replay_buffer.hpp"

#include <cmath>
#include <stdexcept>

namespace modsat {

ActionSeq Transition::action_matrix() const {
  const auto n = static_cast<Eigen::Index>(actions.size() / kActionDim);
  return Eigen::Map<const Eigen::MatrixXf>(actions.data(), kActionDim, n).cast<double>();
}

std::vector<float> Transition::pack_actions(const ActionSeq& a) {
  std::vector<float> out(static_cast<std::size_t>(a.size()));
  Eigen::Map<Eigen::MatrixXf>(out.data(), a.rows(), a.cols()) = a.cast<float>();
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward)) throw std::invalid_argument("non-finite reward");
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
  ++inserted_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
  if (logical >= data_.size()) throw std::out_of_range("replay index out of range");
  const std::size_t oldest = data_.size() < capacity_ ? 0 : next_;
  return data_[(oldest + logical) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::mt19937_64& rng) const {
  if (data_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

Batch make_batch(const std::vector<const Transition*>& samples, bool mask_non_actuators) {
  if (samples.empty()) throw std::invalid_argument("empty batch");
  Batch b;
  b.size = static_cast<Eigen::Index>(samples.size());
  b.modules = static_cast<Eigen::Index>(samples.front()->modules());
  const Eigen::Index cols = b.size * b.modules;
  b.states.resize(kStateWidth, cols);
  b.next_states.resize(kStateWidth, cols);
  b.actions.resize(kActionDim, cols);
  b.control_mask.resize(cols);
  b.next_control_mask.resize(cols);
  b.actor_mask.resize(cols);
  b.reward.resize(b.size);
  b.not_terminal.resize(b.size);

  for (Eigen::Index s = 0; s < b.size; ++s) {
    const Transition& t = *samples[static_cast<std::size_t>(s)];
    if (static_cast<Eigen::Index>(t.modules()) != b.modules) throw std::invalid_argument("mixed module counts in batch");
    const Eigen::Index c0 = s * b.modules;
    build_states(t.state, b.states.middleCols(c0, b.modules));
    build_states(t.next_state, b.next_states.middleCols(c0, b.modules));
    b.actions.middleCols(c0, b.modules) =
        Eigen::Map<const Eigen::MatrixXf>(t.actions.data(), kActionDim, b.modules).cast<double>();
    const bool control = t.state.phase == Phase::Control;
    b.control_mask.segment(c0, b.modules).setConstant(control ? 1.0 : 0.0);
    b.next_control_mask.segment(c0, b.modules).setConstant(t.next_state.phase == Phase::Control ? 1.0 : 0.0);
    if (control && mask_non_actuators) {
      b.actor_mask.segment(c0, b.modules) = actuator_mask(t.state);
    } else {
      b.actor_mask.segment(c0, b.modules).setOnes();
    }
    b.reward(s) = t.reward;
    b.not_terminal(s) = t.terminal ? 0.0 : 1.0;
  }
  return b;
}

Batch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& slots, bool mask_non_actuators) {
  std::vector<const Transition*> samples;
  samples.reserve(slots.size());
  for (auto s : slots) samples.push_back(&buffer.raw(s));
  return make_batch(samples, mask_non_actuators);
}

}  // namespace modsat
