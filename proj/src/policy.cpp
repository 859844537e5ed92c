#include "modsat/policy.hpp"

namespace modsat {

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  if (out > 0) sizes.push_back(out);
  return sizes;
}

// Output-head weights start small so tanh does not saturate early.
constexpr double kHeadScale = 0.1;

}  // namespace

Actor::Actor(const NetworkShape& shape)
    : trunk(layer_sizes(shape.state_width, shape.hidden, 0), Activation::Relu, Activation::Relu),
      design_head({shape.hidden.back(), kActionDim}, Activation::Tanh, Activation::Tanh),
      control_head({shape.hidden.back(), kActionDim}, Activation::Tanh, Activation::Tanh) {
  if (shape.hidden.empty()) throw NetworkError("actor needs at least one hidden layer");
}

void Actor::initialize(std::mt19937_64& rng) {
  trunk.initialize(rng);
  design_head.initialize(rng, kHeadScale);
  control_head.initialize(rng, kHeadScale);
}

const Eigen::MatrixXd& Actor::forward(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                      const Eigen::RowVectorXd& control_mask, Cache& cache) const {
  if (control_mask.size() != states.cols()) throw NetworkError("phase mask length mismatch");
  const auto& h = trunk.forward(states, cache.trunk);
  const auto& d = design_head.forward(h, cache.design);
  const auto& c = control_head.forward(h, cache.control);
  cache.control_mask = control_mask;
  cache.output = d;
  for (Eigen::Index col = 0; col < control_mask.size(); ++col) {
    if (control_mask(col) != 0.0) cache.output.col(col) = c.col(col);
  }
  return cache.output;
}

Eigen::MatrixXd Actor::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& states, Phase phase) const {
  const Eigen::MatrixXd h = trunk.evaluate(states);
  return phase == Phase::Design ? design_head.evaluate(h) : control_head.evaluate(h);
}

Eigen::MatrixXd Actor::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                const Eigen::RowVectorXd& control_mask) const {
  Cache cache;
  return forward(states, control_mask, cache);
}

void Actor::backward(const Cache& cache, const Eigen::Ref<const Eigen::MatrixXd>& grad_out,
                     ActorGrads& grads) const {
  if (!cache.trunk.valid()) throw NetworkError("no cached forward pass");
  const Eigen::RowVectorXd design_mask = 1.0 - cache.control_mask.array();
  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(trunk.output_size(), grad_out.cols());
  if (cache.control_mask.sum() > 0.0) {
    dh += control_head.backward(cache.control, grad_out * cache.control_mask.asDiagonal(), grads.control);
  }
  if (design_mask.sum() > 0.0) {
    dh += design_head.backward(cache.design, grad_out * design_mask.asDiagonal(), grads.design);
  }
  trunk.backward(cache.trunk, dh, grads.trunk);
}

ActorGrads Actor::zero_grads() const {
  return {trunk.zero_grads(), design_head.zero_grads(), control_head.zero_grads()};
}

Critic::Critic(const NetworkShape& shape)
    : net(layer_sizes(shape.state_width + kActionDim, shape.hidden, 1), Activation::Relu, Activation::Identity) {}

void Critic::initialize(std::mt19937_64& rng) { net.initialize(rng); }

Eigen::MatrixXd Critic::stack_inputs(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                     const Eigen::Ref<const Eigen::MatrixXd>& actions) {
  if (states.cols() != actions.cols()) throw NetworkError("state and action sequences differ in length");
  if (actions.rows() != kActionDim) throw NetworkError("action width mismatch");
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Eigen::RowVectorXd Critic::per_module(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                      const Eigen::Ref<const Eigen::MatrixXd>& actions) const {
  return net.evaluate(stack_inputs(states, actions)).row(0);
}

double critic_forward(const Critic& critic, const Eigen::Ref<const Eigen::MatrixXd>& states,
                      const Eigen::Ref<const Eigen::MatrixXd>& actions) {
  if (states.cols() == 0) throw NetworkError("empty module sequence");
  return critic.per_module(states, actions).mean();
}

Eigen::VectorXd group_mean(const Eigen::Ref<const Eigen::RowVectorXd>& values, Eigen::Index group) {
  if (group <= 0 || values.size() % group != 0) throw NetworkError("values do not split into groups");
  return values.reshaped(group, values.size() / group).colwise().mean().transpose();
}

}  // namespace modsat
