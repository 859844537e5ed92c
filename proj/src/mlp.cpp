#include "modsat/mlp.hpp"

#include <cmath>

namespace modsat {

namespace {

void activate(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::Identity: break;
    case Activation::Relu: z = z.cwiseMax(0.0); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
  }
}

// Converts dL/d(output) into dL/d(pre-activation) in place, given the
// post-activation output.
void activation_backward(Eigen::MatrixXd& grad, const Eigen::MatrixXd& out, Activation a) {
  switch (a) {
    case Activation::Identity: break;
    case Activation::Relu: grad = (out.array() > 0.0).select(grad, 0.0); break;
    case Activation::Tanh: grad.array() *= (1.0 - out.array().square()); break;
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, Activation hidden, Activation output)
    : sizes_(std::move(sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw NetworkError("network needs at least one layer");
  for (int s : sizes_) {
    if (s < 1) throw NetworkError("layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]), Eigen::VectorXd::Zero(sizes_[l + 1])});
  }
}

void Mlp::initialize(std::mt19937_64& rng, double final_scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& layer = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const double scale = l + 1 == layers_.size() ? final_scale : 1.0;
    // Column-major fill order keeps initialization reproducible.
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = scale * dist(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = dist(rng);
  }
}

const Eigen::MatrixXd& Mlp::forward(const Eigen::Ref<const Eigen::MatrixXd>& x, MlpCache& cache) const {
  if (x.rows() != input_size()) throw NetworkError("input width mismatch");
  cache.input = x;
  cache.outputs.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& z = cache.outputs[l];
    z.noalias() = layers_[l].weight * cache.layer_input(l);
    z.colwise() += layers_[l].bias;
    activate(z, activation_of(l));
  }
  return cache.outputs.back();
}

Eigen::MatrixXd Mlp::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.rows() != input_size()) throw NetworkError("input width mismatch");
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * h;
    z.colwise() += layers_[l].bias;
    activate(z, activation_of(l));
    h.swap(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const MlpCache& cache, const Eigen::Ref<const Eigen::MatrixXd>& grad_out,
                              LayerStack* grads) const {
  if (!cache.valid() || cache.outputs.size() != layers_.size()) throw NetworkError("no cached forward pass");
  if (grad_out.rows() != output_size() || grad_out.cols() != cache.outputs.back().cols()) {
    throw NetworkError("output gradient shape mismatch");
  }
  if (grads && grads->size() != layers_.size()) *grads = zero_grads();
  Eigen::MatrixXd g = grad_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    activation_backward(g, cache.outputs[l], activation_of(l));
    if (grads) {
      (*grads)[l].weight.noalias() += g * cache.layer_input(l).transpose();
      (*grads)[l].bias += g.rowwise().sum();
    }
    Eigen::MatrixXd prev = layers_[l].weight.transpose() * g;
    g.swap(prev);
  }
  return g;
}

LayerStack Mlp::zero_grads() const {
  LayerStack g;
  g.reserve(layers_.size());
  for (const auto& l : layers_) {
    g.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd flatten(const LayerStack& stack) {
  std::size_t n = 0;
  for (const auto& l : stack) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  Eigen::Index off = 0;
  for (const auto& l : stack) {
    out.segment(off, l.weight.size()) = l.weight.reshaped();
    off += l.weight.size();
    out.segment(off, l.bias.size()) = l.bias;
    off += l.bias.size();
  }
  return out;
}

Eigen::VectorXd Mlp::flatten() const { return modsat::flatten(layers_); }

void Mlp::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) throw NetworkError("parameter count mismatch");
  Eigen::Index off = 0;
  for (auto& l : layers_) {
    l.weight.reshaped() = flat.segment(off, l.weight.size());
    off += l.weight.size();
    l.bias = flat.segment(off, l.bias.size());
    off += l.bias.size();
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_ || hidden_ != other.hidden_ || output_ != other.output_) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weight != other.layers_[l].weight || layers_[l].bias != other.layers_[l].bias) return false;
  }
  return true;
}

void zero(LayerStack& grads) {
  for (auto& l : grads) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

void blend_into(Mlp& target, const Mlp& online, double retention) {
  if (!target.same_shape(online)) throw NetworkError("target and online shapes differ");
  for (std::size_t l = 0; l < target.layers().size(); ++l) {
    auto& t = target.layers()[l];
    const auto& o = online.layers()[l];
    t.weight = retention * t.weight + (1.0 - retention) * o.weight;
    t.bias = retention * t.bias + (1.0 - retention) * o.bias;
  }
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(net.zero_grads()), v_(net.zero_grads()) {}

void Adam::step(Mlp& net, const LayerStack& grads) {
  if (grads.size() != net.layers().size() || m_.size() != grads.size()) throw NetworkError("optimizer shape mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
      param.array() -= step * m.array() / (v.array().sqrt() + eps_);
    };
    update(net.layers()[l].weight, m_[l].weight, v_[l].weight, grads[l].weight);
    update(net.layers()[l].bias, m_[l].bias, v_[l].bias, grads[l].bias);
  }
}

}  // namespace modsat
