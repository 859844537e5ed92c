#pragma once

#include <Eigen/Core>

#include <random>
#include <stdexcept>
#include <vector>

namespace modsat {

enum class Activation { Identity, Relu, Tanh };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Parameter (or gradient) storage for a stack of dense layers.
using LayerStack = std::vector<DenseLayer>;

/// Activations saved by a forward pass; consumed by backward.
struct MlpCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> outputs;  // post-activation, one per layer
  bool valid() const { return !outputs.empty(); }
  const Eigen::MatrixXd& layer_input(std::size_t l) const { return l == 0 ? input : outputs[l - 1]; }
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected network over column batches (features x batch). Hidden
/// layers use `hidden`, the last layer uses `output`.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation hidden, Activation output);

  /// Uniform(+-1/sqrt(fan_in)) weights and biases; the last layer's weights
  /// are additionally multiplied by `final_scale`.
  void initialize(std::mt19937_64& rng, double final_scale = 1.0);

  const Eigen::MatrixXd& forward(const Eigen::Ref<const Eigen::MatrixXd>& x, MlpCache& cache) const;
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  /// Reverse pass: accumulates parameter gradients into `grads` (shaped like
  /// this network) and returns the gradient with respect to the input.
  Eigen::MatrixXd backward(const MlpCache& cache, const Eigen::Ref<const Eigen::MatrixXd>& grad_out,
                           LayerStack& grads) const {
    return backward(cache, grad_out, &grads);
  }
  /// Same, but parameter gradients are skipped when `grads` is null.
  Eigen::MatrixXd backward(const MlpCache& cache, const Eigen::Ref<const Eigen::MatrixXd>& grad_out,
                           LayerStack* grads) const;

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

  LayerStack& layers() { return layers_; }
  const LayerStack& layers() const { return layers_; }
  LayerStack zero_grads() const;

  std::size_t parameter_count() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  bool same_shape(const Mlp& other) const { return sizes_ == other.sizes_; }
  bool operator==(const Mlp& other) const;

 private:
  Activation activation_of(std::size_t layer) const {
    return layer + 1 == layers_.size() ? output_ : hidden_;
  }

  std::vector<int> sizes_;
  Activation hidden_ = Activation::Relu;
  Activation output_ = Activation::Identity;
  LayerStack layers_;
};

void zero(LayerStack& grads);
Eigen::VectorXd flatten(const LayerStack& stack);

/// target <- retention * target + (1 - retention) * online, layer by layer.
void blend_into(Mlp& target, const Mlp& online, double retention);

/// Adam optimizer state for one network.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Descends along `grads`.
  void step(Mlp& net, const LayerStack& grads);
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  LayerStack m_;
  LayerStack v_;
};

}  // namespace modsat
