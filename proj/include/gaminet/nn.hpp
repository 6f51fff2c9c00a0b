#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gaminet/rng.hpp"

namespace gaminet {

enum class Activation { kRelu, kTanh, kIdentity };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd biases;   // out_dim
  Activation activation = Activation::kIdentity;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
};

// Small dense network with a scalar output. `input_arity` is the number of
// conceptual inputs (1 for a main effect, 2 for a pairwise interaction);
// the first layer may be wider when categorical inputs are one-hot encoded.
// `output_offset` is subtracted from the raw network output, so centering a
// trained effect never touches the weights.
struct Subnetwork {
  std::vector<DenseLayer> layers;
  int input_arity = 1;
  double output_offset = 0.0;

  int in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  int param_count() const;
};

// Everything subnet_backward needs from the forward pass.
struct ForwardCache {
  Eigen::MatrixXd input;               // in_dim x batch
  std::vector<Eigen::MatrixXd> pre;    // pre-activations per layer
  std::vector<Eigen::MatrixXd> act;    // activations per layer

  int batch() const { return static_cast<int>(input.cols()); }
};

struct LayerGrads {
  Eigen::MatrixXd d_weights;
  Eigen::VectorXd d_biases;
};
using SubnetGrads = std::vector<LayerGrads>;

/// Orthogonal matrix from QR of a standard-normal draw, sign-corrected so
/// the result is deterministic under a fixed seed. Rows are orthonormal
/// when rows <= cols, columns otherwise.
Eigen::MatrixXd orthogonal_init(int rows, int cols, Rng& rng);

/// Builds a subnetwork with orthogonally initialized weights, zero biases,
/// hidden activation `act` and an identity output layer.
Subnetwork make_subnetwork(int in_dim, int input_arity,
                           const std::vector<int>& hidden_widths,
                           Activation act, Rng& rng);

/// Forward pass over a batch (one column per sample). Returns the scalar
/// outputs minus `output_offset`; fills `cache` when non-null.
Eigen::VectorXd subnet_forward(const Subnetwork& net,
                               const Eigen::MatrixXd& inputs,
                               ForwardCache* cache = nullptr);

/// Gradients of sum_i upstream[i] * output[i] with respect to every weight
/// and bias. The ReLU subgradient at exactly zero is zero.
SubnetGrads subnet_backward(const Subnetwork& net, const ForwardCache& cache,
                            const Eigen::VectorXd& upstream);

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-4;

  static AdamState create(int dim, double learning_rate);
};

/// One Adam update with bias correction, in place. `block_name` labels the
/// parameter block in divergence diagnostics.
void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grads, const std::string& block_name = "");

// Flat packing used by the optimizer: per layer, column-major weights then
// biases, layers in order.
Eigen::VectorXd flatten_params(const Subnetwork& net);
void unflatten_params(const Eigen::VectorXd& flat, Subnetwork& net);
Eigen::VectorXd flatten_grads(const SubnetGrads& grads);

}  // namespace gaminet
