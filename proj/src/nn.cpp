#include "gaminet/nn.hpp"

#include <cmath>

#include "gaminet/errors.hpp"

namespace gaminet {

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ValidationError("unknown activation: " + name +
                        " (expected relu, tanh or identity)");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

int Subnetwork::param_count() const {
  int n = 0;
  for (const auto& l : layers)
    n += static_cast<int>(l.weights.size() + l.biases.size());
  return n;
}

Eigen::MatrixXd orthogonal_init(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1)
    throw ValidationError("orthogonal_init requires positive dimensions");
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd gauss(big, small);
  for (int j = 0; j < small; ++j)
    for (int i = 0; i < big; ++i) gauss(i, j) = rng.normal();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  // Sign correction makes the factorization unique, hence reproducible.
  for (int j = 0; j < small; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);

  if (rows >= cols) return q;  // orthonormal columns
  return q.transpose();        // orthonormal rows
}

Subnetwork make_subnetwork(int in_dim, int input_arity,
                           const std::vector<int>& hidden_widths,
                           Activation act, Rng& rng) {
  if (in_dim < 1) throw ValidationError("subnetwork needs at least one input");
  Subnetwork net;
  net.input_arity = input_arity;
  int prev = in_dim;
  for (int width : hidden_widths) {
    if (width < 1) throw ValidationError("hidden layer width must be positive");
    DenseLayer layer;
    layer.weights = orthogonal_init(width, prev, rng);
    layer.biases = Eigen::VectorXd::Zero(width);
    layer.activation = act;
    net.layers.push_back(std::move(layer));
    prev = width;
  }
  DenseLayer out;
  out.weights = orthogonal_init(1, prev, rng);
  out.biases = Eigen::VectorXd::Zero(1);
  out.activation = Activation::kIdentity;
  net.layers.push_back(std::move(out));
  return net;
}

namespace {

void apply_activation(Activation a, const Eigen::MatrixXd& pre, Eigen::MatrixXd& act) {
  switch (a) {
    case Activation::kRelu:
      act = pre.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      act = pre.array().tanh().matrix();
      break;
    case Activation::kIdentity:
      act = pre;
      break;
  }
}

// Derivative of the activation given pre-activation and activation values.
Eigen::ArrayXXd activation_grad(Activation a, const Eigen::MatrixXd& pre,
                                const Eigen::MatrixXd& act) {
  switch (a) {
    case Activation::kRelu:
      return (pre.array() > 0.0).cast<double>();
    case Activation::kTanh:
      return 1.0 - act.array().square();
    case Activation::kIdentity:
      return Eigen::ArrayXXd::Ones(pre.rows(), pre.cols());
  }
  return Eigen::ArrayXXd::Ones(pre.rows(), pre.cols());
}

}  // namespace

Eigen::VectorXd subnet_forward(const Subnetwork& net, const Eigen::MatrixXd& inputs,
                               ForwardCache* cache) {
  if (net.layers.empty()) throw ValidationError("subnetwork has no layers");
  if (inputs.rows() != net.in_dim())
    throw ValidationError("input shape mismatch: got " +
                          std::to_string(inputs.rows()) + " rows, expected " +
                          std::to_string(net.in_dim()));
  const size_t n_layers = net.layers.size();
  if (cache) {
    cache->input = inputs;
    cache->pre.resize(n_layers);
    cache->act.resize(n_layers);
  }
  Eigen::MatrixXd current = inputs;
  Eigen::MatrixXd pre;
  for (size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = net.layers[l];
    pre.noalias() = layer.weights * current;
    pre.colwise() += layer.biases;
    apply_activation(layer.activation, pre, current);
    if (cache) {
      cache->pre[l] = pre;
      cache->act[l] = current;
    }
  }
  if (current.rows() != 1)
    throw ValidationError("subnetwork output layer must have one node");
  return current.row(0).transpose().array() - net.output_offset;
}

SubnetGrads subnet_backward(const Subnetwork& net, const ForwardCache& cache,
                            const Eigen::VectorXd& upstream) {
  const size_t n_layers = net.layers.size();
  if (cache.pre.size() != n_layers || cache.act.size() != n_layers)
    throw ValidationError("forward cache does not match the network");
  if (upstream.size() != cache.batch())
    throw ValidationError("stale cache: upstream length " +
                          std::to_string(upstream.size()) + " vs cached batch " +
                          std::to_string(cache.batch()));

  SubnetGrads grads(n_layers);
  Eigen::MatrixXd delta = upstream.transpose();  // 1 x batch
  for (size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    delta.array() *= activation_grad(layer.activation, cache.pre[l], cache.act[l]);
    const Eigen::MatrixXd& below = (l == 0) ? cache.input : cache.act[l - 1];
    grads[l].d_weights.noalias() = delta * below.transpose();
    grads[l].d_biases = delta.rowwise().sum();
    if (l > 0) delta = (layer.weights.transpose() * delta).eval();
  }
  return grads;
}

AdamState AdamState::create(int dim, double learning_rate) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(dim);
  s.second_moment = Eigen::VectorXd::Zero(dim);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grads, const std::string& block_name) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size())
    throw ValidationError("adam_step size mismatch" +
                          (block_name.empty() ? "" : " in " + block_name));
  if (!grads.allFinite())
    throw DivergenceError("non-finite gradient" +
                          (block_name.empty() ? "" : " in " + block_name));
  state.step_count += 1;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment = state.beta2 * state.second_moment.array().matrix() +
                        (1.0 - state.beta2) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  params.array() -= state.learning_rate * (state.first_moment.array() / bc1) /
                    ((state.second_moment.array() / bc2).sqrt() + state.epsilon);
}

Eigen::VectorXd flatten_params(const Subnetwork& net) {
  Eigen::VectorXd flat(net.param_count());
  int pos = 0;
  for (const auto& l : net.layers) {
    const int nw = static_cast<int>(l.weights.size());
    flat.segment(pos, nw) = Eigen::Map<const Eigen::VectorXd>(l.weights.data(), nw);
    pos += nw;
    flat.segment(pos, l.biases.size()) = l.biases;
    pos += static_cast<int>(l.biases.size());
  }
  return flat;
}

void unflatten_params(const Eigen::VectorXd& flat, Subnetwork& net) {
  if (flat.size() != net.param_count())
    throw ValidationError("flat parameter vector does not match the network");
  int pos = 0;
  for (auto& l : net.layers) {
    const int nw = static_cast<int>(l.weights.size());
    Eigen::Map<Eigen::VectorXd>(l.weights.data(), nw) = flat.segment(pos, nw);
    pos += nw;
    l.biases = flat.segment(pos, l.biases.size());
    pos += static_cast<int>(l.biases.size());
  }
}

Eigen::VectorXd flatten_grads(const SubnetGrads& grads) {
  int total = 0;
  for (const auto& g : grads)
    total += static_cast<int>(g.d_weights.size() + g.d_biases.size());
  Eigen::VectorXd flat(total);
  int pos = 0;
  for (const auto& g : grads) {
    const int nw = static_cast<int>(g.d_weights.size());
    flat.segment(pos, nw) = Eigen::Map<const Eigen::VectorXd>(g.d_weights.data(), nw);
    pos += nw;
    flat.segment(pos, g.d_biases.size()) = g.d_biases;
    pos += static_cast<int>(g.d_biases.size());
  }
  return flat;
}

}  // namespace gaminet
