#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "parkrl/rng.hpp"

namespace parkrl {

struct MlpGrad {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;

  void setZero();
  MlpGrad& operator+=(const MlpGrad& o);
  MlpGrad& operator*=(double s);
};

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

// Fully connected net, tanh hidden activations, linear output. Batches are
// stored column-wise. Gradients are plain sums over the batch; the caller
// scales the upstream gradient.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {in, hidden..., out}; weights ~ U(-1,1)/sqrt(fan_in)
  Mlp(const std::vector<int>& sizes, Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  // Caches per-layer activations (acts[0] = x) for backward().
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x,
                                 std::vector<Eigen::MatrixXd>& acts) const;
  // dy is dL/d(output); returns parameter gradients, optionally dL/dx.
  MlpGrad backward(const std::vector<Eigen::MatrixXd>& acts, const Eigen::MatrixXd& dy,
                   Eigen::MatrixXd* dx = nullptr) const;

  MlpGrad zero_grad() const;
  void adam_step(const MlpGrad& g, AdamState& state, double lr);

  int in_dim() const { return W_.empty() ? 0 : (int)W_.front().cols(); }
  int out_dim() const { return W_.empty() ? 0 : (int)W_.back().rows(); }
  size_t n_layers() const { return W_.size(); }
  std::vector<Eigen::MatrixXd>& weights() { return W_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return W_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }

  void save(std::ostream& out) const;  // exact text round trip
  static Mlp load(std::istream& in);

  bool operator==(const Mlp& o) const;

 private:
  std::vector<Eigen::MatrixXd> W_;
  std::vector<Eigen::VectorXd> b_;
};

// dst <- (1 - tau) * dst + tau * src, the target-network tracking rule.
void polyak_update(const Mlp& src, Mlp& dst, double tau);

}  // namespace parkrl
