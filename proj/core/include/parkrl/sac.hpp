#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "parkrl/mlp.hpp"
#include "parkrl/rng.hpp"

namespace parkrl {

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  int batch_size = 256;
  int buffer_capacity = 200000;
  int hidden = 64;  // two hidden layers of this width
  double target_entropy = -2.0;
  double init_log_alpha = -1.6094379124341003;  // log(0.2)
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  int start_steps = 1000;    // uniform-random warmup actions
  int update_after = 1000;   // min buffer fill before gradient steps

  void validate() const;
};

// Actions live in [-1, 1]^2 (normalized speed, steering).
struct Transition {
  Eigen::VectorXd obs;
  Eigen::Vector2d action;
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  bool terminal = false;  // true only for absorbing ends, not timeouts
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  void push(Transition t);
  size_t size() const { return data_.size(); }
  const Transition& at(size_t i) const { return data_[i]; }

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> data_;
};

// Soft actor-critic with twin critics, Polyak-averaged targets, a
// tanh-squashed Gaussian policy and auto-tuned temperature. Single
// threaded; fully deterministic for a fixed seed and call order.
class SacAgent {
 public:
  SacAgent(int obs_dim, const SacConfig& cfg, uint64_t seed);

  Eigen::Vector2d act(const Eigen::VectorXd& obs, bool stochastic);
  void push(Transition t) { buffer_.push(std::move(t)); }
  // One gradient step on all networks; no-op until the buffer is warm.
  void update();

  double alpha() const;
  int obs_dim() const { return obs_dim_; }
  const SacConfig& config() const { return cfg_; }
  size_t buffer_size() const { return buffer_.size(); }
  const Mlp& policy() const { return policy_; }
  const Mlp& q1() const { return q1_; }
  const Mlp& q2() const { return q2_; }
  Rng& rng() { return rng_; }
  long updates_done() const { return updates_; }

  void save(std::ostream& out) const;
  static SacAgent load(std::istream& in);

 private:
  SacAgent(const SacConfig& cfg);  // shell for load()

  // squashed sample plus log-density, batched column-wise
  void sample_policy(const Eigen::MatrixXd& obs, Eigen::MatrixXd& actions,
                     Eigen::RowVectorXd& logp, Eigen::MatrixXd* cache_mu = nullptr,
                     Eigen::MatrixXd* cache_logstd = nullptr,
                     Eigen::MatrixXd* cache_eps = nullptr,
                     Eigen::MatrixXd* cache_mask = nullptr,
                     std::vector<Eigen::MatrixXd>* acts = nullptr);

  int obs_dim_ = 0;
  SacConfig cfg_;
  Rng rng_{0};
  ReplayBuffer buffer_{1};
  Mlp policy_, q1_, q2_, q1_target_, q2_target_;
  AdamState policy_opt_, q1_opt_, q2_opt_;
  double log_alpha_ = 0.0;
  double alpha_m_ = 0.0, alpha_v_ = 0.0;  // scalar Adam for the temperature
  long alpha_t_ = 0;
  long updates_ = 0;
};

}  // namespace parkrl
