#include "parkrl/sac.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace parkrl {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
constexpr double kSquashEps = 1e-6;
}  // namespace

void SacConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0) || !(tau > 0.0 && tau <= 1.0) || !(lr > 0.0) ||
      batch_size < 1 || buffer_capacity < batch_size || hidden < 1 ||
      log_std_min >= log_std_max || start_steps < 0 || update_after < batch_size) {
    throw std::invalid_argument("SacConfig: bad parameters");
  }
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  data_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

SacAgent::SacAgent(const SacConfig& cfg)
    : cfg_(cfg), buffer_((size_t)cfg.buffer_capacity) {}

SacAgent::SacAgent(int obs_dim, const SacConfig& cfg, uint64_t seed)
    : obs_dim_(obs_dim),
      cfg_(cfg),
      rng_(Rng::mix(seed, 0x5ac)),
      buffer_((size_t)cfg.buffer_capacity),
      log_alpha_(cfg.init_log_alpha) {
  cfg_.validate();
  if (obs_dim < 1) throw std::invalid_argument("SacAgent: bad obs_dim");
  const std::vector<int> pi_sizes = {obs_dim, cfg_.hidden, cfg_.hidden, 4};
  const std::vector<int> q_sizes = {obs_dim + 2, cfg_.hidden, cfg_.hidden, 1};
  policy_ = Mlp(pi_sizes, rng_);
  q1_ = Mlp(q_sizes, rng_);
  q2_ = Mlp(q_sizes, rng_);
  q1_target_ = q1_;
  q2_target_ = q2_;
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

void SacAgent::sample_policy(const Eigen::MatrixXd& obs, Eigen::MatrixXd& actions,
                             Eigen::RowVectorXd& logp, Eigen::MatrixXd* cache_mu,
                             Eigen::MatrixXd* cache_logstd, Eigen::MatrixXd* cache_eps,
                             Eigen::MatrixXd* cache_mask,
                             std::vector<Eigen::MatrixXd>* acts) {
  const Eigen::Index B = obs.cols();
  Eigen::MatrixXd out;
  std::vector<Eigen::MatrixXd> local_acts;
  if (acts != nullptr) {
    out = policy_.forward_cached(obs, *acts);
  } else {
    out = policy_.forward(obs);
  }
  const Eigen::MatrixXd mu = out.topRows(2);
  const Eigen::MatrixXd raw_logstd = out.bottomRows(2);
  // hard clamp; the mask zeroes the gradient where it saturated
  Eigen::MatrixXd logstd = raw_logstd.array()
                               .max(cfg_.log_std_min)
                               .min(cfg_.log_std_max);
  Eigen::MatrixXd mask =
      ((raw_logstd.array() > cfg_.log_std_min) &&
       (raw_logstd.array() < cfg_.log_std_max))
          .cast<double>();
  const Eigen::MatrixXd sigma = logstd.array().exp();
  Eigen::MatrixXd eps(2, B);
  for (Eigen::Index j = 0; j < B; ++j)
    for (int i = 0; i < 2; ++i) eps(i, j) = rng_.normal();
  const Eigen::MatrixXd u = mu + sigma.cwiseProduct(eps);
  actions = u.array().tanh();
  logp = (-0.5 * eps.array().square() - logstd.array() - kLogSqrt2Pi -
          (1.0 - actions.array().square() + kSquashEps).log())
             .colwise()
             .sum();
  if (cache_mu) *cache_mu = mu;
  if (cache_logstd) *cache_logstd = logstd;
  if (cache_eps) *cache_eps = eps;
  if (cache_mask) *cache_mask = mask;
}

Eigen::Vector2d SacAgent::act(const Eigen::VectorXd& obs, bool stochastic) {
  if (obs.size() != obs_dim_) throw std::invalid_argument("SacAgent::act: bad obs");
  if (!stochastic) {
    const Eigen::VectorXd out = policy_.forward(obs);
    return out.head<2>().array().tanh();
  }
  Eigen::MatrixXd a;
  Eigen::RowVectorXd lp;
  sample_policy(obs, a, lp);
  return a.col(0);
}

void SacAgent::update() {
  const int B = cfg_.batch_size;
  if ((int)buffer_.size() < cfg_.update_after || (int)buffer_.size() < B) return;

  Eigen::MatrixXd S(obs_dim_, B), S2(obs_dim_, B), A(2, B);
  Eigen::RowVectorXd R(B), notdone(B);
  for (int j = 0; j < B; ++j) {
    const Transition& t = buffer_.at(rng_.uniform_int(buffer_.size()));
    S.col(j) = t.obs;
    S2.col(j) = t.next_obs;
    A.col(j) = t.action;
    R(j) = t.reward;
    notdone(j) = t.terminal ? 0.0 : 1.0;
  }
  const double a_coef = alpha();

  // targets
  Eigen::MatrixXd a2;
  Eigen::RowVectorXd logp2;
  sample_policy(S2, a2, logp2);
  Eigen::MatrixXd qin2(obs_dim_ + 2, B);
  qin2 << S2, a2;
  const Eigen::RowVectorXd q1t = q1_target_.forward(qin2);
  const Eigen::RowVectorXd q2t = q2_target_.forward(qin2);
  const Eigen::RowVectorXd y =
      R.array() + cfg_.gamma * notdone.array() *
                      (q1t.cwiseMin(q2t).array() - a_coef * logp2.array());

  // critic update
  Eigen::MatrixXd qin(obs_dim_ + 2, B);
  qin << S, A;
  std::vector<Eigen::MatrixXd> q1_acts, q2_acts;
  const Eigen::RowVectorXd q1v = q1_.forward_cached(qin, q1_acts);
  const Eigen::RowVectorXd q2v = q2_.forward_cached(qin, q2_acts);
  const Eigen::MatrixXd dq1 = (2.0 / B) * (q1v - y);
  const Eigen::MatrixXd dq2 = (2.0 / B) * (q2v - y);
  q1_.adam_step(q1_.backward(q1_acts, dq1), q1_opt_, cfg_.lr);
  q2_.adam_step(q2_.backward(q2_acts, dq2), q2_opt_, cfg_.lr);

  // policy update through the freshly updated critics
  Eigen::MatrixXd a_pi, mu, logstd, eps, mask;
  Eigen::RowVectorXd logp;
  std::vector<Eigen::MatrixXd> pi_acts;
  sample_policy(S, a_pi, logp, &mu, &logstd, &eps, &mask, &pi_acts);
  Eigen::MatrixXd qin_pi(obs_dim_ + 2, B);
  qin_pi << S, a_pi;
  std::vector<Eigen::MatrixXd> c1_acts, c2_acts;
  const Eigen::RowVectorXd q1p = q1_.forward_cached(qin_pi, c1_acts);
  const Eigen::RowVectorXd q2p = q2_.forward_cached(qin_pi, c2_acts);
  Eigen::MatrixXd dx1, dx2;
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, B);
  q1_.backward(c1_acts, ones, &dx1);
  q2_.backward(c2_acts, ones, &dx2);
  // d(min(q1,q2))/da, column-wise winner
  Eigen::MatrixXd dq_da(2, B);
  for (int j = 0; j < B; ++j)
    dq_da.col(j) = (q1p(j) <= q2p(j) ? dx1 : dx2).col(j).tail<2>();

  const Eigen::ArrayXXd one_m_a2 = 1.0 - a_pi.array().square();
  const Eigen::ArrayXXd squash = 2.0 * a_pi.array() * one_m_a2 / (one_m_a2 + kSquashEps);
  const Eigen::ArrayXXd sig_eps = logstd.array().exp() * eps.array();
  Eigen::MatrixXd dmu =
      ((a_coef * squash - dq_da.array() * one_m_a2) / B).matrix();
  Eigen::MatrixXd dlogstd =
      (((a_coef * (squash * sig_eps - 1.0) - dq_da.array() * one_m_a2 * sig_eps) / B) *
       mask.array())
          .matrix();
  Eigen::MatrixXd dpi(4, B);
  dpi << dmu, dlogstd;
  policy_.adam_step(policy_.backward(pi_acts, dpi), policy_opt_, cfg_.lr);

  // temperature update
  const double galpha = -(logp.array() + cfg_.target_entropy).mean();
  ++alpha_t_;
  alpha_m_ = 0.9 * alpha_m_ + 0.1 * galpha;
  alpha_v_ = 0.999 * alpha_v_ + 0.001 * galpha * galpha;
  const double mhat = alpha_m_ / (1.0 - std::pow(0.9, (double)alpha_t_));
  const double vhat = alpha_v_ / (1.0 - std::pow(0.999, (double)alpha_t_));
  log_alpha_ -= cfg_.lr * mhat / (std::sqrt(vhat) + 1e-8);

  polyak_update(q1_, q1_target_, cfg_.tau);
  polyak_update(q2_, q2_target_, cfg_.tau);
  ++updates_;
}

void SacAgent::save(std::ostream& out) const {
  char buf[64];
  out << "parkrl-sac v1\n";
  out << obs_dim_ << " " << cfg_.hidden << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", log_alpha_);
  out << buf << "\n";
  policy_.save(out);
  q1_.save(out);
  q2_.save(out);
  q1_target_.save(out);
  q2_target_.save(out);
}

SacAgent SacAgent::load(std::istream& in) {
  std::string a, b;
  if (!(in >> a >> b) || a != "parkrl-sac" || b != "v1")
    throw std::runtime_error("SacAgent::load: bad header");
  SacConfig cfg;
  SacAgent agent(cfg);
  int hidden = 0;
  if (!(in >> agent.obs_dim_ >> hidden >> agent.log_alpha_) || agent.obs_dim_ < 1)
    throw std::runtime_error("SacAgent::load: bad dimensions");
  agent.cfg_.hidden = hidden;
  agent.policy_ = Mlp::load(in);
  agent.q1_ = Mlp::load(in);
  agent.q2_ = Mlp::load(in);
  agent.q1_target_ = Mlp::load(in);
  agent.q2_target_ = Mlp::load(in);
  if (agent.policy_.in_dim() != agent.obs_dim_ || agent.policy_.out_dim() != 4 ||
      agent.q1_.in_dim() != agent.obs_dim_ + 2) {
    throw std::runtime_error("SacAgent::load: inconsistent shapes");
  }
  return agent;
}

}  // namespace parkrl
