#include "parkrl/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace parkrl {

void MlpGrad::setZero() {
  for (auto& m : dW) m.setZero();
  for (auto& v : db) v.setZero();
}

MlpGrad& MlpGrad::operator+=(const MlpGrad& o) {
  for (size_t i = 0; i < dW.size(); ++i) dW[i] += o.dW[i];
  for (size_t i = 0; i < db.size(); ++i) db[i] += o.db[i];
  return *this;
}

MlpGrad& MlpGrad::operator*=(double s) {
  for (auto& m : dW) m *= s;
  for (auto& v : db) v *= s;
  return *this;
}

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two sizes");
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] <= 0 || sizes[l + 1] <= 0)
      throw std::invalid_argument("Mlp: sizes must be positive");
    const double s = 1.0 / std::sqrt((double)sizes[l]);
    Eigen::MatrixXd W(sizes[l + 1], sizes[l]);
    for (int i = 0; i < W.rows(); ++i)
      for (int j = 0; j < W.cols(); ++j) W(i, j) = rng.uniform(-s, s);
    W_.push_back(std::move(W));
    b_.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (size_t l = 0; l < W_.size(); ++l) {
    h = (W_[l] * h).colwise() + b_[l];
    if (l + 1 < W_.size()) h = h.array().tanh();
  }
  return h;
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& x,
                                    std::vector<Eigen::MatrixXd>& acts) const {
  acts.clear();
  acts.push_back(x);
  for (size_t l = 0; l < W_.size(); ++l) {
    Eigen::MatrixXd h = (W_[l] * acts.back()).colwise() + b_[l];
    if (l + 1 < W_.size()) h = h.array().tanh();
    acts.push_back(std::move(h));
  }
  return acts.back();
}

MlpGrad Mlp::backward(const std::vector<Eigen::MatrixXd>& acts,
                      const Eigen::MatrixXd& dy, Eigen::MatrixXd* dx) const {
  if (acts.size() != W_.size() + 1) throw std::invalid_argument("Mlp: bad cache");
  MlpGrad g = zero_grad();
  Eigen::MatrixXd dz = dy;
  for (size_t l = W_.size(); l-- > 0;) {
    g.dW[l] = dz * acts[l].transpose();
    g.db[l] = dz.rowwise().sum();
    if (l > 0 || dx != nullptr) {
      Eigen::MatrixXd da = W_[l].transpose() * dz;
      if (l > 0) {
        dz = da.array() * (1.0 - acts[l].array().square());
      } else {
        *dx = std::move(da);
      }
    }
  }
  return g;
}

MlpGrad Mlp::zero_grad() const {
  MlpGrad g;
  for (size_t l = 0; l < W_.size(); ++l) {
    g.dW.push_back(Eigen::MatrixXd::Zero(W_[l].rows(), W_[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(b_[l].size()));
  }
  return g;
}

void Mlp::adam_step(const MlpGrad& g, AdamState& st, double lr) {
  if (st.mW.empty()) {
    for (size_t l = 0; l < W_.size(); ++l) {
      st.mW.push_back(Eigen::MatrixXd::Zero(W_[l].rows(), W_[l].cols()));
      st.vW.push_back(Eigen::MatrixXd::Zero(W_[l].rows(), W_[l].cols()));
      st.mb.push_back(Eigen::VectorXd::Zero(b_[l].size()));
      st.vb.push_back(Eigen::VectorXd::Zero(b_[l].size()));
    }
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, (double)st.t);
  const double c2 = 1.0 - std::pow(st.beta2, (double)st.t);
  for (size_t l = 0; l < W_.size(); ++l) {
    st.mW[l] = st.beta1 * st.mW[l] + (1.0 - st.beta1) * g.dW[l];
    st.vW[l] = st.beta2 * st.vW[l].array() + (1.0 - st.beta2) * g.dW[l].array().square();
    W_[l].array() -=
        lr * (st.mW[l].array() / c1) / ((st.vW[l].array() / c2).sqrt() + st.eps);
    st.mb[l] = st.beta1 * st.mb[l] + (1.0 - st.beta1) * g.db[l];
    st.vb[l] = st.beta2 * st.vb[l].array() + (1.0 - st.beta2) * g.db[l].array().square();
    b_[l].array() -=
        lr * (st.mb[l].array() / c1) / ((st.vb[l].array() / c2).sqrt() + st.eps);
  }
}

void Mlp::save(std::ostream& out) const {
  char buf[64];
  out << "mlp " << W_.size() << "\n";
  for (size_t l = 0; l < W_.size(); ++l) {
    out << W_[l].rows() << " " << W_[l].cols() << "\n";
    for (int i = 0; i < W_[l].rows(); ++i) {
      for (int j = 0; j < W_[l].cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", W_[l](i, j));
        out << buf << (j + 1 < W_[l].cols() ? " " : "\n");
      }
    }
    for (int i = 0; i < b_[l].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", b_[l](i));
      out << buf << (i + 1 < b_[l].size() ? " " : "\n");
    }
  }
}

Mlp Mlp::load(std::istream& in) {
  std::string tag;
  size_t n_layers = 0;
  if (!(in >> tag >> n_layers) || tag != "mlp")
    throw std::runtime_error("Mlp::load: bad header");
  Mlp net;
  for (size_t l = 0; l < n_layers; ++l) {
    int rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
      throw std::runtime_error("Mlp::load: bad layer shape");
    Eigen::MatrixXd W(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        if (!(in >> W(i, j))) throw std::runtime_error("Mlp::load: truncated weights");
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i)
      if (!(in >> b(i))) throw std::runtime_error("Mlp::load: truncated biases");
    net.W_.push_back(std::move(W));
    net.b_.push_back(std::move(b));
  }
  return net;
}

bool Mlp::operator==(const Mlp& o) const {
  if (W_.size() != o.W_.size()) return false;
  for (size_t l = 0; l < W_.size(); ++l) {
    if (W_[l].rows() != o.W_[l].rows() || W_[l].cols() != o.W_[l].cols()) return false;
    if (W_[l] != o.W_[l] || b_[l] != o.b_[l]) return false;
  }
  return true;
}

void polyak_update(const Mlp& src, Mlp& dst, double tau) {
  if (src.n_layers() != dst.n_layers())
    throw std::invalid_argument("polyak_update: shape mismatch");
  for (size_t l = 0; l < src.n_layers(); ++l) {
    dst.weights()[l] = (1.0 - tau) * dst.weights()[l] + tau * src.weights()[l];
    dst.biases()[l] = (1.0 - tau) * dst.biases()[l] + tau * src.biases()[l];
  }
}

}  // namespace parkrl
