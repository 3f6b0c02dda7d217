#ifndef STRETTO_OPTIM_HPP
#define STRETTO_OPTIM_HPP

#include "stretto/nn.hpp"

#include <cmath>
#include <vector>

namespace stretto {

// Adaptive per-parameter step sizes with optional global gradient-norm
// clipping. The update order follows the registered parameter order, so
// runs are bit-reproducible.
template <typename S>
class Adam {
 public:
  Adam(nn::ParamRefs<S> params, double lr, double clip_norm = 10.0,
       double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)),
        lr_(lr),
        clip_norm_(clip_norm),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto* p : params_) {
      m_.push_back(nn::Mat<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(nn::Mat<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  // consumes the accumulated gradients and leaves them zeroed
  void step() {
    ++t_;
    if (clip_norm_ > 0.0) {
      double sq = 0.0;
      for (auto* p : params_) sq += static_cast<double>(p->grad.squaredNorm());
      double norm = std::sqrt(sq);
      if (norm > clip_norm_) {
        S scale = static_cast<S>(clip_norm_ / norm);
        for (auto* p : params_) p->grad *= scale;
      }
    }
    const S b1 = static_cast<S>(beta1_), b2 = static_cast<S>(beta2_);
    const S bc1 = static_cast<S>(1.0 - std::pow(beta1_, t_));
    const S bc2 = static_cast<S>(1.0 - std::pow(beta2_, t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto* p = params_[i];
      m_[i] = b1 * m_[i] + (S(1) - b1) * p->grad;
      v_[i] = (b2 * v_[i].array() + (S(1) - b2) * p->grad.array().square()).matrix();
      p->value.array() -=
          static_cast<S>(lr_) * (m_[i].array() / bc1) /
          ((v_[i].array() / bc2).sqrt() + static_cast<S>(eps_));
      p->zero_grad();
    }
  }

 private:
  nn::ParamRefs<S> params_;
  std::vector<nn::Mat<S>> m_, v_;
  double lr_, clip_norm_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace stretto

#endif
