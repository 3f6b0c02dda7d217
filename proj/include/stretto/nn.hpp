#ifndef STRETTO_NN_HPP
#define STRETTO_NN_HPP

#include "stretto/common.hpp"
#include "stretto/parallel.hpp"
#include "stretto/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace stretto::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// One trainable tensor plus its gradient accumulator.
template <typename S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;

  void init(std::string n, Eigen::Index rows, Eigen::Index cols) {
    name = std::move(n);
    value = Mat<S>::Zero(rows, cols);
    grad = Mat<S>::Zero(rows, cols);
  }
  void zero_grad() { grad.setZero(); }
};

template <typename S>
using ParamRefs = std::vector<Param<S>*>;

// Activations for a stack of snippets at one layer. Each map is
// (channels, height*width); spatial index = y*width + x.
template <typename S>
struct FeatureStack {
  int channels = 0, height = 0, width = 0;
  std::vector<Mat<S>> maps;

  int count() const { return static_cast<int>(maps.size()); }
  void resize_like(int n, int c, int h, int w) {
    channels = c;
    height = h;
    width = w;
    maps.assign(static_cast<std::size_t>(n), Mat<S>(c, h * w));
  }
};

// ---------------------------------------------------------------------------
// initialization

template <typename S>
void fanin_uniform_init(Mat<S>& w, Eigen::Index fan_in, Rng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      w(r, c) = static_cast<S>(rng.uniform(-bound, bound));
}

template <typename S>
void orthogonal_init(Eigen::Ref<Mat<S>> w, Rng& rng) {
  Eigen::MatrixXd a(w.rows(), w.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  w = q.cast<S>();
}

// ---------------------------------------------------------------------------
// elementwise activations

template <typename S>
inline S elu(S x) {
  return x > S(0) ? x : std::expm1(x);
}

// derivative expressed through the pre-activation value
template <typename S>
inline S elu_grad_from_input(S x) {
  return x > S(0) ? S(1) : std::exp(x);
}

// derivative expressed through the activation output (y = e^x - 1 for x<=0)
template <typename S>
inline S elu_grad_from_output(S y) {
  return y > S(0) ? S(1) : y + S(1);
}

template <typename S>
inline S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// 2-d convolution, stride 1; kernel 3 uses zero padding 1, kernel 1 none

template <typename S>
class Conv2d {
 public:
  void configure(const std::string& name, int in_c, int out_c, int kernel) {
    in_c_ = in_c;
    out_c_ = out_c;
    kernel_ = kernel;
    weight_.init(name + ".weight", out_c, in_c * kernel * kernel);
  }

  void init_params(Rng& rng) {
    fanin_uniform_init(weight_.value, in_c_ * kernel_ * kernel_, rng);
  }

  void collect(ParamRefs<S>& out) { out.push_back(&weight_); }

  int out_channels() const { return out_c_; }

  void im2col(const Mat<S>& x, int h, int w, Mat<S>& patches) const {
    const int kk = kernel_ * kernel_;
    patches.resize(in_c_ * kk, h * w);
    for (int c = 0; c < in_c_; ++c) {
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          int row = (c * kernel_ + ky) * kernel_ + kx;
          for (int y = 0; y < h; ++y) {
            int sy = y + ky - kernel_ / 2;
            if (sy < 0 || sy >= h) {
              patches.row(row).segment(y * w, w).setZero();
              continue;
            }
            for (int x2 = 0; x2 < w; ++x2) {
              int sx = x2 + kx - kernel_ / 2;
              patches(row, y * w + x2) =
                  (sx < 0 || sx >= w) ? S(0) : x(c, sy * w + sx);
            }
          }
        }
      }
    }
  }

  void forward(const FeatureStack<S>& in, FeatureStack<S>& out) const {
    out.resize_like(in.count(), out_c_, in.height, in.width);
    const int h = in.height, w = in.width;
    std::vector<Mat<S>> ws(static_cast<std::size_t>(std::max(1, num_threads())));
    parallel_for(in.count(), [&](int s, int worker) {
      if (kernel_ == 1) {
        out.maps[s].noalias() = weight_.value * in.maps[s];
      } else {
        Mat<S>& patches = ws[static_cast<std::size_t>(worker)];
        im2col(in.maps[s], h, w, patches);
        out.maps[s].noalias() = weight_.value * patches;
      }
    });
  }

  // accumulates dW; writes d_in (same shape as in)
  void backward(const FeatureStack<S>& in, const FeatureStack<S>& d_out,
                FeatureStack<S>& d_in) {
    const int n = in.count();
    const int h = in.height, w = in.width;
    d_in.resize_like(n, in_c_, h, w);
    std::vector<Mat<S>> dw_parts(static_cast<std::size_t>(n));
    std::vector<Mat<S>> ws(static_cast<std::size_t>(std::max(1, num_threads())));
    parallel_for(n, [&](int s, int worker) {
      if (kernel_ == 1) {
        dw_parts[s].noalias() = d_out.maps[s] * in.maps[s].transpose();
        d_in.maps[s].noalias() = weight_.value.transpose() * d_out.maps[s];
        return;
      }
      Mat<S>& patches = ws[static_cast<std::size_t>(worker)];
      im2col(in.maps[s], h, w, patches);
      dw_parts[s].noalias() = d_out.maps[s] * patches.transpose();
      Mat<S> dpatches = weight_.value.transpose() * d_out.maps[s];
      // col2im scatter-add
      Mat<S>& dx = d_in.maps[s];
      dx.setZero();
      for (int c = 0; c < in_c_; ++c) {
        for (int ky = 0; ky < kernel_; ++ky) {
          for (int kx = 0; kx < kernel_; ++kx) {
            int row = (c * kernel_ + ky) * kernel_ + kx;
            for (int y = 0; y < h; ++y) {
              int sy = y + ky - kernel_ / 2;
              if (sy < 0 || sy >= h) continue;
              for (int x2 = 0; x2 < w; ++x2) {
                int sx = x2 + kx - kernel_ / 2;
                if (sx < 0 || sx >= w) continue;
                dx(c, sy * w + sx) += dpatches(row, y * w + x2);
              }
            }
          }
        }
      }
    });
    for (int s = 0; s < n; ++s) weight_.grad += dw_parts[static_cast<std::size_t>(s)];
  }

  Param<S> weight_;

 private:
  int in_c_ = 0, out_c_ = 0, kernel_ = 3;
};

// ---------------------------------------------------------------------------
// batch normalization over (stack x spatial) per channel

template <typename S>
class BatchNorm2d {
 public:
  struct Cache {
    FeatureStack<S> xhat;
    Vec<S> invstd;
  };

  void configure(const std::string& name, int channels, double momentum = 0.9,
                 double eps = 1e-5) {
    channels_ = channels;
    momentum_ = momentum;
    eps_ = eps;
    gamma_.init(name + ".gamma", channels, 1);
    beta_.init(name + ".beta", channels, 1);
    gamma_.value.setOnes();
    running_mean_ = Mat<S>::Zero(channels, 1);
    running_var_ = Mat<S>::Ones(channels, 1);
  }

  void collect(ParamRefs<S>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  void forward(const FeatureStack<S>& in, FeatureStack<S>& out, bool training,
               Cache* cache, bool update_running = true) {
    const int n = in.count();
    out.resize_like(n, in.channels, in.height, in.width);

    Vec<S> mean(channels_), invstd(channels_);
    if (training) {
      // per-snippet partials combined in index order, so the statistics are
      // identical for any thread count
      std::vector<Vec<S>> sums(static_cast<std::size_t>(n)),
          sqsums(static_cast<std::size_t>(n));
      parallel_for(n, [&](int s, int) {
        sums[s] = in.maps[s].rowwise().sum();
        sqsums[s] = in.maps[s].array().square().matrix().rowwise().sum();
      });
      Vec<S> sum = Vec<S>::Zero(channels_), sq = Vec<S>::Zero(channels_);
      for (int s = 0; s < n; ++s) {
        sum += sums[static_cast<std::size_t>(s)];
        sq += sqsums[static_cast<std::size_t>(s)];
      }
      S count = static_cast<S>(n) * static_cast<S>(in.height * in.width);
      mean = sum / count;
      Vec<S> var = (sq / count - mean.array().square().matrix()).cwiseMax(S(0));
      invstd = (var.array() + static_cast<S>(eps_)).rsqrt().matrix();
      if (update_running) {
        running_mean_.col(0) = static_cast<S>(momentum_) * running_mean_.col(0) +
                               static_cast<S>(1 - momentum_) * mean;
        running_var_.col(0) = static_cast<S>(momentum_) * running_var_.col(0) +
                              static_cast<S>(1 - momentum_) * var;
      }
      count_ = count;
    } else {
      mean = running_mean_.col(0);
      invstd =
          (running_var_.col(0).array() + static_cast<S>(eps_)).rsqrt().matrix();
    }

    if (cache) {
      cache->invstd = invstd;
      cache->xhat.resize_like(n, in.channels, in.height, in.width);
    }
    parallel_for(n, [&](int s, int) {
      Mat<S> xhat = ((in.maps[s].colwise() - mean).array().colwise() *
                     invstd.array())
                        .matrix();
      out.maps[s] = ((xhat.array().colwise() * gamma_.value.col(0).array())
                         .colwise() +
                     beta_.value.col(0).array())
                        .matrix();
      if (cache) cache->xhat.maps[s] = std::move(xhat);
    });
  }

  void backward(const Cache& cache, const FeatureStack<S>& d_out,
                FeatureStack<S>& d_in) {
    const int n = d_out.count();
    d_in.resize_like(n, d_out.channels, d_out.height, d_out.width);

    std::vector<Vec<S>> dg_parts(static_cast<std::size_t>(n)),
        db_parts(static_cast<std::size_t>(n));
    parallel_for(n, [&](int s, int) {
      dg_parts[s] =
          (d_out.maps[s].array() * cache.xhat.maps[s].array()).rowwise().sum();
      db_parts[s] = d_out.maps[s].rowwise().sum();
    });
    Vec<S> dgamma = Vec<S>::Zero(channels_), dbeta = Vec<S>::Zero(channels_);
    for (int s = 0; s < n; ++s) {
      dgamma += dg_parts[static_cast<std::size_t>(s)];
      dbeta += db_parts[static_cast<std::size_t>(s)];
    }
    gamma_.grad.col(0) += dgamma;
    beta_.grad.col(0) += dbeta;

    Vec<S> mean_dxhat =
        (dbeta.array() * gamma_.value.col(0).array() / count_).matrix();
    Vec<S> mean_dxhat_xhat =
        (dgamma.array() * gamma_.value.col(0).array() / count_).matrix();
    parallel_for(n, [&](int s, int) {
      // dxhat = d_out * gamma; dx = invstd*(dxhat - mean(dxhat) - xhat*mean(dxhat*xhat))
      Mat<S> dxhat = (d_out.maps[s].array().colwise() *
                      gamma_.value.col(0).array())
                         .matrix();
      Mat<S> centered =
          ((dxhat.colwise() - mean_dxhat).array() -
           (cache.xhat.maps[s].array().colwise() * mean_dxhat_xhat.array()))
              .matrix();
      d_in.maps[s] =
          (centered.array().colwise() * cache.invstd.array()).matrix();
    });
  }

  Param<S> gamma_, beta_;
  Mat<S> running_mean_, running_var_;  // (channels, 1)

 private:
  int channels_ = 0;
  double momentum_ = 0.9, eps_ = 1e-5;
  S count_ = S(1);
};

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2, floor semantics (odd trailing row/col dropped)

template <typename S>
class MaxPool2 {
 public:
  struct Cache {
    std::vector<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>> argmax;
    int in_h = 0, in_w = 0;
  };

  static void forward(const FeatureStack<S>& in, FeatureStack<S>& out,
                      Cache* cache) {
    const int n = in.count();
    const int oh = in.height / 2, ow = in.width / 2;
    out.resize_like(n, in.channels, oh, ow);
    if (cache) {
      cache->argmax.assign(
          static_cast<std::size_t>(n),
          Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>(in.channels,
                                                                      oh * ow));
      cache->in_h = in.height;
      cache->in_w = in.width;
    }
    parallel_for(n, [&](int s, int) {
      const Mat<S>& x = in.maps[s];
      Mat<S>& y = out.maps[s];
      for (int c = 0; c < in.channels; ++c) {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            int base = 2 * oy * in.width + 2 * ox;
            S v0 = x(c, base);
            S v1 = x(c, base + 1);
            S v2 = x(c, base + in.width);
            S v3 = x(c, base + in.width + 1);
            int best = 0;
            S vb = v0;
            if (v1 > vb) { vb = v1; best = 1; }
            if (v2 > vb) { vb = v2; best = 2; }
            if (v3 > vb) { vb = v3; best = 3; }
            y(c, oy * ow + ox) = vb;
            if (cache)
              cache->argmax[static_cast<std::size_t>(s)](c, oy * ow + ox) =
                  static_cast<std::uint8_t>(best);
          }
        }
      }
    });
  }

  static void backward(const Cache& cache, const FeatureStack<S>& d_out,
                       FeatureStack<S>& d_in) {
    const int n = d_out.count();
    d_in.resize_like(n, d_out.channels, cache.in_h, cache.in_w);
    const int oh = d_out.height, ow = d_out.width;
    parallel_for(n, [&](int s, int) {
      Mat<S>& dx = d_in.maps[s];
      dx.setZero();
      const auto& am = cache.argmax[static_cast<std::size_t>(s)];
      for (int c = 0; c < d_out.channels; ++c) {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            int which = am(c, oy * ow + ox);
            int iy = 2 * oy + (which >> 1);
            int ix = 2 * ox + (which & 1);
            dx(c, iy * cache.in_w + ix) += d_out.maps[s](c, oy * ow + ox);
          }
        }
      }
    });
  }
};

// ---------------------------------------------------------------------------
// fully connected layer on column batches

template <typename S>
class Linear {
 public:
  void configure(const std::string& name, int in_features, int out_features) {
    in_ = in_features;
    out_ = out_features;
    weight_.init(name + ".weight", out_features, in_features);
    bias_.init(name + ".bias", out_features, 1);
  }

  void init_params(Rng& rng) {
    fanin_uniform_init(weight_.value, in_, rng);
    bias_.value.setZero();
  }

  void collect(ParamRefs<S>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  // x: (in, batch) -> (out, batch)
  Mat<S> forward(const Mat<S>& x) const {
    return (weight_.value * x).colwise() + bias_.value.col(0);
  }

  Mat<S> backward(const Mat<S>& x, const Mat<S>& d_out) {
    weight_.grad.noalias() += d_out * x.transpose();
    bias_.grad.col(0) += d_out.rowwise().sum();
    return weight_.value.transpose() * d_out;
  }

  int in_features() const { return in_; }
  int out_features() const { return out_; }

  Param<S> weight_, bias_;

 private:
  int in_ = 0, out_ = 0;
};

// ---------------------------------------------------------------------------
// gated recurrent unit, left-to-right, zero initial state; gate layout
// [reset; update; candidate]

template <typename S>
class Gru {
 public:
  struct StepCache {
    Vec<S> x, h_prev, r, z, n, ghn;
  };
  using SequenceCache = std::vector<StepCache>;

  void configure(const std::string& name, int input, int hidden) {
    input_ = input;
    hidden_ = hidden;
    wi_.init(name + ".wi", 3 * hidden, input);
    wh_.init(name + ".wh", 3 * hidden, hidden);
    bi_.init(name + ".bi", 3 * hidden, 1);
    bh_.init(name + ".bh", 3 * hidden, 1);
  }

  void init_params(Rng& rng) {
    fanin_uniform_init(wi_.value, input_, rng);
    for (int g = 0; g < 3; ++g)
      orthogonal_init<S>(wh_.value.block(g * hidden_, 0, hidden_, hidden_), rng);
    bi_.value.setZero();
    bh_.value.setZero();
  }

  void collect(ParamRefs<S>& out) {
    out.push_back(&wi_);
    out.push_back(&wh_);
    out.push_back(&bi_);
    out.push_back(&bh_);
  }

  int hidden_size() const { return hidden_; }
  int input_size() const { return input_; }

  // inputs: (input, steps); returns hidden state after the last step
  Vec<S> forward(const Mat<S>& inputs, SequenceCache* cache) const {
    Vec<S> h = Vec<S>::Zero(hidden_);
    if (cache) cache->clear();
    for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
      Vec<S> x = inputs.col(t);
      Vec<S> gi = wi_.value * x + bi_.value.col(0);
      Vec<S> gh = wh_.value * h + bh_.value.col(0);
      Vec<S> r(hidden_), z(hidden_), n(hidden_);
      for (int j = 0; j < hidden_; ++j) {
        r(j) = sigmoid(gi(j) + gh(j));
        z(j) = sigmoid(gi(hidden_ + j) + gh(hidden_ + j));
        n(j) = std::tanh(gi(2 * hidden_ + j) + r(j) * gh(2 * hidden_ + j));
      }
      Vec<S> h_next = (Vec<S>::Ones(hidden_) - z).cwiseProduct(n) + z.cwiseProduct(h);
      if (cache)
        cache->push_back({std::move(x), h, r, z, n, gh.segment(2 * hidden_, hidden_)});
      h = std::move(h_next);
    }
    return h;
  }

  // d_h: gradient at the final hidden state; returns gradients for inputs
  Mat<S> backward(const SequenceCache& cache, const Vec<S>& d_h_last) {
    const int steps = static_cast<int>(cache.size());
    Mat<S> d_inputs(input_, steps);
    Vec<S> dh = d_h_last;
    for (int t = steps - 1; t >= 0; --t) {
      const StepCache& c = cache[static_cast<std::size_t>(t)];
      Vec<S> dz = dh.cwiseProduct(c.h_prev - c.n);
      Vec<S> dn = dh.cwiseProduct(Vec<S>::Ones(hidden_) - c.z);
      Vec<S> dh_prev = dh.cwiseProduct(c.z);

      Vec<S> dn_pre = dn.cwiseProduct(
          (Vec<S>::Ones(hidden_) - c.n.cwiseProduct(c.n)));
      Vec<S> dr = dn_pre.cwiseProduct(c.ghn);
      Vec<S> dghn = dn_pre.cwiseProduct(c.r);
      Vec<S> dz_pre = dz.cwiseProduct(c.z).cwiseProduct(Vec<S>::Ones(hidden_) - c.z);
      Vec<S> dr_pre = dr.cwiseProduct(c.r).cwiseProduct(Vec<S>::Ones(hidden_) - c.r);

      Vec<S> dgi(3 * hidden_), dgh(3 * hidden_);
      dgi.segment(0, hidden_) = dr_pre;
      dgi.segment(hidden_, hidden_) = dz_pre;
      dgi.segment(2 * hidden_, hidden_) = dn_pre;
      dgh.segment(0, hidden_) = dr_pre;
      dgh.segment(hidden_, hidden_) = dz_pre;
      dgh.segment(2 * hidden_, hidden_) = dghn;

      wi_.grad.noalias() += dgi * c.x.transpose();
      wh_.grad.noalias() += dgh * c.h_prev.transpose();
      bi_.grad.col(0) += dgi;
      bh_.grad.col(0) += dgh;

      d_inputs.col(t) = wi_.value.transpose() * dgi;
      dh = dh_prev + wh_.value.transpose() * dgh;
    }
    return d_inputs;
  }

  Param<S> wi_, wh_, bi_, bh_;

 private:
  int input_ = 0, hidden_ = 0;
};

}  // namespace stretto::nn

#endif
