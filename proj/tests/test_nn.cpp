#include "stretto/nn.hpp"

#include "stretto/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace stretto;
using nn::FeatureStack;
using Mat = nn::Mat<double>;
using Vec = nn::Vec<double>;

namespace {

std::mt19937 g_gen(42);

double randn() {
  static std::normal_distribution<double> d(0.0, 1.0);
  return d(g_gen);
}

FeatureStack<double> random_stack(int n, int c, int h, int w) {
  FeatureStack<double> s;
  s.resize_like(n, c, h, w);
  for (auto& m : s.maps)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = randn();
  return s;
}

// fixed random weights turn a stack into a scalar so gradients can be
// checked with central differences
struct StackHead {
  std::vector<Mat> r;
  explicit StackHead(const FeatureStack<double>& like) {
    for (const auto& m : like.maps) {
      Mat w(m.rows(), m.cols());
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = randn();
      r.push_back(w);
    }
  }
  double value(const FeatureStack<double>& s) const {
    double acc = 0;
    for (std::size_t i = 0; i < s.maps.size(); ++i)
      acc += (s.maps[i].array() * r[i].array()).sum();
    return acc;
  }
  FeatureStack<double> grad(const FeatureStack<double>& like) const {
    FeatureStack<double> g = like;
    for (std::size_t i = 0; i < g.maps.size(); ++i) g.maps[i] = r[i];
    return g;
  }
};

constexpr double kStep = 1e-6;
constexpr double kTol = 1e-6;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("conv2d forward matches direct convolution and backward matches FD") {
  nn::Conv2d<double> conv;
  conv.configure("c", 2, 3, 3);
  Rng rng(7, "init");
  conv.init_params(rng);

  FeatureStack<double> x = random_stack(2, 2, 5, 4);
  FeatureStack<double> y;
  conv.forward(x, y);
  REQUIRE(y.channels == 3);
  REQUIRE(y.height == 5);
  REQUIRE(y.width == 4);

  // direct correlation oracle at a few positions
  for (int s = 0; s < 2; ++s)
    for (int oc = 0; oc < 3; ++oc)
      for (int yy : {0, 2, 4})
        for (int xx : {0, 3}) {
          double acc = 0;
          for (int ic = 0; ic < 2; ++ic)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                int sy = yy + ky - 1, sx = xx + kx - 1;
                if (sy < 0 || sy >= 5 || sx < 0 || sx >= 4) continue;
                acc += conv.weight_.value(oc, (ic * 3 + ky) * 3 + kx) *
                       x.maps[static_cast<std::size_t>(s)](ic, sy * 4 + sx);
              }
          CHECK(rel_err(acc, y.maps[static_cast<std::size_t>(s)](oc, yy * 4 + xx)) < 1e-12);
        }

  StackHead head(y);
  FeatureStack<double> dx;
  conv.weight_.zero_grad();
  conv.backward(x, head.grad(y), dx);

  // weight gradients
  for (Eigen::Index i = 0; i < conv.weight_.value.size(); ++i) {
    double orig = conv.weight_.value.data()[i];
    conv.weight_.value.data()[i] = orig + kStep;
    FeatureStack<double> yp;
    conv.forward(x, yp);
    double fp = head.value(yp);
    conv.weight_.value.data()[i] = orig - kStep;
    conv.forward(x, yp);
    double fm = head.value(yp);
    conv.weight_.value.data()[i] = orig;
    CHECK(rel_err(conv.weight_.grad.data()[i], (fp - fm) / (2 * kStep)) < kTol);
  }
  // input gradients (a sample)
  for (int s = 0; s < 2; ++s)
    for (Eigen::Index i = 0; i < 10; ++i) {
      double orig = x.maps[static_cast<std::size_t>(s)].data()[i];
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig + kStep;
      FeatureStack<double> yp;
      conv.forward(x, yp);
      double fp = head.value(yp);
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig - kStep;
      conv.forward(x, yp);
      double fm = head.value(yp);
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig;
      CHECK(rel_err(dx.maps[static_cast<std::size_t>(s)].data()[i],
                    (fp - fm) / (2 * kStep)) < kTol);
    }
}

TEST_CASE("1x1 conv backward matches FD") {
  nn::Conv2d<double> conv;
  conv.configure("c", 3, 2, 1);
  Rng rng(9, "init");
  conv.init_params(rng);
  FeatureStack<double> x = random_stack(1, 3, 4, 3);
  FeatureStack<double> y;
  conv.forward(x, y);
  StackHead head(y);
  FeatureStack<double> dx;
  conv.weight_.zero_grad();
  conv.backward(x, head.grad(y), dx);
  for (Eigen::Index i = 0; i < conv.weight_.value.size(); ++i) {
    double orig = conv.weight_.value.data()[i];
    conv.weight_.value.data()[i] = orig + kStep;
    FeatureStack<double> yp;
    conv.forward(x, yp);
    double fp = head.value(yp);
    conv.weight_.value.data()[i] = orig - kStep;
    conv.forward(x, yp);
    double fm = head.value(yp);
    conv.weight_.value.data()[i] = orig;
    CHECK(rel_err(conv.weight_.grad.data()[i], (fp - fm) / (2 * kStep)) < kTol);
  }
}

TEST_CASE("batch norm: training statistics, running stats, and FD gradients") {
  nn::BatchNorm2d<double> bn;
  bn.configure("b", 3, 0.9, 1e-5);
  bn.gamma_.value.col(0) << 1.3, 0.7, 1.1;
  bn.beta_.value.col(0) << 0.1, -0.2, 0.4;

  FeatureStack<double> x = random_stack(3, 3, 4, 2);

  nn::BatchNorm2d<double>::Cache cache;
  FeatureStack<double> y;
  bn.forward(x, y, true, &cache);

  // per-channel batch statistics of xhat are 0 / 1
  for (int c = 0; c < 3; ++c) {
    double sum = 0, sq = 0;
    int count = 0;
    for (const auto& m : cache.xhat.maps) {
      sum += m.row(c).sum();
      sq += m.row(c).array().square().sum();
      count += static_cast<int>(m.cols());
    }
    double mean = sum / count;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(sq / count - 1.0) < 1e-4);  // eps shifts variance slightly
  }

  StackHead head(y);
  FeatureStack<double> dx;
  bn.gamma_.zero_grad();
  bn.beta_.zero_grad();
  bn.backward(cache, head.grad(y), dx);

  auto loss_of = [&]() {
    FeatureStack<double> out;
    bn.forward(x, out, true, nullptr, /*update_running=*/false);
    return head.value(out);
  };
  for (int c = 0; c < 3; ++c) {
    double orig = bn.gamma_.value(c, 0);
    bn.gamma_.value(c, 0) = orig + kStep;
    double fp = loss_of();
    bn.gamma_.value(c, 0) = orig - kStep;
    double fm = loss_of();
    bn.gamma_.value(c, 0) = orig;
    CHECK(rel_err(bn.gamma_.grad(c, 0), (fp - fm) / (2 * kStep)) < kTol);

    orig = bn.beta_.value(c, 0);
    bn.beta_.value(c, 0) = orig + kStep;
    fp = loss_of();
    bn.beta_.value(c, 0) = orig - kStep;
    fm = loss_of();
    bn.beta_.value(c, 0) = orig;
    CHECK(rel_err(bn.beta_.grad(c, 0), (fp - fm) / (2 * kStep)) < kTol);
  }
  for (int s = 0; s < 3; ++s)
    for (Eigen::Index i = 0; i < 8; ++i) {
      double orig = x.maps[static_cast<std::size_t>(s)].data()[i];
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig + kStep;
      double fp = loss_of();
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig - kStep;
      double fm = loss_of();
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig;
      CHECK(rel_err(dx.maps[static_cast<std::size_t>(s)].data()[i],
                    (fp - fm) / (2 * kStep)) < kTol);
    }

  SUBCASE("inference mode uses running statistics") {
    FeatureStack<double> y1, y2;
    bn.forward(x, y1, false, nullptr);
    bn.forward(x, y2, false, nullptr);
    CHECK((y1.maps[0] - y2.maps[0]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("max pooling halves dimensions with floor and routes gradients") {
  FeatureStack<double> x = random_stack(2, 2, 5, 7);
  FeatureStack<double> y;
  nn::MaxPool2<double>::Cache cache;
  nn::MaxPool2<double>::forward(x, y, &cache);
  REQUIRE(y.height == 2);
  REQUIRE(y.width == 3);

  for (int s = 0; s < 2; ++s)
    for (int c = 0; c < 2; ++c)
      for (int oy = 0; oy < 2; ++oy)
        for (int ox = 0; ox < 3; ++ox) {
          double expected = std::max(
              std::max(x.maps[static_cast<std::size_t>(s)](c, 2 * oy * 7 + 2 * ox),
                       x.maps[static_cast<std::size_t>(s)](c, 2 * oy * 7 + 2 * ox + 1)),
              std::max(x.maps[static_cast<std::size_t>(s)](c, (2 * oy + 1) * 7 + 2 * ox),
                       x.maps[static_cast<std::size_t>(s)](c, (2 * oy + 1) * 7 + 2 * ox + 1)));
          CHECK(y.maps[static_cast<std::size_t>(s)](c, oy * 3 + ox) == expected);
        }

  StackHead head(y);
  FeatureStack<double> dx;
  nn::MaxPool2<double>::backward(cache, head.grad(y), dx);
  for (int s = 0; s < 2; ++s)
    for (Eigen::Index i = 0; i < 20; ++i) {
      double orig = x.maps[static_cast<std::size_t>(s)].data()[i];
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig + kStep;
      FeatureStack<double> yp;
      nn::MaxPool2<double>::forward(x, yp, nullptr);
      double fp = head.value(yp);
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig - kStep;
      nn::MaxPool2<double>::forward(x, yp, nullptr);
      double fm = head.value(yp);
      x.maps[static_cast<std::size_t>(s)].data()[i] = orig;
      CHECK(rel_err(dx.maps[static_cast<std::size_t>(s)].data()[i],
                    (fp - fm) / (2 * kStep)) < kTol);
    }
}

TEST_CASE("gru step semantics and FD gradients") {
  nn::Gru<double> gru;
  gru.configure("g", 3, 4);
  Rng rng(13, "init");
  gru.init_params(rng);

  Mat inputs(3, 5);
  for (Eigen::Index i = 0; i < inputs.size(); ++i) inputs.data()[i] = randn();

  SUBCASE("length-1 sequence equals one step from the zero state") {
    Vec h1 = gru.forward(inputs.leftCols(1), nullptr);
    // manual single step
    Vec gi = gru.wi_.value * inputs.col(0) + gru.bi_.value.col(0);
    Vec gh = gru.bh_.value.col(0);  // h = 0
    Vec manual(4);
    for (int j = 0; j < 4; ++j) {
      double r = 1.0 / (1.0 + std::exp(-(gi(j) + gh(j))));
      double z = 1.0 / (1.0 + std::exp(-(gi(4 + j) + gh(4 + j))));
      double n = std::tanh(gi(8 + j) + r * gh(8 + j));
      manual(j) = (1 - z) * n;  // + z*0
    }
    CHECK((h1 - manual).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("permuting the input order changes the context vector") {
    Vec h = gru.forward(inputs, nullptr);
    Mat permuted = inputs;
    permuted.col(0).swap(permuted.col(4));
    Vec hp = gru.forward(permuted, nullptr);
    CHECK((h - hp).cwiseAbs().maxCoeff() > 1e-6);
  }

  SUBCASE("parameter and input gradients match FD") {
    Vec r(4);
    for (int i = 0; i < 4; ++i) r(i) = randn();

    nn::Gru<double>::SequenceCache cache;
    Vec h = gru.forward(inputs, &cache);
    for (auto* p : std::vector<nn::Param<double>*>{&gru.wi_, &gru.wh_, &gru.bi_, &gru.bh_})
      p->zero_grad();
    Mat d_in = gru.backward(cache, r);

    auto loss_of = [&]() { return r.dot(gru.forward(inputs, nullptr)); };

    nn::ParamRefs<double> params;
    gru.collect(params);
    for (auto* p : params) {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) {
        double orig = p->value.data()[i];
        p->value.data()[i] = orig + kStep;
        double fp = loss_of();
        p->value.data()[i] = orig - kStep;
        double fm = loss_of();
        p->value.data()[i] = orig;
        CHECK(rel_err(p->grad.data()[i], (fp - fm) / (2 * kStep)) < kTol);
      }
    }
    for (Eigen::Index i = 0; i < inputs.size(); ++i) {
      double orig = inputs.data()[i];
      inputs.data()[i] = orig + kStep;
      double fp = loss_of();
      inputs.data()[i] = orig - kStep;
      double fm = loss_of();
      inputs.data()[i] = orig;
      CHECK(rel_err(d_in.data()[i], (fp - fm) / (2 * kStep)) < kTol);
    }
  }
}

TEST_CASE("linear layer gradients match FD") {
  nn::Linear<double> lin;
  lin.configure("l", 4, 3);
  Rng rng(5, "init");
  lin.init_params(rng);
  Mat x(4, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = randn();
  Mat r(3, 6);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = randn();

  Mat y = lin.forward(x);
  lin.weight_.zero_grad();
  lin.bias_.zero_grad();
  Mat dx = lin.backward(x, r);

  auto loss_of = [&]() { return (lin.forward(x).array() * r.array()).sum(); };
  nn::ParamRefs<double> params;
  lin.collect(params);
  for (auto* p : params)
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double orig = p->value.data()[i];
      p->value.data()[i] = orig + kStep;
      double fp = loss_of();
      p->value.data()[i] = orig - kStep;
      double fm = loss_of();
      p->value.data()[i] = orig;
      CHECK(rel_err(p->grad.data()[i], (fp - fm) / (2 * kStep)) < kTol);
    }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double orig = x.data()[i];
    x.data()[i] = orig + kStep;
    double fp = loss_of();
    x.data()[i] = orig - kStep;
    double fm = loss_of();
    x.data()[i] = orig;
    CHECK(rel_err(dx.data()[i], (fp - fm) / (2 * kStep)) < kTol);
  }
}

TEST_CASE("orthogonal init produces orthonormal columns") {
  Mat w(6, 6);
  Rng rng(21, "orth");
  nn::orthogonal_init<double>(w, rng);
  Mat gram = w.transpose() * w;
  CHECK((gram - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("layer results do not depend on the thread count") {
  nn::Conv2d<float> conv;
  conv.configure("c", 3, 8, 3);
  Rng rng(3, "init");
  conv.init_params(rng);
  nn::FeatureStack<float> x;
  x.resize_like(9, 3, 20, 18);
  std::mt19937 gen(8);
  std::normal_distribution<float> d(0.f, 1.f);
  for (auto& m : x.maps)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(gen);

  set_num_threads(1);
  nn::FeatureStack<float> y1;
  conv.forward(x, y1);
  set_num_threads(4);
  nn::FeatureStack<float> y2;
  conv.forward(x, y2);
  set_num_threads(1);
  for (std::size_t s = 0; s < x.maps.size(); ++s)
    CHECK((y1.maps[s].array() == y2.maps[s].array()).all());
}
