#include "stretto/loss.hpp"

#include "stretto/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace stretto;
using Mat = nn::Mat<double>;
using Vec = nn::Vec<double>;

namespace {

// scalar double-loop reference: no Eigen reductions, no vectorized paths
double cosine_oracle(const Vec& u, const Vec& v) {
  double dot = 0, nu = 0, nv = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    dot += u(i) * v(i);
    nu += u(i) * u(i);
    nv += v(i) * v(i);
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return 1.0 - dot / (nu * nv);
}

double triplet_oracle(const Mat& x, const Mat& y, double alpha,
                      const NegativeLists* negatives) {
  const Eigen::Index b = x.rows();
  double loss = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    auto negs_of = [&](Eigen::Index anchor) {
      std::vector<Eigen::Index> out;
      if (negatives) {
        for (int k : (*negatives)[static_cast<std::size_t>(anchor)])
          out.push_back(k);
      } else {
        for (Eigen::Index k = 0; k < b; ++k)
          if (k != anchor) out.push_back(k);
      }
      return out;
    };
    // x anchor, y negatives
    for (Eigen::Index k : negs_of(i)) {
      double term = alpha + cosine_oracle(x.row(i).transpose(), y.row(i).transpose()) -
                    cosine_oracle(x.row(i).transpose(), y.row(k).transpose());
      if (term > 0) loss += term;
    }
    // y anchor, x negatives
    for (Eigen::Index k : negs_of(i)) {
      double term = alpha + cosine_oracle(y.row(i).transpose(), x.row(i).transpose()) -
                    cosine_oracle(y.row(i).transpose(), x.row(k).transpose());
      if (term > 0) loss += term;
    }
  }
  return loss;
}

}  // namespace

TEST_CASE("cosine distance basics") {
  Vec v(3);
  v << 1, 2, 3;
  CHECK(cosine_distance<double>(v, v) == doctest::Approx(0.0));
  Vec e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(cosine_distance<double>(e1, e2) == doctest::Approx(1.0));
  Vec neg = -v;
  CHECK(cosine_distance<double>(v, neg) == doctest::Approx(2.0));
  // scale invariance for positive scalings
  Vec w(3);
  w << -2, 1, 0.5;
  CHECK(cosine_distance<double>(v, w) ==
        doctest::Approx(cosine_distance<double>((3.7 * v).eval(), (0.2 * w).eval())));
  // zero vector convention
  Vec z = Vec::Zero(3);
  CHECK(cosine_distance<double>(z, v) == 1.0);
}

TEST_CASE("loss is zero when every negative clears the margin") {
  // x == y rows orthogonal to each other: d(pos)=0, d(neg)=1, alpha=0.5
  Mat x = Mat::Identity(4, 4);
  Mat y = x;
  auto out = triplet_loss<double>(x, y, 0.5);
  CHECK(out.loss == doctest::Approx(0.0));
  CHECK(out.active_terms == 0);
}

TEST_CASE("two-pair arithmetic example") {
  // engineered so d(pos)=0.6 and d(neg)=0.4 in every direction:
  // cos(pos)=0.4, cos(neg)=0.6
  double c = 0.4, cn = 0.6;
  // vectors on the unit circle: x_i = (1,0) rotated appropriately
  auto unit = [](double angle) {
    Vec v(2);
    v << std::cos(angle), std::sin(angle);
    return v;
  };
  double a_pos = std::acos(c), a_neg = std::acos(cn);
  Mat x(2, 2), y(2, 2);
  // angles chosen so every matching pair sits at distance 0.6 and every
  // non-matching pair at 0.4: x0=0, y0=a_pos, y1=-a_neg, x1=a_pos-a_neg
  x.row(0) = unit(0.0).transpose();
  y.row(0) = unit(a_pos).transpose();
  x.row(1) = unit(a_pos - a_neg).transpose();
  y.row(1) = unit(-a_neg).transpose();
  // verify construction
  CHECK(cosine_oracle(x.row(0).transpose(), y.row(0).transpose()) ==
        doctest::Approx(0.6));
  CHECK(cosine_oracle(x.row(0).transpose(), y.row(1).transpose()) ==
        doctest::Approx(0.4));
  CHECK(cosine_oracle(x.row(1).transpose(), y.row(1).transpose()) ==
        doctest::Approx(0.6).epsilon(1e-6));
  CHECK(cosine_oracle(x.row(1).transpose(), y.row(0).transpose()) ==
        doctest::Approx(0.4).epsilon(1e-6));

  // with alpha=0.2 each active anchor term is 0.2+0.6-0.4=0.4, so one
  // direction sums to 0.8 and the symmetrized loss doubles it
  auto out = triplet_loss<double>(x, y, 0.2);
  double oracle = triplet_oracle(x, y, 0.2, nullptr);
  CHECK(out.loss == doctest::Approx(oracle));
  CHECK(out.loss == doctest::Approx(2 * 0.8));
}

TEST_CASE("vectorized loss equals the double-loop oracle on random batches") {
  std::mt19937 gen(99);
  std::uniform_int_distribution<int> b_d(2, 16), d_d(2, 64);
  std::normal_distribution<double> val(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    int b = b_d(gen), d = d_d(gen);
    Mat x(b, d), y(b, d);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < d; ++j) {
        x(i, j) = val(gen);
        y(i, j) = val(gen);
      }
    double alpha = 0.1 + 0.8 * std::abs(val(gen));
    auto out = triplet_loss<double>(x, y, alpha);
    CHECK(std::abs(out.loss - triplet_oracle(x, y, alpha, nullptr)) < 1e-6);
  }
}

TEST_CASE("explicit negative subsets agree with the oracle") {
  std::mt19937 gen(7);
  std::normal_distribution<double> val(0.0, 1.0);
  Rng rng(5, "test-negs");
  for (int trial = 0; trial < 20; ++trial) {
    int b = 6, d = 8;
    Mat x(b, d), y(b, d);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < d; ++j) {
        x(i, j) = val(gen);
        y(i, j) = val(gen);
      }
    NegativeLists negs = sample_negatives(b, 3, rng);
    for (const auto& l : negs) CHECK(l.size() == 3);
    auto out = triplet_loss<double>(x, y, 0.5, negs);
    CHECK(std::abs(out.loss - triplet_oracle(x, y, 0.5, &negs)) < 1e-9);
  }
}

TEST_CASE("loss is invariant to positive rescaling of single embeddings") {
  std::mt19937 gen(3);
  std::normal_distribution<double> val(0.0, 1.0);
  Mat x(5, 6), y(5, 6);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j) {
      x(i, j) = val(gen);
      y(i, j) = val(gen);
    }
  auto base = triplet_loss<double>(x, y, 0.7);
  Mat xs = x;
  xs.row(2) *= 41.0;
  Mat ys = y;
  ys.row(4) *= 0.003;
  CHECK(triplet_loss<double>(xs, y, 0.7).loss == doctest::Approx(base.loss));
  CHECK(triplet_loss<double>(x, ys, 0.7).loss == doctest::Approx(base.loss));
}

TEST_CASE("analytic loss gradients match central finite differences") {
  std::mt19937 gen(11);
  std::normal_distribution<double> val(0.0, 1.0);
  int b = 4, d = 5;
  Mat x(b, d), y(b, d);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < d; ++j) {
      x(i, j) = val(gen);
      y(i, j) = val(gen);
    }
  double alpha = 0.9;  // large margin keeps hinges strictly active
  auto out = triplet_loss<double>(x, y, alpha, std::nullopt, true);

  const double h = 1e-6;
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < d; ++j) {
      Mat xp = x, xm = x;
      xp(i, j) += h;
      xm(i, j) -= h;
      double fd = (triplet_loss<double>(xp, y, alpha).loss -
                   triplet_loss<double>(xm, y, alpha).loss) /
                  (2 * h);
      CHECK(out.dx(i, j) == doctest::Approx(fd).epsilon(1e-5));

      Mat yp = y, ym = y;
      yp(i, j) += h;
      ym(i, j) -= h;
      fd = (triplet_loss<double>(x, yp, alpha).loss -
            triplet_loss<double>(x, ym, alpha).loss) /
           (2 * h);
      CHECK(out.dy(i, j) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("zero-norm rows fall back to d=1 with zero gradient") {
  Mat x = Mat::Zero(2, 3), y(2, 3);
  y << 1, 0, 0, 0, 1, 0;
  x.row(1) << 0, 1, 0;
  auto out = triplet_loss<double>(x, y, 0.5, std::nullopt, true);
  CHECK(out.zero_norm_rows == 1);
  CHECK(std::isfinite(out.loss));
  CHECK(out.dx.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate batches are rejected") {
  Mat x = Mat::Random(1, 4), y = Mat::Random(1, 4);
  CHECK_THROWS_AS(triplet_loss<double>(x, y, 0.5), ArgumentError);
  Mat y2 = Mat::Random(2, 3);
  Mat x2 = Mat::Random(2, 4);
  CHECK_THROWS_AS(triplet_loss<double>(x2, y2, 0.5), ArgumentError);
  Mat x3 = Mat::Random(3, 4), y3 = Mat::Random(3, 4);
  CHECK_THROWS_AS(triplet_loss<double>(x3, y3, 0.0), ArgumentError);
}
