#include "stretto/cca.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <random>

using namespace stretto;

namespace {

MatF random_view(int n, int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<float> val(0.f, 1.f);
  MatF m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = val(gen);
  return m;
}

Eigen::MatrixXf random_rotation(int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<float> val(0.f, 1.f);
  Eigen::MatrixXf a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = val(gen);
  Eigen::HouseholderQR<Eigen::MatrixXf> qr(a);
  return qr.householderQ() * Eigen::MatrixXf::Identity(d, d);
}

// mean per-dimension Pearson correlation between two projected views
double mean_dim_correlation(const MatF& x, const MatF& y) {
  double acc = 0;
  for (int j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd a = x.col(j).cast<double>();
    Eigen::VectorXd b = y.col(j).cast<double>();
    a.array() -= a.mean();
    b.array() -= b.mean();
    double denom = std::sqrt(a.squaredNorm() * b.squaredNorm());
    if (denom > 0) acc += a.dot(b) / denom;
  }
  return acc / x.cols();
}

}  // namespace

TEST_CASE("identical views give canonical correlations near one") {
  MatF x = random_view(300, 6, 1);
  CcaProjection proj = fit_cca(x, x, 1e-8);
  REQUIRE(proj.correlations.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(proj.correlations(i) >= 0.999f);
}

TEST_CASE("a rotated view is recovered up to sign") {
  const int d = 8;
  MatF x = random_view(500, d, 2);
  Eigen::MatrixXf rot = random_rotation(d, 3);
  MatF y = x * rot;

  CcaProjection proj = fit_cca(x, y, 1e-8);
  for (int i = 0; i < d; ++i) CHECK(proj.correlations(i) >= 0.99f);

  // projections align the two views almost perfectly
  MatF px = apply_cca(x, CcaView::X, proj);
  MatF py = apply_cca(y, CcaView::Y, proj);
  CHECK(mean_dim_correlation(px, py) >= 0.99);
}

TEST_CASE("independent views show only spurious correlation") {
  MatF x = random_view(1000, 8, 4);
  MatF y = random_view(1000, 8, 5);
  CcaProjection proj = fit_cca(x, y, 1e-4);
  CHECK(proj.correlations(0) <= 0.2f);
}

TEST_CASE("correlations are sorted descending inside [0, 1]") {
  MatF x = random_view(400, 10, 6);
  MatF y = 0.5f * x + 0.8f * random_view(400, 10, 7);
  CcaProjection proj = fit_cca(x, y, 1e-4);
  for (int i = 0; i < proj.correlations.size(); ++i) {
    CHECK(proj.correlations(i) >= 0.0f);
    CHECK(proj.correlations(i) <= 1.0f);
    if (i > 0) CHECK(proj.correlations(i) <= proj.correlations(i - 1));
  }
  // full column rank projections
  Eigen::FullPivLU<Eigen::MatrixXf> lu(proj.proj_x);
  CHECK(lu.rank() == proj.proj_x.cols());
}

TEST_CASE("projection increases mean per-dimension correlation on fit data") {
  MatF x = random_view(600, 8, 8);
  MatF y = 0.6f * x + 0.9f * random_view(600, 8, 9);
  CcaProjection proj = fit_cca(x, y, 1e-4);
  double before = mean_dim_correlation(x, y);
  double after =
      mean_dim_correlation(apply_cca(x, CcaView::X, proj), apply_cca(y, CcaView::Y, proj));
  CHECK(after > before);
}

TEST_CASE("identity projection with zero means is a no-op") {
  CcaProjection proj;
  proj.mean_x = Eigen::VectorXf::Zero(4);
  proj.mean_y = Eigen::VectorXf::Zero(4);
  proj.proj_x = Eigen::MatrixXf::Identity(4, 4);
  proj.proj_y = Eigen::MatrixXf::Identity(4, 4);
  proj.correlations = Eigen::VectorXf::Ones(4);
  MatF x = random_view(5, 4, 10);
  MatF out = apply_cca(x, CcaView::X, proj);
  CHECK((out - x).cwiseAbs().maxCoeff() < 1e-7f);
}

TEST_CASE("cca input validation") {
  MatF x = random_view(6, 8, 11);  // N <= D
  CHECK_THROWS_AS(fit_cca(x, x, 1e-4), ArgumentError);
  MatF a = random_view(50, 4, 12), b = random_view(50, 4, 13);
  b(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(fit_cca(a, b, 1e-4), ArgumentError);
  MatF c = random_view(50, 3, 14);
  CHECK_THROWS_AS(fit_cca(a, c, 1e-4), ArgumentError);
  CHECK_THROWS_AS(apply_cca(c, CcaView::X,
                            fit_cca(a, b.cwiseAbs(), 1e-4)),
                  ArgumentError);
}

TEST_CASE("fit is deterministic") {
  MatF x = random_view(200, 5, 15);
  MatF y = random_view(200, 5, 16);
  CcaProjection a = fit_cca(x, y, 1e-4);
  CcaProjection b = fit_cca(x, y, 1e-4);
  CHECK((a.proj_x - b.proj_x).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((a.correlations - b.correlations).cwiseAbs().maxCoeff() == 0.0f);
}
