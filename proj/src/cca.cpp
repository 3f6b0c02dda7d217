#include "stretto/cca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace stretto {

namespace {

Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(1e-12);
  return eig.eigenvectors() * vals.cwiseInverse().cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

CcaProjection fit_cca(const MatF& x, const MatF& y, double regularization) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (y.rows() != n || y.cols() != d)
    throw ArgumentError("cca: view shapes differ");
  if (regularization < 0.0) throw ArgumentError("cca: regularization must be >= 0");
  if (n <= d) throw ArgumentError("cca: need more samples than dimensions");
  if (!x.allFinite() || !y.allFinite())
    throw ArgumentError("cca: inputs must be finite");

  Eigen::MatrixXd xd = x.cast<double>(), yd = y.cast<double>();
  Eigen::RowVectorXd mx = xd.colwise().mean(), my = yd.colwise().mean();
  xd.rowwise() -= mx;
  yd.rowwise() -= my;

  const double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd sxx = xd.transpose() * xd / denom +
                        regularization * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd syy = yd.transpose() * yd / denom +
                        regularization * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd sxy = xd.transpose() * yd / denom;

  Eigen::MatrixXd wx = inv_sqrt_sym(sxx);
  Eigen::MatrixXd wy = inv_sqrt_sym(syy);
  Eigen::MatrixXd t = wx * sxy * wy;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU(), v = svd.matrixV();

  // deterministic sign: the largest-magnitude entry of each left singular
  // vector is made positive
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index imax = 0;
    u.col(c).cwiseAbs().maxCoeff(&imax);
    if (u(imax, c) < 0) {
      u.col(c) = -u.col(c);
      v.col(c) = -v.col(c);
    }
  }

  CcaProjection proj;
  proj.mean_x = mx.transpose().cast<float>();
  proj.mean_y = my.transpose().cast<float>();
  proj.proj_x = (wx * u).cast<float>();
  proj.proj_y = (wy * v).cast<float>();
  proj.correlations = svd.singularValues()
                          .cwiseMax(0.0)
                          .cwiseMin(1.0)
                          .cast<float>();
  return proj;
}

MatF apply_cca(const MatF& embs, CcaView view, const CcaProjection& proj) {
  const Eigen::MatrixXf& p = view == CcaView::X ? proj.proj_x : proj.proj_y;
  const Eigen::VectorXf& mean = view == CcaView::X ? proj.mean_x : proj.mean_y;
  if (embs.cols() != p.rows())
    throw ArgumentError("cca: embedding dimension does not match projection");
  MatF centered = embs;
  centered.rowwise() -= mean.transpose();
  return centered * p;
}

}  // namespace stretto
