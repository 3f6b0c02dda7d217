#ifndef STRETTO_CCA_HPP
#define STRETTO_CCA_HPP

#include "stretto/common.hpp"

#include <Eigen/Dense>

namespace stretto {

// Classical linear CCA fitted post-training: per-view means, projection
// matrices, and the canonical correlations (sorted descending, in [0,1]).
struct CcaProjection {
  Eigen::VectorXf mean_x, mean_y;      // (D)
  Eigen::MatrixXf proj_x, proj_y;      // (D, D')
  Eigen::VectorXf correlations;        // (D')

  int in_dim() const { return static_cast<int>(mean_x.size()); }
  int out_dim() const { return static_cast<int>(correlations.size()); }
};

enum class CcaView { X, Y };

// x, y: (N, D) row-per-sample views with matching rows. Requires N > D.
CcaProjection fit_cca(const MatF& x, const MatF& y, double regularization = 1e-4);

// (emb - mean) * proj for the given view; embs is (N, D).
MatF apply_cca(const MatF& embs, CcaView view, const CcaProjection& proj);

}  // namespace stretto

#endif
