#ifndef STRETTO_LOSS_HPP
#define STRETTO_LOSS_HPP

#include "stretto/common.hpp"
#include "stretto/nn.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace stretto {

// Count of zero-norm embeddings met by cosine computations since process
// start; each occurrence falls back to the d = 1 convention.
std::uint64_t zero_norm_count();
void note_zero_norm();

// 1 - cos(u, v), in [0, 2]; zero vectors give 1 by convention.
template <typename S>
S cosine_distance(const nn::Vec<S>& u, const nn::Vec<S>& v) {
  if (u.size() != v.size()) throw ArgumentError("cosine: dimension mismatch");
  S nu = u.norm(), nv = v.norm();
  if (nu == S(0) || nv == S(0)) {
    note_zero_norm();
    return S(1);
  }
  return S(1) - u.dot(v) / (nu * nv);
}

// Per-anchor negative index lists; empty optional selects all in-batch
// non-matching items (K = B - 1).
using NegativeLists = std::vector<std::vector<int>>;

template <typename S>
struct TripletLossValue {
  S loss = S(0);
  nn::Mat<S> dx, dy;       // (B, D) gradients, allocated on demand
  int active_terms = 0;
  int zero_norm_rows = 0;
};

// In-batch margin loss under cosine distance; summed over both retrieval
// directions (x anchors against y negatives and the transpose). Rows i of
// x and y are the matching pairs.
template <typename S>
TripletLossValue<S> triplet_loss(const nn::Mat<S>& x, const nn::Mat<S>& y,
                                 S alpha,
                                 const std::optional<NegativeLists>& negatives =
                                     std::nullopt,
                                 bool with_grad = false) {
  const Eigen::Index b = x.rows(), d = x.cols();
  if (y.rows() != b || y.cols() != d)
    throw ArgumentError("triplet loss: embedding shapes differ");
  if (b < 2) throw ArgumentError("triplet loss needs at least two pairs");
  if (alpha <= S(0)) throw ArgumentError("margin must be positive");
  if (negatives && static_cast<Eigen::Index>(negatives->size()) != b)
    throw ArgumentError("negative lists must cover every anchor");

  TripletLossValue<S> out;

  nn::Vec<S> nx(b), ny(b);
  nn::Mat<S> xh = x, yh = y;
  for (Eigen::Index i = 0; i < b; ++i) {
    nx(i) = x.row(i).norm();
    ny(i) = y.row(i).norm();
    if (nx(i) > S(0)) xh.row(i) /= nx(i); else { xh.row(i).setZero(); ++out.zero_norm_rows; }
    if (ny(i) > S(0)) yh.row(i) /= ny(i); else { yh.row(i).setZero(); ++out.zero_norm_rows; }
  }
  if (out.zero_norm_rows > 0) note_zero_norm();

  nn::Mat<S> cos = xh * yh.transpose();       // (B, B)
  nn::Mat<S> dist = nn::Mat<S>::Ones(b, b) - cos;

  // dL/d(dist); filled by both directions, then pushed through the cosine
  nn::Mat<S> ddist = nn::Mat<S>::Zero(b, b);

  auto run_direction = [&](bool x_anchors) {
    for (Eigen::Index i = 0; i < b; ++i) {
      S pos = dist(i, i);
      auto handle = [&](Eigen::Index k) {
        if (k == i) return;
        S neg = x_anchors ? dist(i, k) : dist(k, i);
        S term = alpha + pos - neg;
        if (term > S(0)) {
          out.loss += term;
          ++out.active_terms;
          ddist(i, i) += S(1);
          if (x_anchors) ddist(i, k) -= S(1); else ddist(k, i) -= S(1);
        }
      };
      if (negatives) {
        for (int k : (*negatives)[static_cast<std::size_t>(i)])
          handle(static_cast<Eigen::Index>(k));
      } else {
        for (Eigen::Index k = 0; k < b; ++k) handle(k);
      }
    }
  };
  run_direction(true);
  run_direction(false);

  if (with_grad) {
    nn::Mat<S> dcos = -ddist;
    nn::Mat<S> dxh = dcos * yh;              // (B, D)
    nn::Mat<S> dyh = dcos.transpose() * xh;  // (B, D)
    out.dx = nn::Mat<S>::Zero(b, d);
    out.dy = nn::Mat<S>::Zero(b, d);
    for (Eigen::Index i = 0; i < b; ++i) {
      if (nx(i) > S(0))
        out.dx.row(i) =
            (dxh.row(i) - dxh.row(i).dot(xh.row(i)) * xh.row(i)) / nx(i);
      if (ny(i) > S(0))
        out.dy.row(i) =
            (dyh.row(i) - dyh.row(i).dot(yh.row(i)) * yh.row(i)) / ny(i);
    }
  }
  return out;
}

// Seeded choice of K distinct in-batch negatives per anchor.
NegativeLists sample_negatives(int batch, int k, Rng& rng);

}  // namespace stretto

#endif
