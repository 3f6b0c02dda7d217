#ifndef STRETTO_TESTS_GRADCHECK_HPP
#define STRETTO_TESTS_GRADCHECK_HPP

// Full-model gradient verification for the tiny double-precision model:
// analytic backprop through both towers and the triplet loss against
// central finite differences.

#include "stretto/loss.hpp"
#include "stretto/model.hpp"
#include "stretto/model_impl.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace stretto::testing {

struct GradCheckReport {
  int total = 0;
  int within_tight = 0;   // rel err <= tight
  double max_rel_err = 0.0;
  std::string worst_param;

  double fraction_tight() const {
    return total == 0 ? 1.0 : static_cast<double>(within_tight) / total;
  }
};

struct GradCheckSetup {
  PassageModel<double> model;
  nn::FeatureStack<double> sheet_stack, audio_stack;
  std::vector<int> sheet_lens, audio_lens;
  // margin above 2 keeps every hinge term strictly active (cosine distances
  // lie in [0,2]), so the loss is smooth wherever the check perturbs it
  double margin = 2.5;
};

inline GradCheckSetup make_gradcheck_setup(std::uint64_t seed) {
  GradCheckSetup s;
  s.model.configure(tiny_encoder_arch(Modality::Sheet),
                    tiny_encoder_arch(Modality::Audio), /*hidden=*/4,
                    /*embed_dim=*/3);
  s.model.init_params(seed);

  std::mt19937 gen(static_cast<unsigned>(seed * 977 + 13));
  std::normal_distribution<double> d(0.0, 1.0);
  auto fill = [&](nn::FeatureStack<double>& st, int n, int h, int w) {
    st.resize_like(n, 1, h, w);
    for (auto& m : st.maps)
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(gen);
  };
  // 2 pairs: sheet lengths {1, 2}, audio lengths {2, 1}
  const auto& sa = s.model.sheet.arch();
  const auto& aa = s.model.audio.arch();
  fill(s.sheet_stack, 3, sa.input_h(), sa.input_w());
  fill(s.audio_stack, 3, aa.input_h(), aa.input_w());
  s.sheet_lens = {1, 2};
  s.audio_lens = {2, 1};
  return s;
}

inline double gradcheck_loss(GradCheckSetup& s) {
  nn::Mat<double> x =
      s.model.sheet.forward(s.sheet_stack, s.sheet_lens, true, nullptr);
  nn::Mat<double> y =
      s.model.audio.forward(s.audio_stack, s.audio_lens, true, nullptr);
  nn::Mat<double> xr = x.transpose(), yr = y.transpose();
  return triplet_loss<double>(xr, yr, s.margin).loss;
}

// step: central-difference step; tight/loose: relative error thresholds
inline GradCheckReport run_gradcheck(GradCheckSetup& s, double step = 1e-5,
                                     double tight = 1e-4, int max_params = 0) {
  // analytic gradients
  for (auto* p : s.model.parameters()) p->zero_grad();
  PassageTower<double>::Cache sheet_cache, audio_cache;
  nn::Mat<double> x =
      s.model.sheet.forward(s.sheet_stack, s.sheet_lens, true, &sheet_cache);
  nn::Mat<double> y =
      s.model.audio.forward(s.audio_stack, s.audio_lens, true, &audio_cache);
  nn::Mat<double> xr = x.transpose(), yr = y.transpose();
  auto loss = triplet_loss<double>(xr, yr, s.margin, std::nullopt, true);
  s.model.sheet.backward(sheet_cache, loss.dx.transpose());
  s.model.audio.backward(audio_cache, loss.dy.transpose());

  GradCheckReport rep;
  for (auto* p : s.model.parameters()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      if (max_params > 0 && rep.total >= max_params) return rep;
      double orig = p->value.data()[i];
      p->value.data()[i] = orig + step;
      double fp = gradcheck_loss(s);
      p->value.data()[i] = orig - step;
      double fm = gradcheck_loss(s);
      p->value.data()[i] = orig;
      double fd = (fp - fm) / (2 * step);
      double analytic = p->grad.data()[i];
      double rel = std::abs(analytic - fd) /
                   std::max({1e-6, std::abs(analytic), std::abs(fd)});
      ++rep.total;
      if (rel <= tight) ++rep.within_tight;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_param = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return rep;
}

}  // namespace stretto::testing

#endif
