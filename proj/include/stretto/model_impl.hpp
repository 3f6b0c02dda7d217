#ifndef STRETTO_MODEL_IMPL_HPP
#define STRETTO_MODEL_IMPL_HPP

#include "stretto/model.hpp"

namespace stretto {

// ---------------------------------------------------------------------------
// SnippetEncoder

template <typename S>
void SnippetEncoder<S>::configure(const std::string& name, const EncoderArch& arch) {
  arch_ = arch;
  int in_c = 1;
  for (int b = 0; b < 4; ++b) {
    int out_c = arch.block_channels[static_cast<std::size_t>(b)];
    for (int j = 0; j < 2; ++j) {
      int u = 2 * b + j;
      conv_[static_cast<std::size_t>(u)].configure(
          name + ".conv" + std::to_string(u), j == 0 ? in_c : out_c, out_c, 3);
      bn_[static_cast<std::size_t>(u)].configure(name + ".bn" + std::to_string(u),
                                                 out_c);
    }
    in_c = out_c;
  }
  conv_[8].configure(name + ".conv8", in_c, arch.trunk_maps, 1);
  bn_[8].configure(name + ".bn8", arch.trunk_maps);
  fc_.configure(name + ".fc", arch.flattened_features(), arch.code_dim);
}

template <typename S>
void SnippetEncoder<S>::init_params(Rng& rng) {
  for (auto& c : conv_) c.init_params(rng);
  fc_.init_params(rng);
}

template <typename S>
void SnippetEncoder<S>::collect(nn::ParamRefs<S>& out) {
  for (int u = 0; u < kUnits; ++u) {
    conv_[static_cast<std::size_t>(u)].collect(out);
    bn_[static_cast<std::size_t>(u)].collect(out);
  }
  fc_.collect(out);
}

template <typename S>
void SnippetEncoder<S>::for_each_tensor(
    const std::function<void(const std::string&, nn::Mat<S>&)>& fn) {
  nn::ParamRefs<S> params;
  collect(params);
  for (auto* p : params) fn(p->name, p->value);
  for (int u = 0; u < kUnits; ++u) {
    auto& bn = bn_[static_cast<std::size_t>(u)];
    fn(bn.gamma_.name + ".running_mean", bn.running_mean_);
    fn(bn.gamma_.name + ".running_var", bn.running_var_);
  }
}

template <typename S>
nn::FeatureStack<S> SnippetEncoder<S>::pack(
    const std::vector<const MatF*>& snippets) const {
  nn::FeatureStack<S> stack;
  stack.resize_like(static_cast<int>(snippets.size()), 1, arch_.input_h(),
                    arch_.input_w());
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    const MatF& m = *snippets[i];
    if (m.rows() != arch_.input_h() || m.cols() != arch_.input_w())
      throw ArgumentError("snippet shape does not match the encoder input");
    // spatial index y*w + x matches the row-major snippet layout
    for (int y = 0; y < arch_.input_h(); ++y)
      for (int x = 0; x < arch_.input_w(); ++x)
        stack.maps[i](0, y * arch_.input_w() + x) = static_cast<S>(m(y, x));
  }
  return stack;
}

template <typename S>
nn::Mat<S> SnippetEncoder<S>::forward(const nn::FeatureStack<S>& input,
                                      bool training, Cache* cache,
                                      bool update_running) {
  nn::FeatureStack<S> cur = input;
  for (int u = 0; u < kUnits; ++u) {
    auto su = static_cast<std::size_t>(u);
    if (cache) cache->unit_in[su] = cur;
    nn::FeatureStack<S> conv_out;
    conv_[su].forward(cur, conv_out);
    nn::FeatureStack<S> bn_out;
    bn_[su].forward(conv_out, bn_out, training, cache ? &cache->bn[su] : nullptr,
                    update_running);
    parallel_for(bn_out.count(), [&](int s, int) {
      bn_out.maps[s] = bn_out.maps[s].unaryExpr([](S v) { return nn::elu(v); });
    });
    cur = std::move(bn_out);
    if (u < 8 && u % 2 == 1) {
      int p = u / 2;
      nn::FeatureStack<S> pooled;
      nn::MaxPool2<S>::forward(cur, pooled,
                               cache ? &cache->pool[static_cast<std::size_t>(p)]
                                     : nullptr);
      cur = std::move(pooled);
    }
  }

  // flatten (column-major over the (channels, spatial) map) and apply FC+ELU
  const int count = cur.count();
  nn::Mat<S> flat(arch_.flattened_features(), count);
  for (int s = 0; s < count; ++s)
    flat.col(s) = cur.maps[static_cast<std::size_t>(s)].reshaped();
  nn::Mat<S> codes = fc_.forward(flat);
  codes = codes.unaryExpr([](S v) { return nn::elu(v); });
  if (cache) {
    cache->fc_in = std::move(flat);
    cache->codes = codes;
  }
  return codes;
}

template <typename S>
void SnippetEncoder<S>::backward(Cache& cache, const nn::Mat<S>& d_codes) {
  // ELU after FC, derivative from the cached outputs
  nn::Mat<S> d_fc = d_codes.array() *
                    cache.codes.unaryExpr([](S v) {
                      return nn::elu_grad_from_output(v);
                    }).array();
  nn::Mat<S> d_flat = fc_.backward(cache.fc_in, d_fc);

  const int count = static_cast<int>(d_flat.cols());
  nn::FeatureStack<S> d_cur;
  d_cur.resize_like(count, arch_.trunk_maps, arch_.pooled_h(), arch_.pooled_w());
  for (int s = 0; s < count; ++s)
    d_cur.maps[static_cast<std::size_t>(s)] =
        d_flat.col(s).reshaped(arch_.trunk_maps,
                               arch_.pooled_h() * arch_.pooled_w());

  for (int u = kUnits - 1; u >= 0; --u) {
    auto su = static_cast<std::size_t>(u);
    if (u < 8 && u % 2 == 1) {
      int p = u / 2;
      nn::FeatureStack<S> d_unpooled;
      nn::MaxPool2<S>::backward(cache.pool[static_cast<std::size_t>(p)], d_cur,
                                d_unpooled);
      d_cur = std::move(d_unpooled);
    }
    // ELU derivative from the batch-norm output, recomputed from xhat
    const auto& bnc = cache.bn[su];
    const auto gamma = bn_[su].gamma_.value.col(0);
    const auto beta = bn_[su].beta_.value.col(0);
    parallel_for(d_cur.count(), [&](int s, int) {
      nn::Mat<S> bn_out =
          ((bnc.xhat.maps[s].array().colwise() * gamma.array()).colwise() +
           beta.array())
              .matrix();
      d_cur.maps[s] =
          (d_cur.maps[s].array() *
           bn_out.unaryExpr([](S v) { return nn::elu_grad_from_input(v); }).array())
              .matrix();
    });
    nn::FeatureStack<S> d_bn_in;
    bn_[su].backward(bnc, d_cur, d_bn_in);
    nn::FeatureStack<S> d_conv_in;
    conv_[su].backward(cache.unit_in[su], d_bn_in, d_conv_in);
    d_cur = std::move(d_conv_in);
  }
}

// ---------------------------------------------------------------------------
// PassageTower

template <typename S>
void PassageTower<S>::configure(const std::string& name, const EncoderArch& arch,
                                int hidden, int embed_dim) {
  encoder_.configure(name + ".enc", arch);
  gru_.configure(name + ".gru", arch.code_dim, hidden);
  proj_.configure(name + ".proj", hidden, embed_dim);
}

template <typename S>
void PassageTower<S>::init_params(Rng& rng) {
  encoder_.init_params(rng);
  gru_.init_params(rng);
  proj_.init_params(rng);
}

template <typename S>
void PassageTower<S>::collect(nn::ParamRefs<S>& out) {
  encoder_.collect(out);
  collect_head(out);
}

template <typename S>
void PassageTower<S>::collect_head(nn::ParamRefs<S>& out) {
  gru_.collect(out);
  proj_.collect(out);
}

template <typename S>
void PassageTower<S>::for_each_tensor(
    const std::function<void(const std::string&, nn::Mat<S>&)>& fn) {
  encoder_.for_each_tensor(fn);
  nn::ParamRefs<S> head;
  collect_head(head);
  for (auto* p : head) fn(p->name, p->value);
}

template <typename S>
nn::Mat<S> PassageTower<S>::forward(const nn::FeatureStack<S>& packed,
                                    const std::vector<int>& lengths,
                                    bool training, Cache* cache,
                                    bool encoder_training_mode) {
  int total = 0;
  for (int l : lengths) {
    if (l < 1) throw ArgumentError("sequence length must be >= 1");
    total += l;
  }
  if (total != packed.count())
    throw ArgumentError("packed snippet count does not match lengths");

  nn::Mat<S> codes =
      encoder_.forward(packed, training && encoder_training_mode,
                       cache ? &cache->enc : nullptr, encoder_training_mode);

  const int batch = static_cast<int>(lengths.size());
  nn::Mat<S> contexts(gru_.hidden_size(), batch);
  if (cache) cache->seqs.assign(static_cast<std::size_t>(batch), {});
  int offset = 0;
  for (int b = 0; b < batch; ++b) {
    nn::Mat<S> seq = codes.middleCols(offset, lengths[static_cast<std::size_t>(b)]);
    contexts.col(b) = gru_.forward(
        seq, cache ? &cache->seqs[static_cast<std::size_t>(b)] : nullptr);
    offset += lengths[static_cast<std::size_t>(b)];
  }

  nn::Mat<S> embs = proj_.forward(contexts);
  if (cache) {
    cache->codes = std::move(codes);
    cache->contexts = std::move(contexts);
    cache->lengths = lengths;
  }
  return embs;
}

template <typename S>
void PassageTower<S>::backward(Cache& cache, const nn::Mat<S>& d_emb) {
  nn::Mat<S> d_ctx = proj_.backward(cache.contexts, d_emb);
  nn::Mat<S> d_codes = nn::Mat<S>::Zero(cache.codes.rows(), cache.codes.cols());
  int offset = 0;
  for (std::size_t b = 0; b < cache.lengths.size(); ++b) {
    int len = cache.lengths[b];
    d_codes.middleCols(offset, len) =
        gru_.backward(cache.seqs[b], d_ctx.col(static_cast<Eigen::Index>(b)));
    offset += len;
  }
  encoder_.backward(cache.enc, d_codes);
}

// ---------------------------------------------------------------------------
// PassageModel / SnippetModel

template <typename S>
void PassageModel<S>::configure(const EncoderArch& sheet_arch,
                                const EncoderArch& audio_arch, int hidden,
                                int embed_dim) {
  sheet.configure("sheet", sheet_arch, hidden, embed_dim);
  audio.configure("audio", audio_arch, hidden, embed_dim);
  meta.embed_dim = embed_dim;
  meta.hidden = hidden;
}

template <typename S>
void PassageModel<S>::init_params(std::uint64_t seed) {
  meta.seed = seed;
  Rng rs(seed, "init/sheet");
  sheet.init_params(rs);
  Rng ra(seed, "init/audio");
  audio.init_params(ra);
}

template <typename S>
nn::ParamRefs<S> PassageModel<S>::parameters() {
  nn::ParamRefs<S> out;
  sheet.collect(out);
  audio.collect(out);
  return out;
}

template <typename S>
nn::ParamRefs<S> PassageModel<S>::trainable_parameters() {
  if (!encoders_frozen) return parameters();
  nn::ParamRefs<S> out;
  sheet.collect_head(out);
  audio.collect_head(out);
  return out;
}

template <typename S>
void PassageModel<S>::for_each_tensor(
    const std::function<void(const std::string&, nn::Mat<S>&)>& fn) {
  sheet.for_each_tensor(fn);
  audio.for_each_tensor(fn);
}

template <typename S>
void SnippetModel<S>::configure(const EncoderArch& sheet_arch,
                                const EncoderArch& audio_arch) {
  sheet.configure("sheet.enc", sheet_arch);
  audio.configure("audio.enc", audio_arch);
  meta.embed_dim = sheet_arch.code_dim;
  meta.hidden = 0;
}

template <typename S>
void SnippetModel<S>::init_params(std::uint64_t seed) {
  meta.seed = seed;
  Rng rs(seed, "init/sheet");
  sheet.init_params(rs);
  Rng ra(seed, "init/audio");
  audio.init_params(ra);
}

template <typename S>
nn::ParamRefs<S> SnippetModel<S>::parameters() {
  nn::ParamRefs<S> out;
  sheet.collect(out);
  audio.collect(out);
  return out;
}

template <typename S>
void SnippetModel<S>::for_each_tensor(
    const std::function<void(const std::string&, nn::Mat<S>&)>& fn) {
  sheet.for_each_tensor(fn);
  audio.for_each_tensor(fn);
}

}  // namespace stretto

#endif
