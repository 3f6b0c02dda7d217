#include "stretto/train.hpp"

#include "stretto/loss.hpp"
#include "stretto/model_impl.hpp"
#include "stretto/optim.hpp"
#include "stretto/retrieval.hpp"
#include "stretto/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

namespace stretto {

using nlohmann::json;

void TrainConfig::validate() const {
  if (margin <= 0.0) throw ConfigError("margin must be positive");
  if (batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (negatives < 0 || negatives > batch_size - 1)
    throw ConfigError("negatives must lie in [1, batch-1] (0 = all)");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (lr_decay <= 0.0 || lr_decay > 1.0) throw ConfigError("lr decay must be in (0,1]");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (embed_dim < 1) throw ConfigError("embedding dimension must be >= 1");
  if (hidden != 128)
    throw ConfigError("the summarizer hidden size is fixed at 128");
  hops.validate();
  static const std::set<std::string> variants{"bl",     "rnn",       "rnn-ft",
                                              "rnn-fz", "rnn-ft-cca", "rnn-fz-cca"};
  if (!variants.count(variant)) throw ConfigError("unknown variant: " + variant);
}

std::string train_config_to_json(const TrainConfig& c) {
  json j{{"margin", c.margin},
         {"negatives", c.negatives},
         {"batch_size", c.batch_size},
         {"lr", c.lr},
         {"lr_decay", c.lr_decay},
         {"plateau_patience", c.plateau_patience},
         {"early_stop_patience", c.early_stop_patience},
         {"max_epochs", c.max_epochs},
         {"grad_clip", c.grad_clip},
         {"seed", c.seed},
         {"variant", c.variant},
         {"embed_dim", c.embed_dim},
         {"hidden", c.hidden},
         {"audio_hop", c.hops.audio_hop},
         {"sheet_hop", c.hops.sheet_hop},
         {"target_train_r1", c.target_train_r1},
         {"eval_every", c.eval_every},
         {"cca_regularization", c.cca_regularization},
         {"pretrain_pairs_per_epoch", c.pretrain_pairs_per_epoch},
         {"cca_max_pairs", c.cca_max_pairs}};
  return j.dump(1);
}

TrainConfig train_config_from_json(const std::string& text) {
  json j = json::parse(text);
  TrainConfig c;
  c.margin = j.value("margin", c.margin);
  c.negatives = j.value("negatives", c.negatives);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.seed = j.value("seed", c.seed);
  c.variant = j.value("variant", c.variant);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.hops.audio_hop = j.value("audio_hop", c.hops.audio_hop);
  c.hops.sheet_hop = j.value("sheet_hop", c.hops.sheet_hop);
  c.target_train_r1 = j.value("target_train_r1", c.target_train_r1);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.cca_regularization = j.value("cca_regularization", c.cca_regularization);
  c.pretrain_pairs_per_epoch =
      j.value("pretrain_pairs_per_epoch", c.pretrain_pairs_per_epoch);
  c.cca_max_pairs = j.value("cca_max_pairs", c.cca_max_pairs);
  return c;
}

std::string train_config_hash(const TrainConfig& cfg) {
  return hex64(fnv1a64(train_config_to_json(cfg)));
}

// ---------------------------------------------------------------------------
// data loading

std::vector<PassageData> load_passage_data(const CorpusManifest& manifest,
                                           const HopConfig& hops) {
  std::vector<PassageData> out;
  std::map<std::string, std::size_t> by_base;
  for (const auto& rec : manifest.records) {
    PassagePair pair = load_pair(manifest, rec);
    auto it = by_base.find(rec.base_passage_id);
    if (it == by_base.end()) {
      PassageData d;
      d.id = rec.base_passage_id;
      d.sheet_raw = slice_passage(pair.sheet, hops.sheet_hop);
      d.sheet_raw.passage_id = rec.base_passage_id;
      by_base.emplace(rec.base_passage_id, out.size());
      out.push_back(std::move(d));
      it = by_base.find(rec.base_passage_id);
    }
    SnippetSequence audio = slice_passage(pair.audio, hops.audio_hop);
    audio.passage_id = rec.base_passage_id;
    // base rendering first, augmentations after, in record order
    auto& slot = out[it->second].audio_raw;
    if (rec.is_base())
      slot.insert(slot.begin(), std::move(audio));
    else
      slot.push_back(std::move(audio));
  }
  for (const auto& d : out)
    if (d.audio_raw.empty())
      throw FormatError("passage without any audio record: " + d.id);
  return out;
}

std::pair<NormStats, NormStats> compute_norm_stats(const CorpusManifest& train) {
  double s_sum = 0, s_sq = 0, a_sum = 0, a_sq = 0;
  std::int64_t s_n = 0, a_n = 0;
  std::set<std::string> seen_sheets;
  for (const auto& rec : train.records) {
    PassagePair pair = load_pair(train, rec);
    if (seen_sheets.insert(rec.sheet_file).second) {
      s_sum += pair.sheet.pixels.cast<double>().sum();
      s_sq += pair.sheet.pixels.cast<double>().array().square().sum();
      s_n += pair.sheet.pixels.size();
    }
    a_sum += pair.audio.spectrogram.cast<double>().sum();
    a_sq += pair.audio.spectrogram.cast<double>().array().square().sum();
    a_n += pair.audio.spectrogram.size();
  }
  auto finish = [](double sum, double sq, std::int64_t n) {
    NormStats st;
    double mean = sum / static_cast<double>(n);
    double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
    st.mean = static_cast<float>(mean);
    st.stddev = static_cast<float>(std::max(1e-6, std::sqrt(var)));
    return st;
  };
  return {finish(s_sum, s_sq, s_n), finish(a_sum, a_sq, a_n)};
}

// ---------------------------------------------------------------------------
// shared helpers

namespace {

nn::FeatureStack<float> pack_sequences(SnippetEncoder<float>& enc,
                                       const std::vector<const SnippetSequence*>& seqs,
                                       std::vector<int>& lengths) {
  std::vector<const MatF*> snippets;
  lengths.clear();
  for (const auto* s : seqs) {
    lengths.push_back(s->length());
    for (const auto& m : s->snippets) snippets.push_back(&m);
  }
  return enc.pack(snippets);
}

struct BestSnapshot {
  std::vector<Eigen::MatrixXf> tensors;

  template <typename Model>
  void capture(Model& m) {
    tensors.clear();
    m.for_each_tensor([&](const std::string&, Eigen::MatrixXf& t) {
      tensors.push_back(t);
    });
  }
  template <typename Model>
  void restore(Model& m) {
    std::size_t i = 0;
    m.for_each_tensor([&](const std::string&, Eigen::MatrixXf& t) {
      t = tensors.at(i++);
    });
  }
  bool empty() const { return tensors.empty(); }
};

void log_epoch(std::ostream* stream, const EpochLog& e) {
  if (!stream) return;
  json j{{"epoch", e.epoch},
         {"loss_per_pair", e.loss_per_pair},
         {"val_mrr", e.val_mrr},
         {"lr", e.lr}};
  if (e.train_r1 >= 0.0) j["train_r1"] = e.train_r1;
  (*stream) << j.dump() << "\n";
  stream->flush();
}

MatF embed_raw_sequences(PassageModelF& model, Modality modality,
                         const std::vector<const SnippetSequence*>& seqs) {
  std::vector<SnippetSequence> copies;
  copies.reserve(seqs.size());
  for (const auto* s : seqs) copies.push_back(*s);
  return embed_sequences(model, modality, copies);
}

std::vector<int> rank_rows(const MatF& queries, const MatF& candidates) {
  // true match is the same row index; exact brute force
  std::vector<int> ranks;
  const Eigen::Index n = queries.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXf q = queries.row(i).transpose();
    float qn = q.norm();
    std::vector<float> dist(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      float rn = candidates.row(j).norm();
      dist[static_cast<std::size_t>(j)] =
          (qn == 0.0f || rn == 0.0f)
              ? 1.0f
              : 1.0f - candidates.row(j).dot(q.transpose()) / (rn * qn);
    }
    int rank = 1;
    float dtrue = dist[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dist[static_cast<std::size_t>(j)] < dtrue ||
          (dist[static_cast<std::size_t>(j)] == dtrue && j < i))
        ++rank;
    }
    ranks.push_back(rank);
  }
  return ranks;
}

}  // namespace

SplitRetrieval evaluate_split(PassageModelF& model,
                              const std::vector<PassageData>& data) {
  std::vector<const SnippetSequence*> sheets, audios;
  for (const auto& d : data) {
    sheets.push_back(&d.sheet_raw);
    audios.push_back(&d.audio_raw.front());
  }
  MatF se = embed_raw_sequences(model, Modality::Sheet, sheets);
  MatF ae = embed_raw_sequences(model, Modality::Audio, audios);

  std::vector<int> a2s = rank_rows(ae, se);  // audio query, sheet candidates
  std::vector<int> s2a = rank_rows(se, ae);
  SplitRetrieval out;
  out.mrr_a2s = mean_reciprocal_rank(a2s);
  out.mrr_s2a = mean_reciprocal_rank(s2a);
  out.r1_a2s = recall_at_k(a2s, 1);
  out.r1_s2a = recall_at_k(s2a, 1);
  return out;
}

// ---------------------------------------------------------------------------
// passage training

TrainResult train_passage_model(PassageModelF& model,
                                const CorpusManifest& train,
                                const CorpusManifest& valid,
                                const TrainConfig& cfg,
                                std::ostream* log_stream) {
  cfg.validate();
  std::vector<PassageData> train_data = load_passage_data(train, model.hops);
  std::vector<PassageData> valid_data = load_passage_data(valid, model.hops);
  if (train_data.size() < 2)
    throw ConfigError("need at least two training passages");

  Adam<float> opt(model.trainable_parameters(), cfg.lr, cfg.grad_clip);
  const int n = static_cast<int>(train_data.size());
  const int batch = std::min(cfg.batch_size, n);
  const bool frozen = model.encoders_frozen;

  TrainResult result;
  BestSnapshot best;
  int stale = 0, plateau = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng order_rng(cfg.seed, "batch/" + std::to_string(epoch));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(order_rng.uniform_int(0, i));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double epoch_loss = 0.0;
    int pairs_seen = 0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(batch),
                                               order.size() - pos);
      if (order.size() - pos - take == 1) ++take;  // avoid a 1-pair remainder
      if (take < 2) break;

      std::vector<const SnippetSequence*> sheet_seqs, audio_seqs;
      std::vector<SnippetSequence> normalized_sheet, normalized_audio;
      normalized_sheet.reserve(take);
      normalized_audio.reserve(take);
      for (std::size_t b = 0; b < take; ++b) {
        const PassageData& d =
            train_data[static_cast<std::size_t>(order[pos + b])];
        std::size_t variant_count = d.audio_raw.size();
        std::size_t pick = 0;
        if (variant_count > 1) {
          Rng pick_rng(cfg.seed, "augpick/" + std::to_string(epoch) + "/" + d.id);
          pick = static_cast<std::size_t>(
              pick_rng.uniform_int(0, static_cast<std::int64_t>(variant_count) - 1));
        }
        normalized_sheet.push_back(
            normalize_snippets(d.sheet_raw, model.sheet_norm));
        normalized_audio.push_back(
            normalize_snippets(d.audio_raw[pick], model.audio_norm));
      }
      for (const auto& s : normalized_sheet) sheet_seqs.push_back(&s);
      for (const auto& s : normalized_audio) audio_seqs.push_back(&s);

      std::vector<int> sheet_lens, audio_lens;
      nn::FeatureStack<float> sheet_stack =
          pack_sequences(model.sheet.encoder(), sheet_seqs, sheet_lens);
      nn::FeatureStack<float> audio_stack =
          pack_sequences(model.audio.encoder(), audio_seqs, audio_lens);

      PassageTower<float>::Cache sheet_cache, audio_cache;
      nn::Mat<float> x = model.sheet.forward(sheet_stack, sheet_lens, true,
                                             &sheet_cache, !frozen);
      nn::Mat<float> y = model.audio.forward(audio_stack, audio_lens, true,
                                             &audio_cache, !frozen);

      std::optional<NegativeLists> negatives;
      int b_now = static_cast<int>(take);
      if (cfg.negatives > 0 && cfg.negatives < b_now - 1) {
        Rng neg_rng(cfg.seed, "negatives/" + std::to_string(epoch) + "/" +
                                  std::to_string(pos));
        negatives = sample_negatives(b_now, cfg.negatives, neg_rng);
      }

      nn::Mat<float> xr = x.transpose();  // (B, D)
      nn::Mat<float> yr = y.transpose();
      auto loss = triplet_loss<float>(xr, yr, static_cast<float>(cfg.margin),
                                      negatives, /*with_grad=*/true);
      if (!std::isfinite(loss.loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));
      epoch_loss += static_cast<double>(loss.loss);
      pairs_seen += b_now;

      model.sheet.backward(sheet_cache, loss.dx.transpose());
      model.audio.backward(audio_cache, loss.dy.transpose());
      opt.step();
      pos += take;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss_per_pair = pairs_seen > 0 ? epoch_loss / pairs_seen : 0.0;
    entry.lr = opt.lr();

    double val_mrr = 0.0;
    if (epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs) {
      SplitRetrieval val = evaluate_split(model, valid_data);
      val_mrr = val.mrr_s2a;
      entry.val_mrr = val_mrr;
      if (cfg.target_train_r1 > 0.0) {
        SplitRetrieval tr = evaluate_split(model, train_data);
        entry.train_r1 = std::min(tr.r1_a2s, tr.r1_s2a) / 100.0;
      }

      if (val_mrr > result.best_val_mrr + 1e-6 || result.best_epoch < 0) {
        result.best_val_mrr = val_mrr;
        result.best_epoch = epoch;
        best.capture(model);
        stale = 0;
        plateau = 0;
      } else {
        ++stale;
        ++plateau;
        if (plateau >= cfg.plateau_patience) {
          opt.set_lr(opt.lr() * cfg.lr_decay);
          plateau = 0;
        }
      }
    }

    result.log.push_back(entry);
    result.epochs_run = epoch;
    log_epoch(log_stream, entry);

    if (cfg.target_train_r1 > 0.0 && entry.train_r1 >= cfg.target_train_r1) {
      // the run has hit its retrieval target; keep the current parameters
      best.capture(model);
      result.best_epoch = epoch;
      result.best_val_mrr = std::max(result.best_val_mrr, val_mrr);
      break;
    }
    if (stale >= cfg.early_stop_patience) break;
  }

  if (!best.empty()) best.restore(model);
  return result;
}

// ---------------------------------------------------------------------------
// snippet pretraining

namespace {

struct SnippetPairPool {
  std::vector<MatF> sheet, audio;  // raw windows, index-aligned
};

SnippetPairPool load_snippet_pairs(const CorpusManifest& manifest) {
  SnippetPairPool pool;
  for (const auto& rec : manifest.records) {
    if (rec.align_file.empty()) continue;
    PassagePair pair = load_pair(manifest, rec);
    for (auto& [s, a] : extract_snippet_pairs(pair)) {
      pool.sheet.push_back(std::move(s));
      pool.audio.push_back(std::move(a));
    }
  }
  if (pool.sheet.empty())
    throw ConfigError("pretraining needs records with strong alignments");
  return pool;
}

// snippet-level S2A mean reciprocal rank on up to `cap` held-out pairs
double snippet_val_mrr(SnippetModelF& model, const SnippetPairPool& pool,
                       int cap, std::uint64_t seed) {
  int n = static_cast<int>(pool.sheet.size());
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::iota(pick.begin(), pick.end(), 0);
  if (n > cap) {
    Rng rng(seed, "snippet-val");
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng.uniform_int(0, i));
      std::swap(pick[static_cast<std::size_t>(i)], pick[static_cast<std::size_t>(j)]);
    }
    pick.resize(static_cast<std::size_t>(cap));
    std::sort(pick.begin(), pick.end());
  }
  std::vector<MatF> sheets, audios;
  for (int i : pick) {
    sheets.push_back(pool.sheet[static_cast<std::size_t>(i)]);
    audios.push_back(pool.audio[static_cast<std::size_t>(i)]);
  }
  MatF se = embed_snippets(model, Modality::Sheet, sheets);
  MatF ae = embed_snippets(model, Modality::Audio, audios);
  return mean_reciprocal_rank(rank_rows(se, ae));
}

}  // namespace

TrainResult pretrain_snippet_model(SnippetModelF& model,
                                   const CorpusManifest& train,
                                   const CorpusManifest& valid,
                                   const TrainConfig& cfg,
                                   std::ostream* log_stream) {
  cfg.validate();
  SnippetPairPool train_pool = load_snippet_pairs(train);
  SnippetPairPool valid_pool = load_snippet_pairs(valid);
  const int n = static_cast<int>(train_pool.sheet.size());
  if (n < 2) throw ConfigError("need at least two snippet pairs");

  Adam<float> opt(model.parameters(), cfg.lr, cfg.grad_clip);
  const int per_epoch = cfg.pretrain_pairs_per_epoch > 0
                            ? std::min(cfg.pretrain_pairs_per_epoch, n)
                            : n;
  const int batch = std::min(cfg.batch_size, per_epoch);

  TrainResult result;
  BestSnapshot best;
  int stale = 0, plateau = 0;
  int cursor = 0;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng order_rng(cfg.seed, "pretrain-batch/" + std::to_string(epoch));
    if (cursor == 0) {
      for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(order_rng.uniform_int(0, i));
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(j)]);
      }
    }

    double epoch_loss = 0.0;
    int pairs_seen = 0;
    int visited = 0;
    while (visited < per_epoch) {
      int take = std::min(batch, per_epoch - visited);
      if (per_epoch - visited - take == 1) ++take;
      if (take < 2) break;

      std::vector<MatF> sheet_norm, audio_norm;
      std::vector<const MatF*> sheet_ptr, audio_ptr;
      for (int b = 0; b < take; ++b) {
        int idx = order[static_cast<std::size_t>((cursor + visited + b) % n)];
        sheet_norm.emplace_back(
            (train_pool.sheet[static_cast<std::size_t>(idx)].array() -
             model.sheet_norm.mean) /
            model.sheet_norm.stddev);
        audio_norm.emplace_back(
            (train_pool.audio[static_cast<std::size_t>(idx)].array() -
             model.audio_norm.mean) /
            model.audio_norm.stddev);
      }
      for (const auto& m : sheet_norm) sheet_ptr.push_back(&m);
      for (const auto& m : audio_norm) audio_ptr.push_back(&m);

      SnippetEncoder<float>::Cache sheet_cache, audio_cache;
      nn::FeatureStack<float> ss = model.sheet.pack(sheet_ptr);
      nn::FeatureStack<float> as = model.audio.pack(audio_ptr);
      nn::Mat<float> x = model.sheet.forward(ss, true, &sheet_cache);
      nn::Mat<float> y = model.audio.forward(as, true, &audio_cache);

      std::optional<NegativeLists> negatives;
      if (cfg.negatives > 0 && cfg.negatives < take - 1) {
        Rng neg_rng(cfg.seed, "pretrain-neg/" + std::to_string(epoch) + "/" +
                                  std::to_string(visited));
        negatives = sample_negatives(take, cfg.negatives, neg_rng);
      }
      nn::Mat<float> xr = x.transpose(), yr = y.transpose();
      auto loss = triplet_loss<float>(xr, yr, static_cast<float>(cfg.margin),
                                      negatives, true);
      if (!std::isfinite(loss.loss))
        throw std::runtime_error("pretraining diverged: non-finite loss");
      epoch_loss += static_cast<double>(loss.loss);
      pairs_seen += take;

      model.sheet.backward(sheet_cache, loss.dx.transpose());
      model.audio.backward(audio_cache, loss.dy.transpose());
      opt.step();
      visited += take;
    }
    cursor = (cursor + visited) % n;

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss_per_pair = pairs_seen > 0 ? epoch_loss / pairs_seen : 0.0;
    entry.lr = opt.lr();
    entry.val_mrr = snippet_val_mrr(model, valid_pool, 128, cfg.seed);

    if (entry.val_mrr > result.best_val_mrr + 1e-6 || result.best_epoch < 0) {
      result.best_val_mrr = entry.val_mrr;
      result.best_epoch = epoch;
      best.capture(model);
      stale = 0;
      plateau = 0;
    } else {
      ++stale;
      ++plateau;
      if (plateau >= cfg.plateau_patience) {
        opt.set_lr(opt.lr() * cfg.lr_decay);
        plateau = 0;
      }
    }
    result.log.push_back(entry);
    result.epochs_run = epoch;
    log_epoch(log_stream, entry);
    if (stale >= cfg.early_stop_patience) break;
  }

  if (!best.empty()) best.restore(model);
  return result;
}

// ---------------------------------------------------------------------------
// CCA refinement

namespace {

// deterministic size cap: evenly strided subset
std::vector<int> strided_subset(int n, int cap) {
  std::vector<int> idx;
  if (n <= cap) {
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  idx.reserve(static_cast<std::size_t>(cap));
  for (int i = 0; i < cap; ++i)
    idx.push_back(static_cast<int>(static_cast<std::int64_t>(i) * n / cap));
  return idx;
}

}  // namespace

void refine_snippet_cca(SnippetModelF& model, const CorpusManifest& train,
                        const TrainConfig& cfg) {
  SnippetPairPool pool = load_snippet_pairs(train);
  std::vector<int> idx =
      strided_subset(static_cast<int>(pool.sheet.size()), cfg.cca_max_pairs);
  std::vector<MatF> sheets, audios;
  for (int i : idx) {
    sheets.push_back(pool.sheet[static_cast<std::size_t>(i)]);
    audios.push_back(pool.audio[static_cast<std::size_t>(i)]);
  }
  model.cca.reset();  // fit on raw codes
  MatF x = embed_snippets(model, Modality::Sheet, sheets);
  MatF y = embed_snippets(model, Modality::Audio, audios);
  model.cca = fit_cca(x, y, cfg.cca_regularization);
}

void refine_passage_cca(PassageModelF& model, const CorpusManifest& train,
                        const TrainConfig& cfg) {
  std::vector<PassageData> data = load_passage_data(train, model.hops);
  std::vector<const SnippetSequence*> sheets, audios;
  for (const auto& d : data) {
    for (const auto& a : d.audio_raw) {
      sheets.push_back(&d.sheet_raw);
      audios.push_back(&a);
    }
  }
  model.cca.reset();
  MatF x = embed_raw_sequences(model, Modality::Sheet, sheets);
  MatF y = embed_raw_sequences(model, Modality::Audio, audios);
  model.cca = fit_cca(x, y, cfg.cca_regularization);
}

// ---------------------------------------------------------------------------
// variant orchestration

PassageModelF train_variant(const CorpusManifest& train,
                            const CorpusManifest& valid, TrainConfig cfg,
                            const std::string& pretrain_checkpoint,
                            std::ostream* log_stream, TrainResult* result) {
  cfg.validate();
  if (cfg.variant == "bl")
    throw ConfigError("variant bl trains a snippet model; use pretraining");

  const bool wants_pretrained = cfg.variant != "rnn";
  const bool wants_cca = cfg.variant == "rnn-ft-cca" || cfg.variant == "rnn-fz-cca";
  const bool frozen = cfg.variant == "rnn-fz" || cfg.variant == "rnn-fz-cca";

  PassageModelF model;
  EncoderArch sheet_arch, audio_arch;
  sheet_arch.modality = Modality::Sheet;
  audio_arch.modality = Modality::Audio;
  model.configure(sheet_arch, audio_arch, cfg.hidden, cfg.embed_dim);
  model.init_params(cfg.seed);
  model.hops = cfg.hops;
  model.meta.variant = cfg.variant;
  model.meta.config_hash = train_config_hash(cfg);

  if (wants_pretrained) {
    if (pretrain_checkpoint.empty())
      throw ConfigError("variant " + cfg.variant +
                        " needs a pretraining checkpoint");
    SnippetModelF snippet = load_snippet_checkpoint(pretrain_checkpoint);
    if (wants_cca && !snippet.cca)
      throw ConfigError(
          "variant " + cfg.variant +
          " needs a CCA-refined pretraining checkpoint (none present)");
    transfer_encoders(snippet, model);
  } else {
    auto [sheet_norm, audio_norm] = compute_norm_stats(train);
    model.sheet_norm = sheet_norm;
    model.audio_norm = audio_norm;
  }
  model.encoders_frozen = frozen;

  TrainResult res = train_passage_model(model, train, valid, cfg, log_stream);
  if (wants_cca) refine_passage_cca(model, train, cfg);
  if (result) *result = res;
  return model;
}

SnippetModelF pretrain_variant(const CorpusManifest& train,
                               const CorpusManifest& valid, TrainConfig cfg,
                               std::ostream* log_stream, TrainResult* result,
                               bool with_cca_refine) {
  cfg.variant = "bl";
  cfg.validate();

  SnippetModelF model;
  EncoderArch sheet_arch, audio_arch;
  sheet_arch.modality = Modality::Sheet;
  audio_arch.modality = Modality::Audio;
  model.configure(sheet_arch, audio_arch);
  model.init_params(cfg.seed);
  model.hops = cfg.hops;
  model.meta.variant = "bl";
  model.meta.config_hash = train_config_hash(cfg);
  auto [sheet_norm, audio_norm] = compute_norm_stats(train);
  model.sheet_norm = sheet_norm;
  model.audio_norm = audio_norm;

  TrainResult res = pretrain_snippet_model(model, train, valid, cfg, log_stream);
  if (with_cca_refine) refine_snippet_cca(model, train, cfg);
  if (result) *result = res;
  return model;
}

}  // namespace stretto
