#ifndef STRETTO_TRAIN_HPP
#define STRETTO_TRAIN_HPP

#include "stretto/corpus.hpp"
#include "stretto/features.hpp"
#include "stretto/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stretto {

struct TrainConfig {
  double margin = 0.7;        // triplet margin
  int negatives = 0;          // per-anchor negatives; 0 selects batch-1
  int batch_size = 16;        // passage pairs (or snippet pairs) per step
  double lr = 1e-3;
  double lr_decay = 0.5;      // applied when validation MRR plateaus
  int plateau_patience = 5;
  int early_stop_patience = 15;
  int max_epochs = 100;
  double grad_clip = 10.0;    // global norm; 0 disables
  std::uint64_t seed = 1;
  std::string variant = "rnn";
  int embed_dim = 64;
  int hidden = 128;
  HopConfig hops;
  // stop once train R@1 (both directions) reaches this; 0 disables
  double target_train_r1 = 0.0;
  int eval_every = 1;
  double cca_regularization = 1e-4;
  // snippet pretraining: pairs visited per epoch (0 = all), CCA fit cap
  int pretrain_pairs_per_epoch = 512;
  int cca_max_pairs = 4096;

  void validate() const;
};

std::string train_config_to_json(const TrainConfig& cfg);  // defaults materialized
TrainConfig train_config_from_json(const std::string& text);
std::string train_config_hash(const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double loss_per_pair = 0.0;
  double val_mrr = 0.0;
  double lr = 0.0;
  double train_r1 = -1.0;  // min over directions; -1 when not measured
};

struct TrainResult {
  std::vector<EpochLog> log;
  double best_val_mrr = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
};

// In-memory view of one split: raw (un-normalized) snippet sequences, one
// audio variant per augmentation record.
struct PassageData {
  std::string id;  // base passage id
  SnippetSequence sheet_raw;
  std::vector<SnippetSequence> audio_raw;
};

std::vector<PassageData> load_passage_data(const CorpusManifest& manifest,
                                           const HopConfig& hops);

std::pair<NormStats, NormStats> compute_norm_stats(const CorpusManifest& train);

// Mini-batch triplet training of the recurrent model. Best-validation
// parameters are restored before returning. Writes one JSON line per epoch
// to log_stream when given.
TrainResult train_passage_model(PassageModelF& model,
                                const CorpusManifest& train,
                                const CorpusManifest& valid,
                                const TrainConfig& cfg,
                                std::ostream* log_stream = nullptr);

// Baseline snippet-embedding pretraining on strongly-aligned window pairs.
TrainResult pretrain_snippet_model(SnippetModelF& model,
                                   const CorpusManifest& train,
                                   const CorpusManifest& valid,
                                   const TrainConfig& cfg,
                                   std::ostream* log_stream = nullptr);

// Post-training CCA refinement steps.
void refine_snippet_cca(SnippetModelF& model, const CorpusManifest& train,
                        const TrainConfig& cfg);
void refine_passage_cca(PassageModelF& model, const CorpusManifest& train,
                        const TrainConfig& cfg);

// Variant orchestration: builds/initializes the model for cfg.variant
// (loading the pretraining checkpoint when the variant calls for it),
// trains, and applies CCA refinement for the -cca variants.
PassageModelF train_variant(const CorpusManifest& train,
                            const CorpusManifest& valid, TrainConfig cfg,
                            const std::string& pretrain_checkpoint = {},
                            std::ostream* log_stream = nullptr,
                            TrainResult* result = nullptr);

// Trains the baseline snippet model and attaches its CCA refinement, so the
// checkpoint serves both as the BL retrieval model and as the -cca
// initialization source.
SnippetModelF pretrain_variant(const CorpusManifest& train,
                               const CorpusManifest& valid, TrainConfig cfg,
                               std::ostream* log_stream = nullptr,
                               TrainResult* result = nullptr,
                               bool with_cca_refine = true);

// Quick retrieval quality on base records of a split (no disk round trip).
struct SplitRetrieval {
  double mrr_a2s = 0.0, mrr_s2a = 0.0;
  double r1_a2s = 0.0, r1_s2a = 0.0;  // percent
};
SplitRetrieval evaluate_split(PassageModelF& model,
                              const std::vector<PassageData>& data);

}  // namespace stretto

#endif
