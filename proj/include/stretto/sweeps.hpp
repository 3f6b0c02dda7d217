#ifndef STRETTO_SWEEPS_HPP
#define STRETTO_SWEEPS_HPP

#include "stretto/corpus.hpp"
#include "stretto/model.hpp"
#include "stretto/train.hpp"

#include <map>
#include <string>
#include <vector>

namespace stretto {

struct DimSweepRow {
  int dim = 0;
  double mrr_a2s = 0.0;
  double mrr_s2a = 0.0;
};

// Trains one recurrent model per embedding dimension with a shared base
// config and seed, evaluates the test split in both directions, and writes
// <out>/mrr_vs_dim.svg plus the underlying table.
std::vector<DimSweepRow> sweep_embedding_dim(
    const std::vector<int>& dims, const CorpusManifest& train,
    const CorpusManifest& valid, const CorpusManifest& test,
    const TrainConfig& base, const std::string& out_dir);

struct TempoSweepCell {
  double ratio = 1.0;
  double mrr_a2s = 0.0;
  double mrr_s2a = 0.0;
};
using TempoSweepTable = std::map<std::string, std::vector<TempoSweepCell>>;

// Re-renders the test audio at each tempo ratio (sheets unchanged) and
// evaluates every checkpoint on it. Checkpoints may be recurrent or
// snippet (voting baseline) models. Writes <out>/tempo_table.json.
TempoSweepTable sweep_tempo(const std::vector<double>& ratios,
                            const CorpusManifest& test,
                            const std::map<std::string, std::string>& checkpoints,
                            const std::string& out_dir, int voting_top_k = 5);

struct ScatterPoint {
  std::string passage_id;
  double duration_s = 0.0;
  double distance = 0.0;
  double reciprocal_rank = 0.0;
};

// Pair distance vs audio duration with S2A reciprocal ranks; writes
// <out>/scatter.csv and <out>/scatter.svg.
std::vector<ScatterPoint> scatter_analysis(PassageModelF& model,
                                           const CorpusManifest& test,
                                           const std::string& out_dir);

// Re-render one split's audio at a tempo ratio; returns raw audio snippet
// sequences keyed like the base records (sheets are unaffected by tempo).
std::vector<SnippetSequence> rerender_audio_sequences(
    const CorpusManifest& test, double ratio, const HopConfig& hops);

}  // namespace stretto

#endif
