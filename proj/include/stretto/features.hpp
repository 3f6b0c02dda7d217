#ifndef STRETTO_FEATURES_HPP
#define STRETTO_FEATURES_HPP

#include "stretto/common.hpp"
#include "stretto/render.hpp"

#include <string>
#include <vector>

namespace stretto {

// Ordered fixed-size windows cut from one passage; the network's input.
struct SnippetSequence {
  Modality modality = Modality::Audio;
  std::vector<MatF> snippets;  // sheet 160x180, audio 92x20
  std::string passage_id;

  int length() const { return static_cast<int>(snippets.size()); }
};

// Zero-padded batch with explicit true lengths.
struct PaddedBatch {
  Modality modality = Modality::Audio;
  std::vector<std::vector<MatF>> tensor;  // (batch, max_len) of snippets
  std::vector<int> lengths;
  std::vector<std::string> passage_ids;

  int size() const { return static_cast<int>(tensor.size()); }
  int max_len() const;
};

struct HopConfig {
  int audio_hop = 10;  // frames: 0.5 s, 50% overlap
  int sheet_hop = 90;  // columns: 50% overlap

  void validate() const;
  int hop(Modality m) const { return m == Modality::Sheet ? sheet_hop : audio_hop; }
};

// Per-modality scalar standardization statistics, computed on the training
// split only and carried inside model checkpoints.
struct NormStats {
  float mean = 0.0f;
  float stddev = 1.0f;
};

// Window starts at 0, hop, 2*hop, ...; the final window is right-aligned to
// the passage end when the last regular one falls short of it.
std::vector<int> window_starts(int length, int window, int hop);

SnippetSequence slice_passage(const SheetPassage& p, int hop);
SnippetSequence slice_passage(const AudioPassage& p, int hop);

SnippetSequence normalize_snippets(const SnippetSequence& s, const NormStats& stats);

PaddedBatch collate(const std::vector<SnippetSequence>& batch);

}  // namespace stretto

#endif
