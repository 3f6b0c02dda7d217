#ifndef STRETTO_CORPUS_HPP
#define STRETTO_CORPUS_HPP

#include "stretto/common.hpp"
#include "stretto/events.hpp"
#include "stretto/render.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stretto {

// Weakly-aligned pair: correspondence is known at the passage level only.
// The strong alignment is carried for snippet pretraining and is optional
// in the on-disk format.
struct PassagePair {
  SheetPassage sheet;
  AudioPassage audio;
  std::optional<std::vector<AlignmentEntry>> strong_alignment;
};

struct PassageRecord {
  std::string passage_id;       // unique within a split
  std::string base_passage_id;  // groups augmented re-renderings
  std::string piece_id;
  std::string sheet_file;
  std::string spec_file;
  std::string align_file;       // empty when absent
  double duration_seconds = 0.0;
  double tempo_ratio = 1.0;
  std::uint64_t timbre_seed = 0;
  std::uint64_t event_seed = 0;  // latent sequence seed, for re-rendering
  int aug_index = 0;             // 0 = base rendering

  bool is_base() const { return aug_index == 0; }
};

struct CorpusConfig {
  GeneratorConfig generator;
  RenderConfig render;
  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};  // train/valid/test
  int aug_factor = 4;             // records per train passage, incl. base
  double tempo_aug_min = 0.9;
  double tempo_aug_max = 1.1;
  int n_train_timbres = 3;        // timbre pool for train renderings
  bool write_alignments = true;

  void validate() const;
};

struct CorpusManifest {
  int schema_version = 1;
  std::string root;   // directory holding this split's files
  std::string split;  // train | valid | test
  CorpusConfig config;
  std::uint64_t seed = 0;
  std::vector<PassageRecord> records;

  std::vector<const PassageRecord*> base_records() const;
};

// Generates n_pairs passages, renders both modalities, applies train-side
// tempo/timbre augmentation, and writes one manifest per split under
// <root>/<split>/. Returns the manifests in train/valid/test order.
std::vector<CorpusManifest> build_corpus(const std::string& root,
                                         const CorpusConfig& config,
                                         int n_pairs, std::uint64_t seed);

CorpusManifest load_manifest(const std::string& root, const std::string& split);

// The manifest's generator-parameter schema, reused for config files.
std::string corpus_config_to_json_text(const CorpusConfig& config);
CorpusConfig corpus_config_from_json_text(const std::string& text);

PassagePair load_pair(const CorpusManifest& m, const PassageRecord& rec);

// Strongly-aligned fixed-size window pairs for pretraining: one
// (160x180 sheet, 92x20 audio) pair per anchored event, windows centered
// on the anchor and clipped to the passage bounds.
std::vector<std::pair<MatF, MatF>> extract_snippet_pairs(const PassagePair& pair);

// The timbre seed held out of every train rendering.
std::uint64_t test_timbre_seed(std::uint64_t corpus_seed);

}  // namespace stretto

#endif
