#include "stretto/features.hpp"

#include <algorithm>

namespace stretto {

int PaddedBatch::max_len() const {
  int m = 0;
  for (int l : lengths) m = std::max(m, l);
  return m;
}

void HopConfig::validate() const {
  if (audio_hop <= 0 || sheet_hop <= 0) throw ArgumentError("hop must be positive");
  if (audio_hop > kAudioSnippetFrames)
    throw ArgumentError("audio hop exceeds the snippet window");
  if (sheet_hop > kSheetSnippetWidth)
    throw ArgumentError("sheet hop exceeds the snippet window");
}

std::vector<int> window_starts(int length, int window, int hop) {
  if (hop <= 0) throw ArgumentError("hop must be positive");
  if (length < window) throw ArgumentError("passage shorter than the window");
  std::vector<int> starts;
  for (int s = 0; s + window <= length; s += hop) starts.push_back(s);
  int last = length - window;
  if (starts.empty() || starts.back() != last) starts.push_back(last);
  return starts;
}

namespace {

SnippetSequence slice(const MatF& data, Modality m, const std::string& id, int hop) {
  int window = snippet_cols(m);
  if (hop > window) throw ArgumentError("hop exceeds the snippet window");
  if (data.rows() != snippet_rows(m))
    throw ArgumentError("passage has the wrong number of rows for its modality");

  SnippetSequence seq;
  seq.modality = m;
  seq.passage_id = id;
  for (int s : window_starts(static_cast<int>(data.cols()), window, hop))
    seq.snippets.emplace_back(data.block(0, s, data.rows(), window));
  return seq;
}

}  // namespace

SnippetSequence slice_passage(const SheetPassage& p, int hop) {
  return slice(p.pixels, Modality::Sheet, p.passage_id, hop);
}

SnippetSequence slice_passage(const AudioPassage& p, int hop) {
  return slice(p.spectrogram, Modality::Audio, p.passage_id, hop);
}

SnippetSequence normalize_snippets(const SnippetSequence& s, const NormStats& stats) {
  if (!(stats.stddev > 0.0f)) throw ConfigError("normalization stddev must be > 0");
  SnippetSequence out;
  out.modality = s.modality;
  out.passage_id = s.passage_id;
  out.snippets.reserve(s.snippets.size());
  for (const auto& m : s.snippets)
    out.snippets.emplace_back((m.array() - stats.mean) / stats.stddev);
  return out;
}

PaddedBatch collate(const std::vector<SnippetSequence>& batch) {
  if (batch.empty()) throw ArgumentError("cannot collate an empty batch");
  Modality m = batch.front().modality;
  for (const auto& s : batch) {
    if (s.modality != m) throw ArgumentError("mixed modalities in one batch");
    if (s.length() < 1) throw ArgumentError("empty snippet sequence");
  }

  PaddedBatch out;
  out.modality = m;
  int max_len = 0;
  for (const auto& s : batch) max_len = std::max(max_len, s.length());

  MatF zero = MatF::Zero(snippet_rows(m), snippet_cols(m));
  for (const auto& s : batch) {
    std::vector<MatF> row = s.snippets;
    row.resize(static_cast<std::size_t>(max_len), zero);
    out.tensor.push_back(std::move(row));
    out.lengths.push_back(s.length());
    out.passage_ids.push_back(s.passage_id);
  }
  return out;
}

}  // namespace stretto
