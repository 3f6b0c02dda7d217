#include "stretto/corpus.hpp"

#include "stretto/events.hpp"
#include "stretto/matrix_io.hpp"
#include "stretto/render.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace stretto;
namespace fs = std::filesystem;

TEST_CASE("event generation is deterministic per seed") {
  GeneratorConfig cfg;
  EventSequence a = generate_event_sequence(cfg, 7);
  EventSequence b = generate_event_sequence(cfg, 7);
  REQUIRE(a.events.size() == b.events.size());
  CHECK(a.tempo_bpm == b.tempo_bpm);
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].onset_beats == b.events[i].onset_beats);
    CHECK(a.events[i].pitch == b.events[i].pitch);
    CHECK(a.events[i].duration_beats == b.events[i].duration_beats);
  }
  EventSequence c = generate_event_sequence(cfg, 8);
  CHECK(a.tempo_bpm != c.tempo_bpm);
}

TEST_CASE("single-note config yields one event at onset zero") {
  GeneratorConfig cfg;
  cfg.note_count_min = cfg.note_count_max = 1;
  EventSequence seq = generate_event_sequence(cfg, 3);
  REQUIRE(seq.events.size() == 1);
  CHECK(seq.events[0].onset_beats == 0.0);
  CHECK(seq.events[0].duration_beats > 0.0);
}

TEST_CASE("invalid generator configs are rejected") {
  GeneratorConfig cfg;
  cfg.pitch_min = 10;  // below the keyboard
  CHECK_THROWS_AS(generate_event_sequence(cfg, 1), ConfigError);
  GeneratorConfig cfg2;
  cfg2.duration_choices = {-1.0};
  CHECK_THROWS_AS(generate_event_sequence(cfg2, 1), ConfigError);
  GeneratorConfig cfg3;
  cfg3.note_count_min = 5;
  cfg3.note_count_max = 2;
  CHECK_THROWS_AS(generate_event_sequence(cfg3, 1), ConfigError);
}

TEST_CASE("sheet rendering is tempo invariant") {
  GeneratorConfig cfg;
  EventSequence seq = generate_event_sequence(cfg, 11);
  EventSequence slower = seq;
  slower.tempo_bpm = seq.tempo_bpm * 0.5;
  SheetPassage a = render_sheet(seq, 5);
  SheetPassage b = render_sheet(slower, 5);
  REQUIRE(a.pixels.rows() == kSheetHeight);
  REQUIRE(a.pixels.cols() == b.pixels.cols());
  CHECK((a.pixels.array() == b.pixels.array()).all());
  CHECK(a.pixels.minCoeff() >= 0.0f);
  CHECK(a.pixels.maxCoeff() <= 1.0f);
}

TEST_CASE("single glyph lands in the leftmost sheet window") {
  EventSequence seq;
  seq.tempo_bpm = 120;
  seq.events.push_back({0.0, 60, 1.0});
  SheetPassage p = render_sheet(seq, 1);
  REQUIRE(p.pixels.cols() >= kSheetSnippetWidth);
  // staff lines contribute a uniform background; the glyph must add ink
  double window_ink =
      p.pixels.block(0, 0, kSheetHeight, kSheetSnippetWidth).sum();
  double staff_only = 0.22 * 5 * kSheetSnippetWidth;
  CHECK(window_ink > staff_only + 1.0);
}

TEST_CASE("higher pitch is drawn above lower pitch") {
  EventSequence lo, hi;
  lo.tempo_bpm = hi.tempo_bpm = 120;
  lo.events.push_back({0.0, 40, 1.0});
  hi.events.push_back({0.0, 90, 1.0});
  std::vector<AlignmentEntry> align_lo, align_hi;
  SheetPassage pl = render_sheet(lo, 1, {}, &align_lo);
  SheetPassage ph = render_sheet(hi, 1, {}, &align_hi);

  auto ink_center_row = [](const MatF& img, int x0) {
    double num = 0, den = 0;
    for (int y = 0; y < kSheetHeight; ++y)
      for (int x = x0 - 10; x < x0 + 10; ++x) {
        double v = img(y, x) > 0.25f ? img(y, x) : 0.0;
        num += y * v;
        den += v;
      }
    return num / den;
  };
  double row_lo = ink_center_row(pl.pixels, align_lo[0].sheet_x);
  double row_hi = ink_center_row(ph.pixels, align_hi[0].sheet_x);
  CHECK(row_hi < row_lo);  // smaller row index = higher on the page
}

TEST_CASE("audio frame count scales inversely with tempo ratio") {
  GeneratorConfig cfg;
  EventSequence seq = generate_event_sequence(cfg, 21);
  AudioPassage full = render_audio(seq, 1.0, 3);
  AudioPassage twice = render_audio(seq, 2.0, 3);
  REQUIRE(full.spectrogram.rows() == kAudioBins);
  CHECK(std::abs(full.spectrogram.cols() - 2 * twice.spectrogram.cols()) <= 2);
  CHECK(full.duration_seconds() ==
        doctest::Approx(static_cast<double>(full.spectrogram.cols()) / 20.0));
}

TEST_CASE("leading silence sits at the compression floor") {
  EventSequence seq;
  seq.tempo_bpm = 120;
  seq.events.push_back({4.0, 60, 2.0});  // two seconds of silence first
  std::vector<AlignmentEntry> align;
  AudioPassage a = render_audio(seq, 1.0, 1, {}, &align);
  int onset = align[0].frame;
  REQUIRE(onset > 0);
  CHECK(a.spectrogram.leftCols(onset).maxCoeff() == 0.0f);
  CHECK(a.spectrogram.maxCoeff() == doctest::Approx(1.0f));
}

TEST_CASE("timbre seeds share onset support but differ in magnitude") {
  GeneratorConfig cfg;
  EventSequence seq = generate_event_sequence(cfg, 33);
  AudioPassage a = render_audio(seq, 1.0, 100);
  AudioPassage b = render_audio(seq, 1.0, 200);
  REQUIRE(a.spectrogram.cols() == b.spectrogram.cols());

  // oracle: nonzero-column masks computed directly from the matrices
  bool same_support = true;
  bool some_diff = false;
  for (Eigen::Index t = 0; t < a.spectrogram.cols(); ++t) {
    bool na = a.spectrogram.col(t).maxCoeff() > 0.0f;
    bool nb = b.spectrogram.col(t).maxCoeff() > 0.0f;
    if (na != nb) same_support = false;
    if (na && (a.spectrogram.col(t) - b.spectrogram.col(t)).cwiseAbs().maxCoeff() >
                  1e-6f)
      some_diff = true;
  }
  CHECK(same_support);
  CHECK(some_diff);
}

TEST_CASE("tempo_ratio must be positive") {
  GeneratorConfig cfg;
  EventSequence seq = generate_event_sequence(cfg, 2);
  CHECK_THROWS_AS(render_audio(seq, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(render_audio(seq, -1.0, 1), ArgumentError);
}

TEST_CASE("corpus build writes disjoint splits and round-trips") {
  fs::path root = fs::temp_directory_path() / "stretto_corpus_test";
  fs::remove_all(root);

  CorpusConfig cfg;
  cfg.generator = small_generator_config();
  cfg.aug_factor = 3;
  auto manifests = build_corpus(root.string(), cfg, 10, 99);
  REQUIRE(manifests.size() == 3);
  CHECK(manifests[0].records.size() == 8 * 3);  // augmented train records
  CHECK(manifests[0].base_records().size() == 8);
  CHECK(manifests[1].base_records().size() == 1);
  CHECK(manifests[2].base_records().size() == 1);

  // split hygiene: piece ids never repeat across splits
  std::set<std::string> pieces;
  for (const auto& m : manifests)
    for (const auto* rec : m.base_records()) {
      CHECK(pieces.insert(rec->piece_id).second);
    }

  // unique passage ids within each split
  for (const auto& m : manifests) {
    std::set<std::string> ids;
    for (const auto& rec : m.records) CHECK(ids.insert(rec.passage_id).second);
  }

  // the held-out timbre never appears in train
  std::uint64_t held_out = test_timbre_seed(99);
  for (const auto& rec : manifests[0].records)
    CHECK(rec.timbre_seed != held_out);
  for (const auto& rec : manifests[2].records)
    CHECK(rec.timbre_seed == held_out);

  // manifest round trip
  CorpusManifest loaded = load_manifest(root.string(), "train");
  REQUIRE(loaded.records.size() == manifests[0].records.size());
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].passage_id == manifests[0].records[i].passage_id);
    CHECK(loaded.records[i].spec_file == manifests[0].records[i].spec_file);
    CHECK(loaded.records[i].tempo_ratio ==
          doctest::Approx(manifests[0].records[i].tempo_ratio));
    CHECK(loaded.records[i].event_seed == manifests[0].records[i].event_seed);
  }

  // pair loading resolves files and carries the strong alignment
  PassagePair pair = load_pair(loaded, loaded.records[0]);
  CHECK(pair.sheet.pixels.rows() == kSheetHeight);
  CHECK(pair.audio.spectrogram.rows() == kAudioBins);
  REQUIRE(pair.strong_alignment.has_value());
  CHECK_FALSE(pair.strong_alignment->empty());
}

TEST_CASE("corpus generation is bit-deterministic") {
  fs::path r1 = fs::temp_directory_path() / "stretto_corpus_det1";
  fs::path r2 = fs::temp_directory_path() / "stretto_corpus_det2";
  fs::remove_all(r1);
  fs::remove_all(r2);
  CorpusConfig cfg;
  cfg.generator = small_generator_config();
  cfg.aug_factor = 2;
  build_corpus(r1.string(), cfg, 6, 5);
  build_corpus(r2.string(), cfg, 6, 5);

  CorpusManifest m1 = load_manifest(r1.string(), "train");
  CorpusManifest m2 = load_manifest(r2.string(), "train");
  REQUIRE(m1.records.size() == m2.records.size());
  for (std::size_t i = 0; i < m1.records.size(); ++i) {
    MatF a = read_psgf((fs::path(m1.root) / m1.records[i].spec_file).string());
    MatF b = read_psgf((fs::path(m2.root) / m2.records[i].spec_file).string());
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    CHECK((a.array() == b.array()).all());
  }
}

TEST_CASE("augmented train tempo ratios stay inside the configured band") {
  fs::path root = fs::temp_directory_path() / "stretto_corpus_aug";
  fs::remove_all(root);
  CorpusConfig cfg;
  cfg.generator = small_generator_config();
  cfg.aug_factor = 4;
  auto manifests = build_corpus(root.string(), cfg, 6, 17);
  for (const auto& rec : manifests[0].records) {
    if (rec.is_base()) {
      CHECK(rec.tempo_ratio == 1.0);
    } else {
      CHECK(rec.tempo_ratio >= cfg.tempo_aug_min);
      CHECK(rec.tempo_ratio <= cfg.tempo_aug_max);
    }
  }
}

TEST_CASE("snippet pair extraction follows the strong alignment") {
  fs::path root = fs::temp_directory_path() / "stretto_corpus_snip";
  fs::remove_all(root);
  CorpusConfig cfg;
  cfg.generator = small_generator_config();
  cfg.aug_factor = 1;
  auto manifests = build_corpus(root.string(), cfg, 4, 23);
  PassagePair pair = load_pair(manifests[0], manifests[0].records[0]);
  REQUIRE(pair.strong_alignment.has_value());

  auto pairs = extract_snippet_pairs(pair);
  CHECK(pairs.size() == pair.strong_alignment->size());
  for (const auto& [sheet, audio] : pairs) {
    CHECK(sheet.rows() == kSheetHeight);
    CHECK(sheet.cols() == kSheetSnippetWidth);
    CHECK(audio.rows() == kAudioBins);
    CHECK(audio.cols() == kAudioSnippetFrames);
  }

  PassagePair weak = pair;
  weak.strong_alignment.reset();
  CHECK_THROWS_AS(extract_snippet_pairs(weak), UnsupportedError);
}

TEST_CASE("duration model calibration: quarter of passages exceed ten seconds") {
  GeneratorConfig cfg;  // default profile
  int over_10 = 0;
  const int n = 600;
  for (int i = 0; i < n; ++i) {
    EventSequence seq = generate_event_sequence(cfg, 1000 + i);
    double dur = seq.duration_seconds();
    CHECK(dur >= 5.0);
    CHECK(dur <= 25.0);
    if (dur > 10.0) ++over_10;
  }
  CHECK(static_cast<double>(over_10) / n >= 0.25);
}
