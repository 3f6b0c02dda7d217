#include "stretto/corpus.hpp"

#include "stretto/matrix_io.hpp"
#include "stretto/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace stretto {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json generator_to_json(const GeneratorConfig& g) {
  return json{{"pitch_min", g.pitch_min},
              {"pitch_max", g.pitch_max},
              {"note_count_min", g.note_count_min},
              {"note_count_max", g.note_count_max},
              {"ioi_choices", g.ioi_choices},
              {"duration_choices", g.duration_choices},
              {"tempo_min_bpm", g.tempo_min_bpm},
              {"tempo_max_bpm", g.tempo_max_bpm},
              {"beats_min", g.beats_min},
              {"beats_max", g.beats_max},
              {"max_pitch_step", g.max_pitch_step}};
}

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig g;
  g.pitch_min = j.value("pitch_min", g.pitch_min);
  g.pitch_max = j.value("pitch_max", g.pitch_max);
  g.note_count_min = j.value("note_count_min", g.note_count_min);
  g.note_count_max = j.value("note_count_max", g.note_count_max);
  g.ioi_choices = j.value("ioi_choices", g.ioi_choices);
  g.duration_choices = j.value("duration_choices", g.duration_choices);
  g.tempo_min_bpm = j.value("tempo_min_bpm", g.tempo_min_bpm);
  g.tempo_max_bpm = j.value("tempo_max_bpm", g.tempo_max_bpm);
  g.beats_min = j.value("beats_min", g.beats_min);
  g.beats_max = j.value("beats_max", g.beats_max);
  g.max_pitch_step = j.value("max_pitch_step", g.max_pitch_step);
  return g;
}

json render_to_json(const RenderConfig& r) {
  return json{{"px_per_beat", r.px_per_beat},
              {"sheet_margin", r.sheet_margin},
              {"harmonics", r.harmonics},
              {"log_gain", r.log_gain}};
}

RenderConfig render_from_json(const json& j) {
  RenderConfig r;
  r.px_per_beat = j.value("px_per_beat", r.px_per_beat);
  r.sheet_margin = j.value("sheet_margin", r.sheet_margin);
  r.harmonics = j.value("harmonics", r.harmonics);
  r.log_gain = j.value("log_gain", r.log_gain);
  return r;
}

json corpus_config_to_json(const CorpusConfig& c) {
  return json{{"generator", generator_to_json(c.generator)},
              {"render", render_to_json(c.render)},
              {"split_ratios", c.split_ratios},
              {"aug_factor", c.aug_factor},
              {"tempo_aug_min", c.tempo_aug_min},
              {"tempo_aug_max", c.tempo_aug_max},
              {"n_train_timbres", c.n_train_timbres},
              {"write_alignments", c.write_alignments}};
}

CorpusConfig corpus_config_from_json(const json& j) {
  CorpusConfig c;
  if (j.contains("generator")) c.generator = generator_from_json(j["generator"]);
  if (j.contains("render")) c.render = render_from_json(j["render"]);
  if (j.contains("split_ratios")) {
    auto v = j["split_ratios"].get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("split_ratios must have 3 entries");
    c.split_ratios = {v[0], v[1], v[2]};
  }
  c.aug_factor = j.value("aug_factor", c.aug_factor);
  c.tempo_aug_min = j.value("tempo_aug_min", c.tempo_aug_min);
  c.tempo_aug_max = j.value("tempo_aug_max", c.tempo_aug_max);
  c.n_train_timbres = j.value("n_train_timbres", c.n_train_timbres);
  c.write_alignments = j.value("write_alignments", c.write_alignments);
  return c;
}

json record_to_json(const PassageRecord& r) {
  return json{{"passage_id", r.passage_id},
              {"base_passage_id", r.base_passage_id},
              {"piece_id", r.piece_id},
              {"sheet_file", r.sheet_file},
              {"spec_file", r.spec_file},
              {"align_file", r.align_file},
              {"duration_seconds", r.duration_seconds},
              {"tempo_ratio", r.tempo_ratio},
              {"timbre_seed", r.timbre_seed},
              {"event_seed", r.event_seed},
              {"aug_index", r.aug_index}};
}

PassageRecord record_from_json(const json& j) {
  PassageRecord r;
  r.passage_id = j.at("passage_id").get<std::string>();
  r.base_passage_id = j.value("base_passage_id", r.passage_id);
  r.piece_id = j.at("piece_id").get<std::string>();
  r.sheet_file = j.at("sheet_file").get<std::string>();
  r.spec_file = j.at("spec_file").get<std::string>();
  r.align_file = j.value("align_file", std::string{});
  r.duration_seconds = j.at("duration_seconds").get<double>();
  r.tempo_ratio = j.value("tempo_ratio", 1.0);
  r.timbre_seed = j.value("timbre_seed", std::uint64_t{0});
  r.event_seed = j.value("event_seed", std::uint64_t{0});
  r.aug_index = j.value("aug_index", 0);
  return r;
}

std::string format_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
  return buf;
}

void write_align_json(const std::string& path,
                      const std::vector<AlignmentEntry>& entries) {
  json arr = json::array();
  for (const auto& a : entries)
    arr.push_back(json{{"event", a.event}, {"sheet_x", a.sheet_x}, {"frame", a.frame}});
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << arr.dump(1) << "\n";
}

std::vector<AlignmentEntry> read_align_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  json arr = json::parse(f);
  std::vector<AlignmentEntry> entries;
  for (const auto& a : arr)
    entries.push_back({a.at("event").get<int>(), a.at("sheet_x").get<int>(),
                       a.at("frame").get<int>()});
  return entries;
}

}  // namespace

void CorpusConfig::validate() const {
  generator.validate();
  render.validate();
  double sum = split_ratios[0] + split_ratios[1] + split_ratios[2];
  for (double r : split_ratios)
    if (r < 0.0) throw ConfigError("split ratios must be non-negative");
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (split_ratios[0] <= 0.0) throw ConfigError("train ratio must be positive");
  if (aug_factor < 1) throw ConfigError("aug_factor must be >= 1");
  if (tempo_aug_min <= 0.0 || tempo_aug_min > tempo_aug_max)
    throw ConfigError("tempo augmentation range invalid");
  if (n_train_timbres < 1) throw ConfigError("need at least one train timbre");
}

std::string corpus_config_to_json_text(const CorpusConfig& config) {
  return corpus_config_to_json(config).dump(1);
}

CorpusConfig corpus_config_from_json_text(const std::string& text) {
  return corpus_config_from_json(json::parse(text));
}

std::vector<const PassageRecord*> CorpusManifest::base_records() const {
  std::vector<const PassageRecord*> out;
  for (const auto& r : records)
    if (r.is_base()) out.push_back(&r);
  return out;
}

std::uint64_t test_timbre_seed(std::uint64_t corpus_seed) {
  return substream_seed(corpus_seed, "timbre/test");
}

std::vector<CorpusManifest> build_corpus(const std::string& root,
                                         const CorpusConfig& config,
                                         int n_pairs, std::uint64_t seed) {
  config.validate();
  if (n_pairs < 1) throw ConfigError("n_pairs must be >= 1");

  int n_train = static_cast<int>(std::floor(config.split_ratios[0] * n_pairs));
  int n_valid = static_cast<int>(std::floor(config.split_ratios[1] * n_pairs));
  n_train = std::max(1, n_train);
  n_valid = std::min(n_valid, n_pairs - n_train);
  int n_test = n_pairs - n_train - n_valid;

  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create corpus root: " + root);

  // train timbre pool from dedicated substreams; test timbre held out
  std::vector<std::uint64_t> train_timbres;
  for (int i = 0; i < config.n_train_timbres; ++i)
    train_timbres.push_back(
        substream_seed(seed, "timbre/train/" + std::to_string(i)));
  std::uint64_t held_out_timbre = test_timbre_seed(seed);

  const char* split_names[3] = {"train", "valid", "test"};
  int split_sizes[3] = {n_train, n_valid, n_test};

  std::vector<CorpusManifest> manifests;
  int pair_index = 0;
  for (int s = 0; s < 3; ++s) {
    CorpusManifest m;
    m.split = split_names[s];
    m.root = (fs::path(root) / m.split).string();
    m.config = config;
    m.seed = seed;
    fs::create_directories(m.root, ec);
    if (ec) throw IoError("cannot create split dir: " + m.root);

    for (int i = 0; i < split_sizes[s]; ++i, ++pair_index) {
      std::uint64_t ev_seed =
          substream_seed(seed, "pair/" + std::to_string(pair_index));
      EventSequence ev = generate_event_sequence(config.generator, ev_seed);
      std::string piece = format_id("pc", pair_index);
      std::string base_passage = format_id("p", pair_index);

      std::vector<AlignmentEntry> sheet_align;
      SheetPassage sheet = render_sheet(
          ev, substream_seed(ev_seed, "style"), config.render,
          config.write_alignments ? &sheet_align : nullptr);
      std::string sheet_file = piece + "_" + base_passage + ".sheet.f32";
      write_psgf((fs::path(m.root) / sheet_file).string(), sheet.pixels);

      int n_records = (s == 0) ? config.aug_factor : 1;
      Rng aug(ev_seed, "augment");
      for (int a = 0; a < n_records; ++a) {
        double ratio = 1.0;
        std::uint64_t timbre = train_timbres[0];
        if (s == 2) {
          timbre = held_out_timbre;
        } else if (a > 0) {
          ratio = aug.uniform(config.tempo_aug_min, config.tempo_aug_max);
          timbre = train_timbres[static_cast<std::size_t>(a) % train_timbres.size()];
        }

        std::vector<AlignmentEntry> audio_align;
        AudioPassage audio = render_audio(
            ev, ratio, timbre, config.render,
            config.write_alignments ? &audio_align : nullptr);

        PassageRecord rec;
        rec.base_passage_id = base_passage;
        rec.passage_id =
            a == 0 ? base_passage : base_passage + ".a" + std::to_string(a);
        rec.piece_id = piece;
        rec.sheet_file = sheet_file;
        rec.spec_file = piece + "_" + rec.passage_id + ".spec.f32";
        rec.duration_seconds = audio.duration_seconds();
        rec.tempo_ratio = ratio;
        rec.timbre_seed = timbre;
        rec.event_seed = ev_seed;
        rec.aug_index = a;
        write_psgf((fs::path(m.root) / rec.spec_file).string(),
                   audio.spectrogram);

        if (config.write_alignments) {
          // zip per-event coordinates from the two renderings
          std::vector<AlignmentEntry> merged;
          merged.reserve(sheet_align.size());
          for (std::size_t k = 0; k < sheet_align.size(); ++k)
            merged.push_back({sheet_align[k].event, sheet_align[k].sheet_x,
                              audio_align[k].frame});
          rec.align_file = piece + "_" + rec.passage_id + ".align.json";
          write_align_json((fs::path(m.root) / rec.align_file).string(), merged);
        }
        m.records.push_back(std::move(rec));
      }
    }

    json j{{"schema_version", m.schema_version},
           {"split", m.split},
           {"seed", m.seed},
           {"generator", corpus_config_to_json(config)},
           {"records", json::array()}};
    for (const auto& r : m.records) j["records"].push_back(record_to_json(r));
    std::ofstream f(fs::path(m.root) / "manifest.json");
    if (!f) throw IoError("cannot write manifest in " + m.root);
    f << j.dump(1) << "\n";
    manifests.push_back(std::move(m));
  }
  return manifests;
}

CorpusManifest load_manifest(const std::string& root, const std::string& split) {
  fs::path dir = fs::path(root) / split;
  std::ifstream f(dir / "manifest.json");
  if (!f) throw IoError("cannot open manifest in " + dir.string());
  json j = json::parse(f);
  CorpusManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  m.split = j.at("split").get<std::string>();
  m.seed = j.value("seed", std::uint64_t{0});
  m.root = dir.string();
  m.config = corpus_config_from_json(j.at("generator"));
  for (const auto& rj : j.at("records")) m.records.push_back(record_from_json(rj));
  return m;
}

PassagePair load_pair(const CorpusManifest& m, const PassageRecord& rec) {
  PassagePair pair;
  pair.sheet.pixels = read_psgf((fs::path(m.root) / rec.sheet_file).string());
  pair.sheet.passage_id = rec.passage_id;
  pair.sheet.piece_id = rec.piece_id;
  pair.audio.spectrogram = read_psgf((fs::path(m.root) / rec.spec_file).string());
  pair.audio.passage_id = rec.passage_id;
  pair.audio.piece_id = rec.piece_id;
  if (!rec.align_file.empty())
    pair.strong_alignment =
        read_align_json((fs::path(m.root) / rec.align_file).string());
  return pair;
}

std::vector<std::pair<MatF, MatF>> extract_snippet_pairs(const PassagePair& pair) {
  if (!pair.strong_alignment)
    throw UnsupportedError("snippet extraction needs a strong alignment");

  const MatF& sheet = pair.sheet.pixels;
  const MatF& spec = pair.audio.spectrogram;
  int sheet_w = static_cast<int>(sheet.cols());
  int frames = static_cast<int>(spec.cols());

  std::vector<std::pair<MatF, MatF>> out;
  out.reserve(pair.strong_alignment->size());
  for (const auto& a : *pair.strong_alignment) {
    // center the window on the anchor, clipped into the passage; passage
    // invariants (W >= 180, T >= 20) make padding unreachable
    int sx = std::clamp(a.sheet_x - kSheetSnippetWidth / 2, 0,
                        sheet_w - kSheetSnippetWidth);
    int fx = std::clamp(a.frame - kAudioSnippetFrames / 2, 0,
                        frames - kAudioSnippetFrames);
    out.emplace_back(sheet.block(0, sx, kSheetHeight, kSheetSnippetWidth),
                     spec.block(0, fx, kAudioBins, kAudioSnippetFrames));
  }
  return out;
}

}  // namespace stretto
