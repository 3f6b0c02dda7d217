#include "stretto/sweeps.hpp"

#include "stretto/loss.hpp"
#include "stretto/retrieval.hpp"
#include "stretto/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace stretto {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<SnippetSequence> rerender_audio_sequences(
    const CorpusManifest& test, double ratio, const HopConfig& hops) {
  if (ratio <= 0.0) throw ArgumentError("tempo ratio must be positive");
  std::vector<SnippetSequence> out;
  for (const auto* rec : test.base_records()) {
    EventSequence ev =
        generate_event_sequence(test.config.generator, rec->event_seed);
    AudioPassage audio =
        render_audio(ev, ratio, rec->timbre_seed, test.config.render);
    audio.passage_id = rec->passage_id;
    SnippetSequence seq = slice_passage(audio, hops.audio_hop);
    seq.passage_id = rec->passage_id;
    out.push_back(std::move(seq));
  }
  return out;
}

namespace {

std::vector<SnippetSequence> sheet_sequences(const CorpusManifest& m,
                                             const HopConfig& hops) {
  std::vector<SnippetSequence> out;
  for (const auto* rec : m.base_records()) {
    PassagePair pair = load_pair(m, *rec);
    SnippetSequence seq = slice_passage(pair.sheet, hops.sheet_hop);
    seq.passage_id = rec->passage_id;
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<int> rank_rows_by_cosine(const MatF& queries, const MatF& cands) {
  std::vector<int> ranks;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    Eigen::VectorXf q = queries.row(i).transpose();
    float qn = q.norm();
    float dtrue = 0.0f;
    std::vector<float> dist(static_cast<std::size_t>(cands.rows()));
    for (Eigen::Index j = 0; j < cands.rows(); ++j) {
      float rn = cands.row(j).norm();
      dist[static_cast<std::size_t>(j)] =
          (qn == 0.0f || rn == 0.0f)
              ? 1.0f
              : 1.0f - cands.row(j).dot(q.transpose()) / (rn * qn);
    }
    dtrue = dist[static_cast<std::size_t>(i)];
    int rank = 1;
    for (Eigen::Index j = 0; j < cands.rows(); ++j) {
      if (j == i) continue;
      if (dist[static_cast<std::size_t>(j)] < dtrue ||
          (dist[static_cast<std::size_t>(j)] == dtrue && j < i))
        ++rank;
    }
    ranks.push_back(rank);
  }
  return ranks;
}

// voting retrieval between in-memory snippet sets
std::vector<int> voting_ranks(SnippetModelF& model,
                              const std::vector<SnippetSequence>& queries,
                              Modality query_modality,
                              const std::vector<SnippetSequence>& cands,
                              Modality cand_modality, int top_k) {
  SnippetIndex index;
  index.modality = cand_modality;
  std::vector<MatF> all;
  for (const auto& seq : cands) {
    int parent = static_cast<int>(index.passage_ids.size());
    index.passage_ids.push_back(seq.passage_id);
    for (const auto& s : seq.snippets) {
      all.push_back(s);
      index.parent.push_back(parent);
    }
  }
  index.rows = embed_snippets(model, cand_modality, all);

  std::vector<int> ranks;
  for (const auto& q : queries) {
    RankedList list = baseline_retrieve(q.snippets, q.passage_id, model,
                                        query_modality, index, top_k);
    ranks.push_back(list.true_rank);
  }
  return ranks;
}

}  // namespace

std::vector<DimSweepRow> sweep_embedding_dim(
    const std::vector<int>& dims, const CorpusManifest& train,
    const CorpusManifest& valid, const CorpusManifest& test,
    const TrainConfig& base, const std::string& out_dir) {
  if (dims.empty()) throw ArgumentError("dimension sweep needs dimensions");
  fs::create_directories(out_dir);

  std::vector<DimSweepRow> rows;
  for (int dim : dims) {
    TrainConfig cfg = base;
    cfg.embed_dim = dim;
    cfg.variant = "rnn";
    std::cerr << "[sweep dim] training D=" << dim << "\n";
    PassageModelF model = train_variant(train, valid, cfg);

    std::vector<PassageData> test_data = load_passage_data(test, model.hops);
    SplitRetrieval r = evaluate_split(model, test_data);
    rows.push_back({dim, r.mrr_a2s, r.mrr_s2a});
  }

  json table = json::array();
  for (const auto& r : rows)
    table.push_back(
        json{{"dim", r.dim}, {"mrr_a2s", r.mrr_a2s}, {"mrr_s2a", r.mrr_s2a}});
  std::ofstream tf(fs::path(out_dir) / "mrr_vs_dim.json");
  tf << table.dump(1) << "\n";

  SvgPlot plot("MRR vs embedding dimension", "embedding dimension", "MRR");
  std::vector<double> xs, a2s, s2a;
  for (const auto& r : rows) {
    xs.push_back(static_cast<double>(r.dim));
    a2s.push_back(r.mrr_a2s);
    s2a.push_back(r.mrr_s2a);
  }
  plot.add_line(xs, a2s, "A2S", "#c0392b");
  plot.add_line(xs, s2a, "S2A", "#2980b9");
  plot.save((fs::path(out_dir) / "mrr_vs_dim.svg").string());
  return rows;
}

TempoSweepTable sweep_tempo(const std::vector<double>& ratios,
                            const CorpusManifest& test,
                            const std::map<std::string, std::string>& checkpoints,
                            const std::string& out_dir, int voting_top_k) {
  if (ratios.empty()) throw ArgumentError("tempo sweep needs ratios");
  fs::create_directories(out_dir);

  TempoSweepTable table;
  for (const auto& [name, path] : checkpoints) {
    CheckpointKind kind = peek_checkpoint_kind(path);
    std::vector<TempoSweepCell> cells;
    if (kind == CheckpointKind::Passage) {
      PassageModelF model = load_passage_checkpoint(path);
      std::vector<SnippetSequence> sheets = sheet_sequences(test, model.hops);
      MatF sheet_emb = embed_sequences(model, Modality::Sheet, sheets);
      for (double rho : ratios) {
        std::vector<SnippetSequence> audio =
            rerender_audio_sequences(test, rho, model.hops);
        MatF audio_emb = embed_sequences(model, Modality::Audio, audio);
        TempoSweepCell cell;
        cell.ratio = rho;
        cell.mrr_a2s = mean_reciprocal_rank(rank_rows_by_cosine(audio_emb, sheet_emb));
        cell.mrr_s2a = mean_reciprocal_rank(rank_rows_by_cosine(sheet_emb, audio_emb));
        cells.push_back(cell);
        std::cerr << "[sweep tempo] " << name << " rho=" << rho
                  << " mrr_a2s=" << cell.mrr_a2s << " mrr_s2a=" << cell.mrr_s2a
                  << "\n";
      }
    } else {
      SnippetModelF model = load_snippet_checkpoint(path);
      std::vector<SnippetSequence> sheets = sheet_sequences(test, model.hops);
      for (double rho : ratios) {
        std::vector<SnippetSequence> audio =
            rerender_audio_sequences(test, rho, model.hops);
        TempoSweepCell cell;
        cell.ratio = rho;
        cell.mrr_a2s = mean_reciprocal_rank(voting_ranks(
            model, audio, Modality::Audio, sheets, Modality::Sheet, voting_top_k));
        cell.mrr_s2a = mean_reciprocal_rank(voting_ranks(
            model, sheets, Modality::Sheet, audio, Modality::Audio, voting_top_k));
        cells.push_back(cell);
        std::cerr << "[sweep tempo] " << name << " rho=" << rho
                  << " mrr_a2s=" << cell.mrr_a2s << " mrr_s2a=" << cell.mrr_s2a
                  << "\n";
      }
    }
    table[name] = std::move(cells);
  }

  json j;
  for (const auto& [name, cells] : table) {
    json rows = json::array();
    for (const auto& c : cells)
      rows.push_back(json{{"ratio", c.ratio},
                          {"mrr_a2s", c.mrr_a2s},
                          {"mrr_s2a", c.mrr_s2a}});
    j[name] = rows;
  }
  std::ofstream f(fs::path(out_dir) / "tempo_table.json");
  f << j.dump(1) << "\n";
  return table;
}

std::vector<ScatterPoint> scatter_analysis(PassageModelF& model,
                                           const CorpusManifest& test,
                                           const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto records = test.base_records();
  if (records.empty()) throw ArgumentError("scatter: empty test split");

  std::vector<SnippetSequence> sheets = sheet_sequences(test, model.hops);
  std::vector<SnippetSequence> audios;
  std::vector<double> durations;
  for (const auto* rec : records) {
    PassagePair pair = load_pair(test, *rec);
    SnippetSequence seq = slice_passage(pair.audio, model.hops.audio_hop);
    seq.passage_id = rec->passage_id;
    audios.push_back(std::move(seq));
    durations.push_back(pair.audio.duration_seconds());
  }
  MatF se = embed_sequences(model, Modality::Sheet, sheets);
  MatF ae = embed_sequences(model, Modality::Audio, audios);
  std::vector<int> s2a_ranks = rank_rows_by_cosine(se, ae);

  std::vector<ScatterPoint> points;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ScatterPoint p;
    p.passage_id = records[i]->passage_id;
    p.duration_s = durations[i];
    Eigen::VectorXf u = se.row(static_cast<Eigen::Index>(i)).transpose();
    Eigen::VectorXf v = ae.row(static_cast<Eigen::Index>(i)).transpose();
    p.distance = static_cast<double>(cosine_distance<float>(u, v));
    p.reciprocal_rank = 1.0 / static_cast<double>(s2a_ranks[i]);
    points.push_back(std::move(p));
  }

  std::ofstream csv(fs::path(out_dir) / "scatter.csv");
  csv << "duration_s,distance,reciprocal_rank\n";
  for (const auto& p : points)
    csv << p.duration_s << "," << p.distance << "," << p.reciprocal_rank << "\n";

  SvgPlot plot("Pair distance vs audio duration", "audio duration (s)",
               "cosine distance");
  std::vector<double> xs, ys, radii;
  for (const auto& p : points) {
    xs.push_back(p.duration_s);
    ys.push_back(p.distance);
    // point area tracks precision (reciprocal rank)
    radii.push_back(2.0 + 8.0 * std::sqrt(p.reciprocal_rank));
  }
  plot.add_scatter(xs, ys, radii, "#27ae60");
  plot.save((fs::path(out_dir) / "scatter.svg").string());
  return points;
}

}  // namespace stretto
