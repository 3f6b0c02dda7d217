#include "stretto/retrieval.hpp"

#include "stretto/loss.hpp"
#include "stretto/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stretto {

namespace {

SnippetSequence load_sequence(const CorpusManifest& m, const PassageRecord& rec,
                              Modality modality, const HopConfig& hops) {
  PassagePair pair = load_pair(m, rec);
  if (modality == Modality::Sheet)
    return slice_passage(pair.sheet, hops.sheet_hop);
  return slice_passage(pair.audio, hops.audio_hop);
}

}  // namespace

EmbeddingIndex build_index(PassageModelF& model, const CorpusManifest& manifest,
                           const std::vector<const PassageRecord*>& records,
                           Modality modality, std::uint64_t fingerprint) {
  if (records.empty()) throw ArgumentError("cannot build an index of nothing");
  std::vector<SnippetSequence> seqs;
  seqs.reserve(records.size());
  for (const auto* rec : records)
    seqs.push_back(load_sequence(manifest, *rec, modality, model.hops));

  EmbeddingIndex index;
  index.modality = modality;
  index.fingerprint = fingerprint;
  index.rows = embed_sequences(model, modality, seqs);
  for (const auto* rec : records) index.ids.push_back(rec->passage_id);
  return index;
}

void save_index(const std::string& path, const EmbeddingIndex& index) {
  IndexFile f;
  f.rows = index.rows;
  f.ids = index.ids;
  f.fingerprint = index.fingerprint;
  write_eidx(path, f);
}

EmbeddingIndex load_index(const std::string& path,
                          std::uint64_t expected_fingerprint) {
  IndexFile f = read_eidx(path);
  if (expected_fingerprint != 0 && f.fingerprint != expected_fingerprint)
    throw FormatError("index fingerprint does not match the checkpoint: " + path);
  EmbeddingIndex index;
  index.rows = std::move(f.rows);
  index.ids = std::move(f.ids);
  index.fingerprint = f.fingerprint;
  return index;
}

RankedList query(const EmbeddingIndex& index, const Eigen::VectorXf& q,
                 const std::string& query_id) {
  if (index.size() == 0) throw ArgumentError("query against an empty index");
  if (q.size() != index.dim())
    throw ArgumentError("query dimension does not match the index");

  const int n = index.size();
  std::vector<float> dist(static_cast<std::size_t>(n));
  float qn = q.norm();
  for (int i = 0; i < n; ++i) {
    float rn = index.rows.row(i).norm();
    if (qn == 0.0f || rn == 0.0f) {
      note_zero_norm();
      dist[static_cast<std::size_t>(i)] = 1.0f;
    } else {
      dist[static_cast<std::size_t>(i)] =
          1.0f - index.rows.row(i).dot(q.transpose()) / (rn * qn);
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    float da = dist[static_cast<std::size_t>(a)];
    float db = dist[static_cast<std::size_t>(b)];
    if (da != db) return da < db;
    return index.ids[static_cast<std::size_t>(a)] <
           index.ids[static_cast<std::size_t>(b)];
  });

  RankedList out;
  out.query_id = query_id;
  out.candidate_ids.reserve(static_cast<std::size_t>(n));
  out.distances.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int idx = order[static_cast<std::size_t>(i)];
    out.candidate_ids.push_back(index.ids[static_cast<std::size_t>(idx)]);
    out.distances.push_back(dist[static_cast<std::size_t>(idx)]);
    if (out.candidate_ids.back() == query_id) out.true_rank = i + 1;
  }
  return out;
}

std::vector<RankedList> retrieve_all(const EmbeddingIndex& queries,
                                     const EmbeddingIndex& candidates) {
  if (queries.dim() != candidates.dim())
    throw ArgumentError("indices have different embedding dimensions");
  std::vector<std::string> a = queries.ids, b = candidates.ids;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b)
    throw ArgumentError("query and candidate indices cover different passages");

  std::vector<RankedList> out;
  out.reserve(queries.ids.size());
  for (int i = 0; i < queries.size(); ++i)
    out.push_back(query(candidates, queries.rows.row(i).transpose(),
                        queries.ids[static_cast<std::size_t>(i)]));
  return out;
}

// ---------------------------------------------------------------------------

SnippetIndex build_snippet_index(SnippetModelF& model,
                                 const CorpusManifest& manifest,
                                 const std::vector<const PassageRecord*>& records,
                                 Modality modality) {
  if (records.empty()) throw ArgumentError("cannot build an index of nothing");
  SnippetIndex index;
  index.modality = modality;

  std::vector<MatF> all;
  for (const auto* rec : records) {
    SnippetSequence seq = load_sequence(manifest, *rec, modality, model.hops);
    int parent = static_cast<int>(index.passage_ids.size());
    index.passage_ids.push_back(rec->passage_id);
    for (auto& s : seq.snippets) {
      all.push_back(std::move(s));
      index.parent.push_back(parent);
    }
  }
  index.rows = embed_snippets(model, modality, all);
  return index;
}

RankedList vote_rank(const MatF& q, const std::string& query_id,
                     const SnippetIndex& candidates, int top_k) {
  if (q.rows() == 0) throw ArgumentError("query passage has no snippets");
  if (top_k < 1) throw ArgumentError("top_k must be >= 1");
  const int n_snips = static_cast<int>(candidates.rows.rows());
  const int n_passages = static_cast<int>(candidates.passage_ids.size());
  if (n_snips == 0 || n_passages == 0)
    throw ArgumentError("candidate snippet index is empty");
  int k = std::min(top_k, n_snips);

  std::vector<int> votes(static_cast<std::size_t>(n_passages), 0);
  std::vector<double> hit_dist(static_cast<std::size_t>(n_passages), 0.0);

  std::vector<int> order(static_cast<std::size_t>(n_snips));
  std::vector<float> dist(static_cast<std::size_t>(n_snips));
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    Eigen::VectorXf qe = q.row(s).transpose();
    float qn = qe.norm();
    for (int i = 0; i < n_snips; ++i) {
      float rn = candidates.rows.row(i).norm();
      if (qn == 0.0f || rn == 0.0f) {
        note_zero_norm();
        dist[static_cast<std::size_t>(i)] = 1.0f;
      } else {
        dist[static_cast<std::size_t>(i)] =
            1.0f - candidates.rows.row(i).dot(qe.transpose()) / (rn * qn);
      }
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) {
                        float da = dist[static_cast<std::size_t>(a)];
                        float db = dist[static_cast<std::size_t>(b)];
                        if (da != db) return da < db;
                        int pa = candidates.parent[static_cast<std::size_t>(a)];
                        int pb = candidates.parent[static_cast<std::size_t>(b)];
                        if (pa != pb)
                          return candidates.passage_ids[static_cast<std::size_t>(pa)] <
                                 candidates.passage_ids[static_cast<std::size_t>(pb)];
                        return a < b;
                      });
    for (int j = 0; j < k; ++j) {
      int row = order[static_cast<std::size_t>(j)];
      int p = candidates.parent[static_cast<std::size_t>(row)];
      votes[static_cast<std::size_t>(p)] += 1;
      hit_dist[static_cast<std::size_t>(p)] += dist[static_cast<std::size_t>(row)];
    }
  }

  std::vector<int> passage_order(static_cast<std::size_t>(n_passages));
  std::iota(passage_order.begin(), passage_order.end(), 0);
  std::sort(passage_order.begin(), passage_order.end(), [&](int a, int b) {
    if (votes[static_cast<std::size_t>(a)] != votes[static_cast<std::size_t>(b)])
      return votes[static_cast<std::size_t>(a)] > votes[static_cast<std::size_t>(b)];
    if (hit_dist[static_cast<std::size_t>(a)] != hit_dist[static_cast<std::size_t>(b)])
      return hit_dist[static_cast<std::size_t>(a)] < hit_dist[static_cast<std::size_t>(b)];
    return candidates.passage_ids[static_cast<std::size_t>(a)] <
           candidates.passage_ids[static_cast<std::size_t>(b)];
  });

  // a score that is non-decreasing along the ranking stands in for the
  // cosine distance of the direct models
  int max_votes = static_cast<int>(query_snippets.size()) * k;
  RankedList out;
  out.query_id = query_id;
  for (int i = 0; i < n_passages; ++i) {
    int p = passage_order[static_cast<std::size_t>(i)];
    out.candidate_ids.push_back(candidates.passage_ids[static_cast<std::size_t>(p)]);
    double score = static_cast<double>(max_votes - votes[static_cast<std::size_t>(p)]) +
                   hit_dist[static_cast<std::size_t>(p)] /
                       (1.0 + hit_dist[static_cast<std::size_t>(p)]);
    out.distances.push_back(static_cast<float>(score));
    if (out.candidate_ids.back() == query_id) out.true_rank = i + 1;
  }
  return out;
}

std::vector<RankedList> baseline_retrieve_all(
    SnippetModelF& model, const CorpusManifest& manifest,
    const std::vector<const PassageRecord*>& query_records,
    Modality query_modality, const SnippetIndex& candidates, int top_k) {
  std::vector<RankedList> out;
  out.reserve(query_records.size());
  for (const auto* rec : query_records) {
    SnippetSequence seq =
        load_sequence(manifest, *rec, query_modality, model.hops);
    out.push_back(baseline_retrieve(seq.snippets, rec->passage_id, model,
                                    query_modality, candidates, top_k));
  }
  return out;
}

}  // namespace stretto
