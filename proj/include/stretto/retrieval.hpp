#ifndef STRETTO_RETRIEVAL_HPP
#define STRETTO_RETRIEVAL_HPP

#include "stretto/common.hpp"
#include "stretto/corpus.hpp"
#include "stretto/metrics.hpp"
#include "stretto/model.hpp"

#include <string>
#include <vector>

namespace stretto {

// Immutable embedding table: one row per passage.
struct EmbeddingIndex {
  MatF rows;  // (num_items, D)
  std::vector<std::string> ids;
  Modality modality = Modality::Audio;
  std::uint64_t fingerprint = 0;  // producing checkpoint

  int size() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
};

// Embeds every record of one modality with the recurrent model;
// deterministic and ordered by the input record order.
EmbeddingIndex build_index(PassageModelF& model, const CorpusManifest& manifest,
                           const std::vector<const PassageRecord*>& records,
                           Modality modality, std::uint64_t fingerprint = 0);

void save_index(const std::string& path, const EmbeddingIndex& index);
EmbeddingIndex load_index(const std::string& path,
                          std::uint64_t expected_fingerprint = 0);

// Exact brute-force scan: ascending cosine distance, ties broken by id.
RankedList query(const EmbeddingIndex& index, const Eigen::VectorXf& q,
                 const std::string& query_id);

// One ranked list per query row; requires equal dimensions and an identical
// passage-id universe on both sides.
std::vector<RankedList> retrieve_all(const EmbeddingIndex& queries,
                                     const EmbeddingIndex& candidates);

// ---------------------------------------------------------------------------
// baseline snippet voting

// Snippet-level table for one modality of a candidate set: each row is one
// snippet embedding, tagged with its parent passage.
struct SnippetIndex {
  MatF rows;  // (num_snippets, code_dim)
  std::vector<int> parent;            // index into passage_ids
  std::vector<std::string> passage_ids;
  Modality modality = Modality::Audio;
};

SnippetIndex build_snippet_index(SnippetModelF& model,
                                 const CorpusManifest& manifest,
                                 const std::vector<const PassageRecord*>& records,
                                 Modality modality);

// Voting core on precomputed embeddings: every query-snippet row casts
// top_k votes on the parents of its nearest candidate snippets; passages
// are ranked by votes (desc), then summed hit distance (asc), then id.
RankedList vote_rank(const MatF& query_snippet_embs, const std::string& query_id,
                     const SnippetIndex& candidates, int top_k);

// Short-snippet voting with the baseline model embedding the query.
RankedList baseline_retrieve(const std::vector<MatF>& query_snippets,
                             const std::string& query_id,
                             SnippetModelF& model, Modality query_modality,
                             const SnippetIndex& candidates, int top_k = 5);

std::vector<RankedList> baseline_retrieve_all(
    SnippetModelF& model, const CorpusManifest& manifest,
    const std::vector<const PassageRecord*>& query_records,
    Modality query_modality, const SnippetIndex& candidates, int top_k = 5);

}  // namespace stretto

#endif
