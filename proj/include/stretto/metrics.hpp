#ifndef STRETTO_METRICS_HPP
#define STRETTO_METRICS_HPP

#include "stretto/common.hpp"

#include <map>
#include <string>
#include <vector>

namespace stretto {

struct RankedList {
  std::string query_id;
  std::vector<std::string> candidate_ids;  // ascending distance
  std::vector<float> distances;
  int true_rank = 0;  // 1-based position of the true match
  int num_candidates() const { return static_cast<int>(candidate_ids.size()); }
};

// percent of ranks <= k
double recall_at_k(const std::vector<int>& ranks, int k);
// mean of 1/rank
double mean_reciprocal_rank(const std::vector<int>& ranks);
// lower median, so the value is always an attained rank
double median_rank(const std::vector<int>& ranks);

struct EvalReport {
  std::string direction;  // A2S | S2A
  std::string dataset;
  std::string variant;
  int num_queries = 0;
  int num_candidates = 0;
  double r_at_1 = 0, r_at_10 = 0, r_at_25 = 0;  // percent
  double mrr = 0;
  double mr = 0;
  std::vector<int> ranks;  // per query, input order
  std::map<std::string, std::string> fingerprints;
};

EvalReport evaluate(const std::vector<RankedList>& lists,
                    const std::string& direction, const std::string& dataset,
                    const std::string& variant,
                    const std::map<std::string, std::string>& fingerprints = {});

void write_report(const std::string& path, const EvalReport& report);
EvalReport read_report(const std::string& path);

// ranks.json: per-query true rank plus the ten nearest candidates.
void write_ranks(const std::string& path, const std::vector<RankedList>& lists,
                 const std::string& direction);
struct RanksFile {
  std::string direction;
  int num_candidates = 0;
  std::vector<RankedList> lists;  // candidate lists truncated to the top 10
};
RanksFile read_ranks(const std::string& path);

}  // namespace stretto

#endif
