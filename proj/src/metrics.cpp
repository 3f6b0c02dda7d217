#include "stretto/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace stretto {

using nlohmann::json;

double recall_at_k(const std::vector<int>& ranks, int k) {
  if (ranks.empty()) throw ArgumentError("recall: no ranks");
  if (k < 1) throw ArgumentError("recall: k must be >= 1");
  std::size_t hits = 0;
  for (int r : ranks)
    if (r <= k) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mean_reciprocal_rank(const std::vector<int>& ranks) {
  if (ranks.empty()) throw ArgumentError("mrr: no ranks");
  double sum = 0.0;
  for (int r : ranks) {
    if (r < 1) throw ArgumentError("mrr: ranks must be >= 1");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

double median_rank(const std::vector<int>& ranks) {
  if (ranks.empty()) throw ArgumentError("median: no ranks");
  std::vector<int> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<double>(sorted[(sorted.size() - 1) / 2]);
}

EvalReport evaluate(const std::vector<RankedList>& lists,
                    const std::string& direction, const std::string& dataset,
                    const std::string& variant,
                    const std::map<std::string, std::string>& fingerprints) {
  if (lists.empty()) throw ArgumentError("evaluate: no ranked lists");
  EvalReport rep;
  rep.direction = direction;
  rep.dataset = dataset;
  rep.variant = variant;
  rep.fingerprints = fingerprints;
  rep.num_queries = static_cast<int>(lists.size());
  rep.num_candidates = lists.front().num_candidates();
  for (const auto& l : lists) {
    if (l.num_candidates() != rep.num_candidates)
      throw ArgumentError("evaluate: inconsistent candidate counts");
    if (l.true_rank < 1)
      throw ArgumentError("evaluate: ranked list without a true rank");
    rep.ranks.push_back(l.true_rank);
  }
  rep.r_at_1 = recall_at_k(rep.ranks, 1);
  rep.r_at_10 = recall_at_k(rep.ranks, 10);
  rep.r_at_25 = recall_at_k(rep.ranks, 25);
  rep.mrr = mean_reciprocal_rank(rep.ranks);
  rep.mr = median_rank(rep.ranks);
  return rep;
}

void write_report(const std::string& path, const EvalReport& rep) {
  json j{{"direction", rep.direction},
         {"dataset", rep.dataset},
         {"variant", rep.variant},
         {"num_queries", rep.num_queries},
         {"num_candidates", rep.num_candidates},
         {"r_at_1", rep.r_at_1},
         {"r_at_10", rep.r_at_10},
         {"r_at_25", rep.r_at_25},
         {"mrr", rep.mrr},
         {"mr", rep.mr},
         {"ranks", rep.ranks},
         {"fingerprints", rep.fingerprints}};
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(1) << "\n";
}

EvalReport read_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  json j = json::parse(f);
  EvalReport rep;
  rep.direction = j.at("direction").get<std::string>();
  rep.dataset = j.at("dataset").get<std::string>();
  rep.variant = j.at("variant").get<std::string>();
  rep.num_queries = j.at("num_queries").get<int>();
  rep.num_candidates = j.at("num_candidates").get<int>();
  rep.r_at_1 = j.at("r_at_1").get<double>();
  rep.r_at_10 = j.at("r_at_10").get<double>();
  rep.r_at_25 = j.at("r_at_25").get<double>();
  rep.mrr = j.at("mrr").get<double>();
  rep.mr = j.at("mr").get<double>();
  rep.ranks = j.at("ranks").get<std::vector<int>>();
  rep.fingerprints =
      j.at("fingerprints").get<std::map<std::string, std::string>>();
  return rep;
}

void write_ranks(const std::string& path, const std::vector<RankedList>& lists,
                 const std::string& direction) {
  if (lists.empty()) throw ArgumentError("write_ranks: no lists");
  json queries = json::array();
  for (const auto& l : lists) {
    json top = json::array();
    int n = std::min<int>(10, l.num_candidates());
    for (int i = 0; i < n; ++i)
      top.push_back(json{{"id", l.candidate_ids[static_cast<std::size_t>(i)]},
                         {"distance", l.distances[static_cast<std::size_t>(i)]}});
    queries.push_back(json{{"query_id", l.query_id},
                           {"true_rank", l.true_rank},
                           {"top10", top}});
  }
  json j{{"direction", direction},
         {"num_candidates", lists.front().num_candidates()},
         {"queries", queries}};
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(1) << "\n";
}

RanksFile read_ranks(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  json j = json::parse(f);
  RanksFile out;
  out.direction = j.at("direction").get<std::string>();
  out.num_candidates = j.at("num_candidates").get<int>();
  for (const auto& q : j.at("queries")) {
    RankedList l;
    l.query_id = q.at("query_id").get<std::string>();
    l.true_rank = q.at("true_rank").get<int>();
    for (const auto& t : q.at("top10")) {
      l.candidate_ids.push_back(t.at("id").get<std::string>());
      l.distances.push_back(t.at("distance").get<float>());
    }
    // only the head of the candidate list is serialized; keep the real count
    while (l.candidate_ids.size() < static_cast<std::size_t>(out.num_candidates)) {
      l.candidate_ids.emplace_back();
      l.distances.push_back(l.distances.empty() ? 0.0f : l.distances.back());
    }
    out.lists.push_back(std::move(l));
  }
  return out;
}

}  // namespace stretto
