#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/features.hpp"
#include "cardl/retrieval.hpp"
#include "cardl/types.hpp"

namespace cardl {

// query id -> ids of the relevant documents. A query that is absent or maps
// to an empty set is unjudged.
using RelevanceJudgments = std::map<std::string, std::set<std::string>>;

// Denominator convention for AP@R, printed in every report.
inline constexpr const char* kApConvention =
    "AP@R = sum_{r<=R} P(r) rel(r) / R', R' = min(|relevant|, R); unjudged queries skipped";

inline const std::vector<std::size_t> kDefaultKList{1, 5, 10};

// Fraction of relevant results among the first r (1-based).
double precision_at(const std::vector<bool>& relevance, std::size_t r);

// sum_{r=1..R} P(r) * rel(r) / min(total_relevant, R), or 0 when that
// denominator is 0.
double average_precision(const std::vector<bool>& relevance, std::size_t total_relevant);

// Arithmetic mean; throws DataError on an empty list.
double mean_average_precision(std::span<const double> ap_values);

struct QueryScore {
  std::string query_id;
  std::vector<double> ap;  // one per k, aligned with EvalReport::k_list

  bool operator==(const QueryScore&) const = default;
};

struct EvalReport {
  Direction direction = Direction::kTextToImage;
  std::vector<std::size_t> k_list;
  std::vector<double> map;         // aligned with k_list
  std::vector<QueryScore> queries;  // judged queries, ascending id
  std::size_t evaluated = 0;
  std::size_t skipped = 0;

  bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate_retrieval(const AlignmentModel& model, const UnifiedIndex& index,
                              std::span<const FeatureRecord> queries,
                              const RelevanceJudgments& qrels, std::span<const std::size_t> k_list,
                              Direction direction);

// Aligned plain-text table: one row per report, one MAP@k column per k.
std::string format_report_table(std::span<const EvalReport> reports);

}  // namespace cardl
