#include "cardl/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "cardl/errors.hpp"

namespace cardl {

double precision_at(const std::vector<bool>& relevance, std::size_t r) {
  if (r < 1 || r > relevance.size()) {
    throw UsageError("precision position " + std::to_string(r) + " outside 1.." +
                     std::to_string(relevance.size()));
  }
  const auto hits = std::count(relevance.begin(), relevance.begin() + static_cast<std::ptrdiff_t>(r), true);
  return static_cast<double>(hits) / static_cast<double>(r);
}

double average_precision(const std::vector<bool>& relevance, std::size_t total_relevant) {
  const std::size_t denominator = std::min(total_relevant, relevance.size());
  if (denominator == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < relevance.size(); ++r) {
    if (!relevance[r]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(denominator);
}

double mean_average_precision(std::span<const double> ap_values) {
  if (ap_values.empty()) throw DataError("no judged queries");
  double sum = 0.0;
  for (double ap : ap_values) sum += ap;
  return sum / static_cast<double>(ap_values.size());
}

EvalReport evaluate_retrieval(const AlignmentModel& model, const UnifiedIndex& index,
                              std::span<const FeatureRecord> queries,
                              const RelevanceJudgments& qrels, std::span<const std::size_t> k_list,
                              Direction direction) {
  if (k_list.empty()) throw UsageError("k list is empty");
  for (std::size_t k : k_list) {
    if (k == 0) throw UsageError("k must be at least 1");
  }

  std::vector<const FeatureRecord*> ordered;
  for (const auto& q : queries) {
    if (q.modality != source_modality(direction)) {
      throw UsageError(std::string(to_string(direction)) + " query '" + q.id + "' is " +
                       std::string(to_string(q.modality)));
    }
    ordered.push_back(&q);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const FeatureRecord* a, const FeatureRecord* b) { return a->id < b->id; });

  EvalReport report;
  report.direction = direction;
  report.k_list.assign(k_list.begin(), k_list.end());
  for (const FeatureRecord* query : ordered) {
    auto judged = qrels.find(query->id);
    if (judged == qrels.end() || judged->second.empty()) {
      ++report.skipped;
      continue;
    }
    const auto& relevant = judged->second;
    QueryScore score{query->id, {}};
    for (std::size_t k : k_list) {
      const auto results = cross_media_search(model, index, *query, k, direction);
      std::vector<bool> flags;
      flags.reserve(results.size());
      for (const auto& r : results) flags.push_back(relevant.contains(r.id));
      score.ap.push_back(average_precision(flags, relevant.size()));
    }
    report.queries.push_back(std::move(score));
  }
  report.evaluated = report.queries.size();
  if (report.evaluated == 0) {
    throw DataError(std::string("no judged queries for ") + std::string(to_string(direction)));
  }

  for (std::size_t c = 0; c < k_list.size(); ++c) {
    std::vector<double> column;
    column.reserve(report.queries.size());
    for (const auto& q : report.queries) column.push_back(q.ap[c]);
    report.map.push_back(mean_average_precision(column));
  }
  return report;
}

std::string format_report_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "# " << kApConvention << "\n";
  if (reports.empty()) return out.str();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s %6s %8s", "direction", "Q", "skipped");
  out << buf;
  for (std::size_t k : reports.front().k_list) {
    std::snprintf(buf, sizeof buf, " %8s", ("MAP@" + std::to_string(k)).c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& report : reports) {
    std::snprintf(buf, sizeof buf, "%-10s %6zu %8zu", std::string(to_string(report.direction)).c_str(),
                  report.evaluated, report.skipped);
    out << buf;
    for (double m : report.map) {
      std::snprintf(buf, sizeof buf, " %8.4f", m);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace cardl
