#include "cardl/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "cardl/errors.hpp"

namespace cardl {

Vector l2_normalize(std::span<const double> v) {
  require_finite(v, "vector to normalize");
  const double norm = l2_norm(v);
  if (norm == 0.0) throw NumericError("cannot normalize the zero vector");
  Vector out(v.begin(), v.end());
  for (double& e : out) e /= norm;
  return out;
}

double cosine_sim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("cosine of vectors with dims " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  const double nx = l2_norm(x);
  const double ny = l2_norm(y);
  if (nx == 0.0 || ny == 0.0) throw NumericError("cosine similarity with a zero vector");
  return std::clamp(dot(x, y) / (nx * ny), -1.0, 1.0);
}

UnifiedIndex UnifiedIndex::build(std::vector<IndexEntry> items) {
  const std::size_t dim = items.empty() ? 0 : items.front().vector.size();
  for (auto& item : items) {
    if (item.vector.size() != dim) {
      throw DimensionError("index entry '" + item.id + "' has dimension " +
                           std::to_string(item.vector.size()) + " vs " + std::to_string(dim));
    }
    try {
      item.vector = l2_normalize(item.vector);
    } catch (const NumericError& e) {
      throw NumericError("index entry '" + item.id + "': " + e.what());
    }
  }
  std::sort(items.begin(), items.end(),
            [](const IndexEntry& a, const IndexEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].id == items[i - 1].id) throw DataError("duplicate index id '" + items[i].id + "'");
  }
  return UnifiedIndex(std::move(items), dim);
}

UnifiedIndex UnifiedIndex::from_normalized(std::vector<IndexEntry> entries, std::size_t dimension) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.vector.size() != dimension) {
      throw DimensionError("index entry '" + e.id + "' has dimension " +
                           std::to_string(e.vector.size()) + " vs " + std::to_string(dimension));
    }
    require_finite(e.vector, "index entry '" + e.id + "'");
    if (std::abs(l2_norm(e.vector) - 1.0) > 1e-9) {
      throw DataError("index entry '" + e.id + "' is not unit norm");
    }
    if (i > 0 && !(entries[i - 1].id < e.id)) {
      throw DataError("index entries not in strictly ascending id order at '" + e.id + "'");
    }
  }
  return UnifiedIndex(std::move(entries), dimension);
}

const IndexEntry* UnifiedIndex::find(const std::string& id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const IndexEntry& e, const std::string& key) { return e.id < key; });
  return it != entries_.end() && it->id == id ? &*it : nullptr;
}

std::vector<RetrievalResult> query_topk(const UnifiedIndex& index, std::span<const double> query,
                                        std::size_t k, Modality filter) {
  if (k == 0) throw UsageError("k must be at least 1");
  if (index.empty()) return {};
  if (query.size() != index.dimension()) {
    throw DimensionError("query dimension " + std::to_string(query.size()) + " vs index " +
                         std::to_string(index.dimension()));
  }
  const Vector q = l2_normalize(query);

  std::vector<RetrievalResult> scored;
  for (const auto& entry : index.entries()) {
    if (entry.modality != filter) continue;
    scored.push_back({entry.id, std::clamp(dot(q, entry.vector), -1.0, 1.0), 0});
  }
  const auto better = [](const RetrievalResult& a, const RetrievalResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  scored.resize(keep);
  for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
  return scored;
}

std::vector<RetrievalResult> cross_media_search(const AlignmentModel& model,
                                                const UnifiedIndex& index,
                                                const FeatureRecord& query, std::size_t k,
                                                Direction direction) {
  if (query.modality != source_modality(direction)) {
    throw UsageError(std::string(to_string(direction)) + " needs a " +
                     std::string(to_string(source_modality(direction))) + " query, got " +
                     std::string(to_string(query.modality)) + " '" + query.id + "'");
  }
  const MlpParams& head = model.head(query.modality);
  if (query.vector.size() != head.input_dim()) {
    throw DimensionError("query '" + query.id + "' has dimension " +
                         std::to_string(query.vector.size()) + " vs model input " +
                         std::to_string(head.input_dim()));
  }
  if (!index.empty() && index.dimension() != model.unified_dim) {
    throw DimensionError("index dimension " + std::to_string(index.dimension()) +
                         " vs model unified_dim " + std::to_string(model.unified_dim));
  }
  const std::string ids[] = {query.id};
  const Matrix unified = project(head, Matrix(1, query.vector.size(), query.vector), ids);
  return query_topk(index, unified.row(0), k, target_modality(direction));
}

UnifiedIndex index_features(const AlignmentModel& model, std::span<const FeatureRecord> records) {
  std::vector<IndexEntry> items;
  items.reserve(records.size());
  for (const auto& record : records) {
    const MlpParams& head = model.head(record.modality);
    if (record.vector.size() != head.input_dim()) {
      throw DimensionError("record '" + record.id + "' has dimension " +
                           std::to_string(record.vector.size()) + " vs " +
                           std::string(to_string(record.modality)) + " head input " +
                           std::to_string(head.input_dim()));
    }
    const std::string ids[] = {record.id};
    Matrix unified = project(head, Matrix(1, record.vector.size(), record.vector), ids);
    items.push_back({record.id, record.modality, std::move(unified.values())});
  }
  return UnifiedIndex::build(std::move(items));
}

}  // namespace cardl
