#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/features.hpp"
#include "cardl/matrix.hpp"
#include "cardl/types.hpp"

namespace cardl {

// Unit vector v / |v|. Throws NumericError for the zero vector.
Vector l2_normalize(std::span<const double> v);

// <x, y> / (|x| |y|), clamped to [-1, 1].
double cosine_sim(std::span<const double> x, std::span<const double> y);

struct IndexEntry {
  std::string id;
  Modality modality = Modality::kText;
  Vector vector;

  bool operator==(const IndexEntry&) const = default;
};

// Immutable set of unit vectors in the unified space, ordered by ascending id.
class UnifiedIndex {
 public:
  UnifiedIndex() = default;

  // Normalizes every vector and sorts by id. Throws DataError on duplicate
  // ids and DimensionError on inconsistent dimensions.
  static UnifiedIndex build(std::vector<IndexEntry> items);

  // Accepts entries that are already unit-norm (within 1e-9), sorted and
  // unique, without touching their bits. Used when loading from disk.
  static UnifiedIndex from_normalized(std::vector<IndexEntry> entries, std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }

  // nullptr when absent.
  const IndexEntry* find(const std::string& id) const;

  bool operator==(const UnifiedIndex&) const = default;

 private:
  UnifiedIndex(std::vector<IndexEntry> entries, std::size_t dimension)
      : dimension_(dimension), entries_(std::move(entries)) {}

  std::size_t dimension_ = 0;
  std::vector<IndexEntry> entries_;
};

struct RetrievalResult {
  std::string id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  bool operator==(const RetrievalResult&) const = default;
};

// Exact top-k by cosine over entries of `filter`. Ordered by score
// descending, ties by ascending id.
std::vector<RetrievalResult> query_topk(const UnifiedIndex& index, std::span<const double> query,
                                        std::size_t k, Modality filter);

// Projects the query through the head of its modality and searches the
// opposite modality.
std::vector<RetrievalResult> cross_media_search(const AlignmentModel& model,
                                                const UnifiedIndex& index,
                                                const FeatureRecord& query, std::size_t k,
                                                Direction direction);

// Projects every record with the head of its modality and builds an index.
UnifiedIndex index_features(const AlignmentModel& model, std::span<const FeatureRecord> records);

}  // namespace cardl
