#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "cardl/matrix.hpp"
#include "cardl/types.hpp"

namespace cardl {

// One encoder output: a raw text or image feature vector.
struct FeatureRecord {
  std::string id;
  Modality modality = Modality::kText;
  Vector vector;

  bool operator==(const FeatureRecord&) const = default;
};

// Records of a single modality with uniform dimension, addressable by id.
class FeatureSet {
 public:
  FeatureSet() = default;
  // Throws DataError on mixed modality, duplicate ids or differing dimensions.
  FeatureSet(Modality modality, std::vector<FeatureRecord> records);

  Modality modality() const { return modality_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<FeatureRecord>& records() const { return records_; }
  const FeatureRecord& at(std::size_t i) const { return records_.at(i); }

  bool contains(const std::string& id) const { return by_id_.contains(id); }
  // Throws DataError naming the id when absent.
  const FeatureRecord& find(const std::string& id) const;

  // Stacks the vectors of the given ids into a matrix, one row per id.
  Matrix gather(const std::vector<std::string>& ids) const;

 private:
  Modality modality_ = Modality::kText;
  std::size_t dimension_ = 0;
  std::vector<FeatureRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Splits a mixed list into per-modality sets.
struct SplitFeatures {
  FeatureSet text;
  FeatureSet image;
};
SplitFeatures split_by_modality(const std::vector<FeatureRecord>& records);

}  // namespace cardl
