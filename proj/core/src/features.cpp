#include "cardl/features.hpp"

#include "cardl/errors.hpp"

namespace cardl {

FeatureSet::FeatureSet(Modality modality, std::vector<FeatureRecord> records)
    : modality_(modality), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& record = records_[i];
    if (record.modality != modality_) {
      throw DataError("record '" + record.id + "' is " + std::string(to_string(record.modality)) +
                      ", expected " + std::string(to_string(modality_)));
    }
    if (record.vector.empty()) throw DataError("record '" + record.id + "' has an empty vector");
    if (i == 0) {
      dimension_ = record.vector.size();
    } else if (record.vector.size() != dimension_) {
      throw DataError("record '" + record.id + "' has dimension " +
                      std::to_string(record.vector.size()) + " vs " + std::to_string(dimension_));
    }
    if (!by_id_.emplace(record.id, i).second) {
      throw DataError("duplicate " + std::string(to_string(modality_)) + " id '" + record.id + "'");
    }
  }
}

const FeatureRecord& FeatureSet::find(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw DataError("unknown " + std::string(to_string(modality_)) + " id '" + id + "'");
  }
  return records_[it->second];
}

Matrix FeatureSet::gather(const std::vector<std::string>& ids) const {
  Matrix out(ids.size(), dimension_);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto& v = find(ids[r]).vector;
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

SplitFeatures split_by_modality(const std::vector<FeatureRecord>& records) {
  std::vector<FeatureRecord> text;
  std::vector<FeatureRecord> image;
  for (const auto& record : records) {
    (record.modality == Modality::kText ? text : image).push_back(record);
  }
  return {FeatureSet(Modality::kText, std::move(text)),
          FeatureSet(Modality::kImage, std::move(image))};
}

}  // namespace cardl
