#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/evaluation.hpp"
#include "cardl/features.hpp"
#include "cardl/pair_relevance.hpp"
#include "cardl/retrieval.hpp"
#include "cardl/synthetic.hpp"

namespace cardl::io {

inline constexpr int kModelVersion = 1;
inline constexpr int kIndexVersion = 1;
inline constexpr int kReportVersion = 1;
inline constexpr int kPairHeadVersion = 1;

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Feature files: one JSON object per line, {"id":..,"modality":..,"vector":[..]}.
std::vector<FeatureRecord> parse_features(std::istream& in, const std::string& source);
std::vector<FeatureRecord> load_features(const std::filesystem::path& path);
std::string format_features(std::span<const FeatureRecord> records);
void save_features(const std::filesystem::path& path, std::span<const FeatureRecord> records);

struct PairsAndQrels {
  std::vector<PairedExample> pairs;
  RelevanceJudgments qrels;
};

// Pairs: text_id <TAB> image_id [<TAB> label]. Qrels: query_id <TAB> doc_id <TAB> 0|1.
// Without a qrels file each paired item is the sole relevant document for
// its partner, in both directions.
PairsAndQrels load_pairs_and_qrels(const std::filesystem::path& pairs_path,
                                   const std::optional<std::filesystem::path>& qrels_path,
                                   const FeatureSet& text, const FeatureSet& image);
std::vector<PairedExample> parse_pairs(std::istream& in, const std::string& source);
RelevanceJudgments parse_qrels(std::istream& in, const std::string& source);
RelevanceJudgments default_qrels(std::span<const PairedExample> pairs);
std::string format_pairs(std::span<const PairedExample> pairs);
std::string format_qrels(const RelevanceJudgments& qrels);

// Versioned JSON with sorted keys and shortest round-trip decimal floats.
std::string format_model(const AlignmentModel& model, const TrainConfig* config = nullptr);
AlignmentModel parse_model(const std::string& text);
void save_model(const std::filesystem::path& path, const AlignmentModel& model,
                const TrainConfig* config = nullptr);
AlignmentModel load_model(const std::filesystem::path& path);

std::string format_index(const UnifiedIndex& index);
UnifiedIndex parse_index(const std::string& text);
void save_index(const std::filesystem::path& path, const UnifiedIndex& index);
UnifiedIndex load_index(const std::filesystem::path& path);

std::string format_report(std::span<const EvalReport> reports);
std::vector<EvalReport> parse_report(const std::string& text);

std::string format_pair_head(const PairHead& head);
PairHead parse_pair_head(const std::string& text);

// Writes text.jsonl, image.jsonl, pairs.tsv, qrels.tsv and oracle_model.json.
void save_synthetic(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace cardl::io
