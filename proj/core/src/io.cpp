#include "cardl/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "cardl/errors.hpp"

namespace cardl::io {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot replace " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

Vector read_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + " is not an array");
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw DataError(what + " has a non-numeric entry");
    v.push_back(e.get<double>());
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw DataError(what + " has a non-finite entry");
  }
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<FeatureRecord> parse_features(std::istream& in, const std::string& source) {
  std::vector<FeatureRecord> records;
  std::map<Modality, std::size_t> dims;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    FeatureRecord record;
    try {
      const json j = json::parse(line);
      if (!j.is_object() || !j.contains("id") || !j.contains("modality") || !j.contains("vector")) {
        throw DataError("record needs id, modality and vector");
      }
      if (!j["id"].is_string() || !j["modality"].is_string()) {
        throw DataError("id and modality must be strings");
      }
      record.id = j["id"].get<std::string>();
      if (record.id.empty()) throw DataError("empty id");
      record.modality = parse_modality(j["modality"].get<std::string>());
      record.vector = read_vector(j["vector"], "vector");
      if (record.vector.empty()) throw DataError("empty vector");
    } catch (const json::exception& e) {
      throw DataError(where(source, line_no) + "malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(where(source, line_no) + e.what());
    }
    auto [it, inserted] = dims.emplace(record.modality, record.vector.size());
    if (!inserted && it->second != record.vector.size()) {
      throw DataError(where(source, line_no) + std::string(to_string(record.modality)) +
                      " record '" + record.id + "' dimension mismatch: " +
                      std::to_string(it->second) + " vs " + std::to_string(record.vector.size()));
    }
    records.push_back(std::move(record));
  }
  if (records.empty()) throw DataError(source + ": no feature records");
  return records;
}

std::vector<FeatureRecord> load_features(const fs::path& path) {
  auto in = open_input(path);
  return parse_features(in, path.string());
}

std::string format_features(std::span<const FeatureRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["modality"] = std::string(to_string(r.modality));
    j["vector"] = r.vector;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_features(const fs::path& path, std::span<const FeatureRecord> records) {
  write_file_atomic(path, format_features(records));
}

std::vector<PairedExample> parse_pairs(std::istream& in, const std::string& source) {
  std::vector<PairedExample> pairs;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError(where(source, line_no) + "expected text_id<TAB>image_id[<TAB>label]");
    }
    PairedExample pair{fields[0], fields[1], std::nullopt};
    if (fields.size() == 3 && !fields[2].empty()) pair.label = fields[2];
    auto [it, inserted] = seen.emplace(std::make_pair(pair.text_id, pair.image_id), line_no);
    if (!inserted) {
      throw DataError(where(source, line_no) + "duplicate pair " + pair.text_id + " " +
                      pair.image_id + " (first on line " + std::to_string(it->second) + ")");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

RelevanceJudgments parse_qrels(std::istream& in, const std::string& source) {
  RelevanceJudgments qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
        (fields[2] != "0" && fields[2] != "1")) {
      throw DataError(where(source, line_no) + "expected query_id<TAB>doc_id<TAB>0|1");
    }
    auto& relevant = qrels[fields[0]];
    if (fields[2] == "1") relevant.insert(fields[1]);
  }
  return qrels;
}

RelevanceJudgments default_qrels(std::span<const PairedExample> pairs) {
  RelevanceJudgments qrels;
  for (const auto& p : pairs) {
    qrels[p.text_id].insert(p.image_id);
    qrels[p.image_id].insert(p.text_id);
  }
  return qrels;
}

PairsAndQrels load_pairs_and_qrels(const fs::path& pairs_path,
                                   const std::optional<fs::path>& qrels_path,
                                   const FeatureSet& text, const FeatureSet& image) {
  PairsAndQrels out;
  {
    auto in = open_input(pairs_path);
    out.pairs = parse_pairs(in, pairs_path.string());
  }
  for (const auto& p : out.pairs) {
    if (!text.contains(p.text_id)) {
      throw DataError(pairs_path.string() + ": unknown text id '" + p.text_id + "'");
    }
    if (!image.contains(p.image_id)) {
      throw DataError(pairs_path.string() + ": unknown image id '" + p.image_id + "'");
    }
  }
  if (!qrels_path) {
    out.qrels = default_qrels(out.pairs);
    return out;
  }
  auto in = open_input(*qrels_path);
  out.qrels = parse_qrels(in, qrels_path->string());
  auto known = [&](const std::string& id) { return text.contains(id) || image.contains(id); };
  for (const auto& [query, docs] : out.qrels) {
    if (!known(query)) throw DataError(qrels_path->string() + ": unknown query id '" + query + "'");
    for (const auto& doc : docs) {
      if (!known(doc)) throw DataError(qrels_path->string() + ": unknown document id '" + doc + "'");
    }
  }
  return out;
}

std::string format_pairs(std::span<const PairedExample> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += p.text_id + '\t' + p.image_id;
    if (p.label) out += '\t' + *p.label;
    out += '\n';
  }
  return out;
}

std::string format_qrels(const RelevanceJudgments& qrels) {
  std::string out;
  for (const auto& [query, docs] : qrels) {
    for (const auto& doc : docs) out += query + '\t' + doc + "\t1\n";
  }
  return out;
}

namespace {

json head_to_json(const MlpParams& head) {
  json layers = json::array();
  for (const auto& layer : head.layers) {
    layers.push_back({{"rows", layer.weight.rows()},
                      {"cols", layer.weight.cols()},
                      {"weight", layer.weight.values()},
                      {"bias", layer.bias}});
  }
  return {{"rectify_output", head.rectify_output}, {"layers", layers}};
}

MlpParams head_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("layers") || !j["layers"].is_array()) {
    throw DataError(name + ": missing layers");
  }
  MlpParams head;
  head.rectify_output = j.value("rectify_output", false);
  std::size_t k = 0;
  for (const auto& lj : j["layers"]) {
    const std::string layer_name = name + " layer " + std::to_string(k++);
    const auto rows = lj.at("rows").get<std::size_t>();
    const auto cols = lj.at("cols").get<std::size_t>();
    Vector weight = read_vector(lj.at("weight"), layer_name + " weight");
    Vector bias = read_vector(lj.at("bias"), layer_name + " bias");
    if (weight.size() != rows * cols) {
      throw DataError(layer_name + ": weight has " + std::to_string(weight.size()) +
                      " values, expected " + std::to_string(rows * cols));
    }
    if (bias.size() != rows) {
      throw DataError(layer_name + ": bias has " + std::to_string(bias.size()) +
                      " values, expected " + std::to_string(rows));
    }
    head.layers.push_back({Matrix(rows, cols, std::move(weight)), std::move(bias)});
  }
  head.validate();
  return head;
}

json parse_versioned(const std::string& text, const std::string& format, int version) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(format + ": malformed JSON: " + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != format) {
    throw DataError("not a " + format + " file");
  }
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw DataError(format + ": missing or non-integer version field");
  }
  const int found = j["version"].get<int>();
  if (found != version) {
    throw DataError(format + " version " + std::to_string(found) + " is not supported (expected " +
                    std::to_string(version) + ")");
  }
  return j;
}

template <typename Fn>
auto rethrow_json(const std::string& format, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(format + ": " + e.what());
  }
}

}  // namespace

std::string format_model(const AlignmentModel& model, const TrainConfig* config) {
  model.validate();
  json j;
  j["format"] = "cardl-model";
  j["version"] = kModelVersion;
  j["unified_dim"] = model.unified_dim;
  j["temperature"] = model.temperature;
  j["text_input_dim"] = model.text_input_dim();
  j["image_input_dim"] = model.image_input_dim();
  j["text_head"] = head_to_json(model.text_head);
  j["image_head"] = head_to_json(model.image_head);
  j["metadata"] = {{"unified_space", std::to_string(model.unified_dim) + "-D, unit norm"},
                   {"image_preprocessing", "256x256 input handled by the external image encoder"},
                   {"similarity", "cosine"}};
  if (config != nullptr) {
    j["seed"] = config->seed;
    j["train_config"] = {{"epochs", config->epochs},
                         {"batch_size", config->batch_size},
                         {"temperature", config->temperature},
                         {"hidden_dims", config->hidden_dims},
                         {"unified_dim", config->unified_dim},
                         {"seed", config->seed},
                         {"learning_rate", config->adam.learning_rate},
                         {"beta1", config->adam.beta1},
                         {"beta2", config->adam.beta2},
                         {"epsilon", config->adam.epsilon}};
  }
  return j.dump(1) + "\n";
}

AlignmentModel parse_model(const std::string& text) {
  const json j = parse_versioned(text, "cardl-model", kModelVersion);
  return rethrow_json("cardl-model", [&] {
    AlignmentModel model;
    model.unified_dim = j.at("unified_dim").get<std::size_t>();
    model.temperature = j.at("temperature").get<double>();
    model.text_head = head_from_json(j.at("text_head"), "text_head");
    model.image_head = head_from_json(j.at("image_head"), "image_head");
    if (model.text_input_dim() != j.at("text_input_dim").get<std::size_t>() ||
        model.image_input_dim() != j.at("image_input_dim").get<std::size_t>()) {
      throw DataError("cardl-model: declared input dims do not match the heads");
    }
    model.validate();
    return model;
  });
}

void save_model(const fs::path& path, const AlignmentModel& model, const TrainConfig* config) {
  write_file_atomic(path, format_model(model, config));
}

AlignmentModel load_model(const fs::path& path) {
  try {
    return parse_model(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_index(const UnifiedIndex& index) {
  json entries = json::array();
  for (const auto& e : index.entries()) {
    entries.push_back(
        {{"id", e.id}, {"modality", std::string(to_string(e.modality))}, {"vector", e.vector}});
  }
  json j;
  j["format"] = "cardl-index";
  j["version"] = kIndexVersion;
  j["dimension"] = index.dimension();
  j["entries"] = entries;
  return j.dump(1) + "\n";
}

UnifiedIndex parse_index(const std::string& text) {
  const json j = parse_versioned(text, "cardl-index", kIndexVersion);
  return rethrow_json("cardl-index", [&] {
    std::vector<IndexEntry> entries;
    for (const auto& ej : j.at("entries")) {
      const std::string id = ej.at("id").get<std::string>();
      entries.push_back({id, parse_modality(ej.at("modality").get<std::string>()),
                         read_vector(ej.at("vector"), "index entry '" + id + "'")});
    }
    return UnifiedIndex::from_normalized(std::move(entries), j.at("dimension").get<std::size_t>());
  });
}

void save_index(const fs::path& path, const UnifiedIndex& index) {
  write_file_atomic(path, format_index(index));
}

UnifiedIndex load_index(const fs::path& path) {
  try {
    return parse_index(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_report(std::span<const EvalReport> reports) {
  json list = json::array();
  for (const auto& r : reports) {
    json queries = json::array();
    for (const auto& q : r.queries) queries.push_back({{"id", q.query_id}, {"ap", q.ap}});
    json map_by_k = json::object();
    for (std::size_t c = 0; c < r.k_list.size(); ++c) {
      map_by_k["MAP@" + std::to_string(r.k_list[c])] = r.map[c];
    }
    list.push_back({{"direction", std::string(to_string(r.direction))},
                    {"k_list", r.k_list},
                    {"map", r.map},
                    {"map_by_k", map_by_k},
                    {"evaluated", r.evaluated},
                    {"skipped", r.skipped},
                    {"queries", queries}});
  }
  json j;
  j["format"] = "cardl-report";
  j["version"] = kReportVersion;
  j["ap_convention"] = kApConvention;
  j["reports"] = list;
  return j.dump(1) + "\n";
}

std::vector<EvalReport> parse_report(const std::string& text) {
  const json j = parse_versioned(text, "cardl-report", kReportVersion);
  return rethrow_json("cardl-report", [&] {
    std::vector<EvalReport> reports;
    for (const auto& rj : j.at("reports")) {
      EvalReport r;
      r.direction = parse_direction(rj.at("direction").get<std::string>());
      r.k_list = rj.at("k_list").get<std::vector<std::size_t>>();
      r.map = rj.at("map").get<std::vector<double>>();
      r.evaluated = rj.at("evaluated").get<std::size_t>();
      r.skipped = rj.at("skipped").get<std::size_t>();
      for (const auto& qj : rj.at("queries")) {
        r.queries.push_back({qj.at("id").get<std::string>(), qj.at("ap").get<std::vector<double>>()});
      }
      if (r.map.size() != r.k_list.size()) throw DataError("cardl-report: map/k_list length mismatch");
      reports.push_back(std::move(r));
    }
    return reports;
  });
}

std::string format_pair_head(const PairHead& head) {
  json j;
  j["format"] = "cardl-pair-head";
  j["version"] = kPairHeadVersion;
  j["embedding_dim"] = head.embedding_dim();
  j["mlp"] = head_to_json(head.mlp);
  return j.dump(1) + "\n";
}

PairHead parse_pair_head(const std::string& text) {
  const json j = parse_versioned(text, "cardl-pair-head", kPairHeadVersion);
  return rethrow_json("cardl-pair-head", [&] {
    PairHead head{head_from_json(j.at("mlp"), "mlp")};
    if (head.mlp.input_dim() != 4 * j.at("embedding_dim").get<std::size_t>() ||
        head.mlp.output_dim() != 1) {
      throw DataError("cardl-pair-head: network shape does not match embedding_dim");
    }
    return head;
  });
}

void save_synthetic(const fs::path& dir, const SyntheticDataset& data) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string());
  save_features(dir / "text.jsonl", data.text);
  save_features(dir / "image.jsonl", data.image);
  write_file_atomic(dir / "pairs.tsv", format_pairs(data.pairs));
  write_file_atomic(dir / "qrels.tsv", format_qrels(data.qrels));
  save_model(dir / "oracle_model.json", data.oracle_model);
}

}  // namespace cardl::io
