#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"

#include "cardl/alignment.hpp"
#include "cardl/errors.hpp"
#include "cardl/evaluation.hpp"
#include "cardl/io.hpp"
#include "cardl/pair_relevance.hpp"
#include "cardl/retrieval.hpp"
#include "cardl/synthetic.hpp"

namespace cardl::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 42;

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> values;
  if (text.empty()) return values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      values.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a positive integer");
    }
  }
  return values;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", score);
  return buf;
}

FeatureSet load_modality(const fs::path& path, Modality modality) {
  auto split = split_by_modality(io::load_features(path));
  FeatureSet& wanted = modality == Modality::kText ? split.text : split.image;
  const FeatureSet& other = modality == Modality::kText ? split.image : split.text;
  if (!other.empty()) {
    throw DataError(path.string() + ": expected only " + std::string(to_string(modality)) +
                    " records");
  }
  return std::move(wanted);
}

struct Options {
  // synth
  SyntheticConfig synth;
  std::string out_dir;
  // shared
  std::uint64_t seed = kDefaultSeed;
  std::string text_path, image_path, pairs_path, qrels_path, model_path, index_path, out_path;
  std::vector<std::string> feature_paths;
  // train
  TrainConfig train;
  std::string hidden = "256";
  // pairhead-train
  std::string left_path, right_path;
  std::size_t pair_epochs = 100;
  // query / eval
  std::string query_id;
  std::string direction = "txt2img";
  std::size_t k = 10;
  std::string k_list = "1,5,10";
  std::string eval_direction = "both";
};

int run_synth(Options& o, std::ostream& out) {
  o.synth.seed = o.seed;
  const SyntheticDataset data = generate_synthetic(o.synth);
  io::save_synthetic(o.out_dir, data);
  out << "wrote " << data.pairs.size() << " pairs to " << o.out_dir << "\n";
  return kOk;
}

int run_train(Options& o, std::ostream& out) {
  o.train.seed = o.seed;
  o.train.hidden_dims = parse_size_list(o.hidden, "--hidden");
  const FeatureSet text = load_modality(o.text_path, Modality::kText);
  const FeatureSet image = load_modality(o.image_path, Modality::kImage);
  const auto data = io::load_pairs_and_qrels(o.pairs_path, std::nullopt, text, image);
  const FitResult result = fit(text, image, data.pairs, o.train);
  io::save_model(o.out_path, result.model, &o.train);
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    out << e + 1 << '\t' << format_score(result.loss_history[e]) << '\n';
  }
  return kOk;
}

int run_pairhead_train(Options& o, std::ostream& out) {
  const auto left = io::load_features(o.left_path);
  const auto right = io::load_features(o.right_path);
  std::map<std::string, const FeatureRecord*> left_by_id, right_by_id;
  for (const auto& r : left) left_by_id[r.id] = &r;
  for (const auto& r : right) right_by_id[r.id] = &r;

  std::ifstream in(o.pairs_path);
  if (!in) throw DataError("cannot open " + o.pairs_path);
  const auto pairs = io::parse_pairs(in, o.pairs_path);
  std::vector<PairExample> positives;
  for (const auto& p : pairs) {
    auto l = left_by_id.find(p.text_id);
    auto r = right_by_id.find(p.image_id);
    if (l == left_by_id.end()) throw DataError("unknown left id '" + p.text_id + "'");
    if (r == right_by_id.end()) throw DataError("unknown right id '" + p.image_id + "'");
    positives.push_back({l->second->vector, r->second->vector, true});
  }
  std::vector<PairExample> examples = positives;
  const auto negatives = sample_negative_pairs(positives, o.seed);
  examples.insert(examples.end(), negatives.begin(), negatives.end());

  o.train.seed = o.seed;
  o.train.epochs = o.pair_epochs;
  const PairHead head = fit_pair_head(examples, o.train);
  io::write_file_atomic(o.out_path, io::format_pair_head(head));
  out << "training_accuracy\t" << format_score(pair_accuracy(head, examples)) << '\n';
  return kOk;
}

int run_embed(Options& o, std::ostream& out) {
  const AlignmentModel model = io::load_model(o.model_path);
  const auto records = io::load_features(o.feature_paths.front());
  const UnifiedIndex index = index_features(model, records);
  std::vector<FeatureRecord> unified;
  for (const auto& e : index.entries()) unified.push_back({e.id, e.modality, e.vector});
  io::save_features(o.out_path, unified);
  out << "embedded " << unified.size() << " records\n";
  return kOk;
}

int run_index(Options& o, std::ostream& out) {
  const AlignmentModel model = io::load_model(o.model_path);
  std::vector<FeatureRecord> records;
  for (const auto& path : o.feature_paths) {
    auto part = io::load_features(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  const UnifiedIndex index = index_features(model, records);
  io::save_index(o.out_path, index);
  out << "indexed " << index.size() << " entries, dimension " << index.dimension() << "\n";
  return kOk;
}

int run_query(Options& o, std::ostream& out) {
  const AlignmentModel model = io::load_model(o.model_path);
  const UnifiedIndex index = io::load_index(o.index_path);
  const Direction direction = parse_direction(o.direction);
  if (!index.empty() && index.dimension() != model.unified_dim) {
    throw DimensionError("index dimension " + std::to_string(index.dimension()) +
                         " vs model unified_dim " + std::to_string(model.unified_dim));
  }

  std::vector<RetrievalResult> results;
  if (!o.feature_paths.empty()) {
    std::optional<FeatureRecord> query;
    for (const auto& path : o.feature_paths) {
      for (auto& r : io::load_features(path)) {
        if (r.id == o.query_id) query = std::move(r);
      }
    }
    if (!query) throw DataError("query id '" + o.query_id + "' not found in the feature files");
    results = cross_media_search(model, index, *query, o.k, direction);
  } else {
    const IndexEntry* entry = index.find(o.query_id);
    if (entry == nullptr) throw DataError("query id '" + o.query_id + "' is not in the index");
    if (entry->modality != source_modality(direction)) {
      throw UsageError(std::string(to_string(direction)) + " needs a " +
                       std::string(to_string(source_modality(direction))) + " query, '" +
                       o.query_id + "' is " + std::string(to_string(entry->modality)));
    }
    results = query_topk(index, entry->vector, o.k, target_modality(direction));
  }
  for (const auto& r : results) out << r.rank << '\t' << r.id << '\t' << format_score(r.score) << '\n';
  return kOk;
}

int run_eval(Options& o, std::ostream& out) {
  const AlignmentModel model = io::load_model(o.model_path);
  const UnifiedIndex index = io::load_index(o.index_path);
  const FeatureSet text = load_modality(o.text_path, Modality::kText);
  const FeatureSet image = load_modality(o.image_path, Modality::kImage);
  std::optional<fs::path> qrels;
  if (!o.qrels_path.empty()) qrels = o.qrels_path;
  const auto data = io::load_pairs_and_qrels(o.pairs_path, qrels, text, image);
  const auto k_list = parse_size_list(o.k_list, "--k-list");
  if (k_list.empty()) throw UsageError("--k-list is empty");

  std::vector<Direction> directions;
  if (o.eval_direction == "both") {
    directions = {Direction::kTextToImage, Direction::kImageToText};
  } else {
    directions = {parse_direction(o.eval_direction)};
  }
  std::vector<EvalReport> reports;
  for (Direction d : directions) {
    const FeatureSet& queries = d == Direction::kTextToImage ? text : image;
    reports.push_back(evaluate_retrieval(model, index, queries.records(), data.qrels, k_list, d));
  }
  out << format_report_table(reports);
  if (!o.out_path.empty()) io::write_file_atomic(o.out_path, io::format_report(reports));
  return kOk;
}

}  // namespace

int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cardl: cross-media embedding alignment, search and evaluation", "cardl"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed")->envname("CARDL_SEED")->default_val(kDefaultSeed);
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic clustered corpus");
  synth->add_option("--out-dir", o.out_dir, "Output directory")->required();
  synth->add_option("--clusters", o.synth.clusters)->capture_default_str();
  synth->add_option("--pairs-per-cluster", o.synth.pairs_per_cluster)->capture_default_str();
  synth->add_option("--text-dim", o.synth.text_dim)->capture_default_str();
  synth->add_option("--image-dim", o.synth.image_dim)->capture_default_str();
  synth->add_option("--latent-dim", o.synth.latent_dim)->capture_default_str();
  synth->add_option("--noise", o.synth.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  synth->add_flag("--same-cluster-relevant", o.synth.same_cluster_relevant,
                  "Judge same-cluster items relevant");
  synth->add_flag("--label-pairs", o.synth.label_pairs, "Write cluster labels into pairs.tsv");
  add_seed(synth);

  auto* train = app.add_subcommand("train", "Train the projection heads");
  train->add_option("--text", o.text_path, "Text feature file")->required();
  train->add_option("--image", o.image_path, "Image feature file")->required();
  train->add_option("--pairs", o.pairs_path, "Pairs file")->required();
  train->add_option("--out", o.out_path, "Model output file")->required();
  train->add_option("--epochs", o.train.epochs)->capture_default_str();
  train->add_option("--batch-size", o.train.batch_size)->capture_default_str();
  train->add_option("--lr", o.train.adam.learning_rate)->capture_default_str();
  train->add_option("--temperature", o.train.temperature)->capture_default_str();
  train->add_option("--hidden", o.hidden, "Comma-separated hidden widths")->capture_default_str();
  train->add_option("--unified-dim", o.train.unified_dim)->capture_default_str();
  add_seed(train);

  auto* pairhead = app.add_subcommand("pairhead-train", "Train the pair relevance head");
  pairhead->add_option("--left", o.left_path, "Left embedding file")->required();
  pairhead->add_option("--right", o.right_path, "Right embedding file")->required();
  pairhead->add_option("--pairs", o.pairs_path, "left_id<TAB>right_id pairs")->required();
  pairhead->add_option("--out", o.out_path, "Head output file")->required();
  pairhead->add_option("--epochs", o.pair_epochs)->capture_default_str();
  pairhead->add_option("--batch-size", o.train.batch_size)->capture_default_str();
  pairhead->add_option("--lr", o.train.adam.learning_rate)->capture_default_str();
  add_seed(pairhead);

  auto* embed = app.add_subcommand("embed", "Project features into the unified space");
  embed->add_option("--model", o.model_path)->required();
  embed->add_option("--features", o.feature_paths)->required()->expected(1);
  embed->add_option("--out", o.out_path)->required();

  auto* index = app.add_subcommand("index", "Build a search index");
  index->add_option("--model", o.model_path)->required();
  index->add_option("--features", o.feature_paths, "Feature files (repeatable)")->required();
  index->add_option("--out", o.out_path)->required();

  auto* query = app.add_subcommand("query", "Top-k cross-media search");
  query->add_option("--index", o.index_path)->required();
  query->add_option("--model", o.model_path)->required();
  query->add_option("--id", o.query_id)->required();
  query->add_option("--direction", o.direction)->capture_default_str();
  query->add_option("--k", o.k)->capture_default_str();
  query->add_option("--features", o.feature_paths, "Raw feature files holding the query");

  auto* eval = app.add_subcommand("eval", "MAP@k evaluation");
  eval->add_option("--model", o.model_path)->required();
  eval->add_option("--index", o.index_path)->required();
  eval->add_option("--text", o.text_path)->required();
  eval->add_option("--image", o.image_path)->required();
  eval->add_option("--pairs", o.pairs_path)->required();
  eval->add_option("--qrels", o.qrels_path);
  eval->add_option("--k-list", o.k_list)->capture_default_str();
  eval->add_option("--direction", o.eval_direction, "txt2img, img2txt or both")->capture_default_str();
  eval->add_option("--out", o.out_path, "Machine-readable report file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (!args.empty()) err << "error: " << e.what() << "\n";
    err << app.help();
    return kUsage;
  }

  try {
    if (*synth) return run_synth(o, out);
    if (*train) return run_train(o, out);
    if (*pairhead) return run_pairhead_train(o, out);
    if (*embed) return run_embed(o, out);
    if (*index) return run_index(o, out);
    if (*query) return run_query(o, out);
    if (*eval) return run_eval(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  err << app.help();
  return kUsage;
}

}  // namespace cardl::cli
