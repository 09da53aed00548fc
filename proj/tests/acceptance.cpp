// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/evaluation.hpp"
#include "cardl/gradcheck.hpp"
#include "cardl/io.hpp"
#include "cardl/loss.hpp"
#include "cardl/pair_relevance.hpp"
#include "cardl/retrieval.hpp"
#include "cardl/synthetic.hpp"
#include "cli.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

using namespace cardl;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

// 1. Analytic gradients of L_total through both heads vs central differences.
Outcome gradient_correctness() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_int_distribution<std::size_t> batch(2, 4);
  double worst = 0.0;
  constexpr int kConfigs = 24;
  for (int trial = 0; trial < kConfigs; ++trial) {
    TrainConfig config;
    config.hidden_dims = {dim(rng)};
    config.unified_dim = 1 + dim(rng);
    config.temperature = trial % 2 == 0 ? kDefaultTemperature : 0.5;
    config.seed = 500 + static_cast<std::uint64_t>(trial);
    const std::size_t n = batch(rng);
    const std::size_t text_dim = dim(rng);
    const std::size_t image_dim = dim(rng);
    AlignmentModel model = init_alignment_model(text_dim, image_dim, config);
    for (auto* head : {&model.text_head, &model.image_head})
      for (auto& l : head->layers)
        for (double& b : l.bias) b = 0.1 * std::normal_distribution<double>(0, 1)(rng);
    const Matrix text = random_matrix(n, text_dim, rng);
    const Matrix image = random_matrix(n, image_dim, rng);
    const Matrix y = Matrix::identity(n);

    const auto analytic = alignment_loss_and_grad(model, text, image, y);
    const Vector flat_text = flatten_params(model.text_head);
    const Vector flat_image = flatten_params(model.image_head);
    auto loss_at = [&](std::span<const double> t, std::span<const double> i) {
      AlignmentModel m = model;
      assign_params(m.text_head, t);
      assign_params(m.image_head, i);
      return alignment_loss(batch_logits(project(m.image_head, image), project(m.text_head, text),
                                         m.temperature),
                            y)
          .total;
    };
    const Vector num_text = finite_diff_grad(
        [&](std::span<const double> t) { return loss_at(t, flat_image); }, flat_text, 1e-6);
    const Vector num_image = finite_diff_grad(
        [&](std::span<const double> i) { return loss_at(flat_text, i); }, flat_image, 1e-6);
    Vector analytic_all = flatten_grads(analytic.text);
    const Vector analytic_image = flatten_grads(analytic.image);
    analytic_all.insert(analytic_all.end(), analytic_image.begin(), analytic_image.end());
    Vector numeric_all = num_text;
    numeric_all.insert(numeric_all.end(), num_image.begin(), num_image.end());
    worst = std::max(worst, max_relative_error(analytic_all, numeric_all));
  }
  const double elapsed = seconds_since(start);
  o.require(worst < 1e-4, "max relative error " + fmt("%.3g", worst));
  o.require(elapsed < 5.0, "runtime " + fmt("%.2f s", elapsed));
  o.detail = std::to_string(kConfigs) + " configs, max rel err " + fmt("%.2e", worst) + ", " +
             fmt("%.2f s", elapsed) + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 2. Loss closed forms.
Outcome loss_closed_forms() {
  Outcome o;
  for (std::size_t m = 2; m <= 8; ++m) {
    const auto loss = alignment_loss(Matrix(m, m), Matrix::identity(m));
    const double expected = std::log(static_cast<double>(m)) / static_cast<double>(m);
    o.require(std::abs(loss.image_to_text - expected) <= 1e-12, "uniform m=" + std::to_string(m));
  }
  const auto saturated = alignment_loss(Matrix(2, 2, {10, -10, -10, 10}), Matrix::identity(2));
  o.require(saturated.total < 1e-7, "saturated total " + fmt("%.3g", saturated.total));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const auto loss = alignment_loss(random_matrix(n, n, rng), Matrix::identity(n));
    o.require(loss.total == loss.image_to_text + loss.text_to_image, "total is not the exact sum");
    o.require(loss.image_to_text >= 0.0 && loss.text_to_image >= 0.0, "negative term");
  }
  if (o.pass) o.detail = "uniform (1/m)log m to 1e-12; saturated " + fmt("%.2e", saturated.total);
  return o;
}

// 3. AP vs brute force over every relevance pattern of length <= 6.
Outcome metric_oracle() {
  Outcome o;
  double worst = 0.0;
  std::size_t cases = 0;
  std::vector<double> all_ap;
  for (std::size_t len = 1; len <= 6; ++len) {
    for (unsigned mask = 0; mask < (1u << len); ++mask) {
      std::vector<bool> flags(len);
      for (std::size_t i = 0; i < len; ++i) flags[i] = (mask >> i) & 1u;
      for (std::size_t total = 0; total <= 6; ++total) {
        const double ap = average_precision(flags, total);
        worst = std::max(worst, std::abs(ap - testing::brute_force_ap(flags, total)));
        all_ap.push_back(ap);
        ++cases;
      }
    }
  }
  o.require(worst <= 1e-12, "max AP deviation " + fmt("%.3g", worst));
  double sum = 0.0;
  for (double ap : all_ap) sum += ap;
  const double map_reference = sum / static_cast<double>(all_ap.size());
  o.require(std::abs(mean_average_precision(all_ap) - map_reference) <= 1e-12, "MAP mean");
  if (o.pass) o.detail = std::to_string(cases) + " cases, max deviation " + fmt("%.1e", worst);
  return o;
}

// 4. query_topk equals the brute-force full sort prefix, ties included.
Outcome ranking_exactness() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> size(1, 200);
  std::uniform_int_distribution<std::size_t> kdist(1, 50);
  std::size_t tie_queries = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = size(rng);
    std::vector<IndexEntry> items;
    for (std::size_t i = 0; i < n; ++i) {
      Vector v(64);
      if (i >= 2 && i % 5 == 0) {
        v = items[i / 2].vector;  // duplicate direction -> exact score tie
      } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& x : v) x = normal(rng);
      }
      char id[16];
      std::snprintf(id, sizeof id, "d%04zu", (i * 37) % 1000);
      items.push_back({id, i % 2 ? Modality::kImage : Modality::kText, v});
    }
    const auto index = UnifiedIndex::build(items);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector q(64);
    for (double& x : q) x = normal(rng);
    if (trial % 4 == 0) q = items[(trial * 7) % n].vector;
    for (Modality m : {Modality::kText, Modality::kImage}) {
      const auto expected = testing::brute_force_ranking(index, q, m);
      const std::size_t k = kdist(rng);
      const auto got = query_topk(index, q, k, m);
      bool same = got.size() == std::min(k, expected.size());
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].id == expected[i].id && got[i].score == expected[i].score &&
               got[i].rank == i + 1;
        if (i > 0 && got[i].score == got[i - 1].score) ++tie_queries;
      }
      o.require(same, "mismatch in trial " + std::to_string(trial));
    }
  }
  if (o.pass) o.detail = "100 indexes, " + std::to_string(tie_queries) + " tied adjacent results";
  return o;
}

// 5. Cosine similarity properties.
Outcome cosine_properties() {
  Outcome o;
  std::mt19937_64 rng(55);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> alpha(1e-4, 1e4);
  double worst_scale = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector x(1 + trial % 64), y(x.size());
    for (double& v : x) v = normal(rng);
    for (double& v : y) v = normal(rng);
    Vector ax = x;
    const double a = alpha(rng);
    for (double& v : ax) v *= a;
    worst_scale = std::max(worst_scale, std::abs(cosine_sim(ax, y) - cosine_sim(x, y)));
    o.require(cosine_sim(x, y) == cosine_sim(y, x), "asymmetric");
    o.require(std::abs(cosine_sim(x, x) - 1.0) <= 1e-12, "self-similarity");
  }
  o.require(worst_scale <= 1e-12, "scale invariance " + fmt("%.3g", worst_scale));
  const double worked = cosine_sim(Vector{1, 2}, Vector{2, 1});
  o.require(std::abs(worked - 0.8) <= 1e-12, "sim([1,2],[2,1]) = " + fmt("%.17g", worked));
  if (o.pass) o.detail = "scale dev " + fmt("%.1e", worst_scale) + ", sim([1,2],[2,1]) = " + fmt("%.15g", worked);
  return o;
}

struct DirectionMaps {
  std::vector<double> txt2img;
  std::vector<double> img2txt;
};

DirectionMaps evaluate_both(const AlignmentModel& model, const SyntheticDataset& data) {
  std::vector<FeatureRecord> all = data.text;
  all.insert(all.end(), data.image.begin(), data.image.end());
  const UnifiedIndex index = index_features(model, all);
  return {evaluate_retrieval(model, index, data.text, data.qrels, kDefaultKList,
                             Direction::kTextToImage)
              .map,
          evaluate_retrieval(model, index, data.image, data.qrels, kDefaultKList,
                             Direction::kImageToText)
              .map};
}

std::string describe(const char* name, const DirectionMaps& m) {
  return std::string(name) + " t2i " + fmt("%.4f", m.txt2img[0]) + "/" + fmt("%.4f", m.txt2img[2]) +
         " i2t " + fmt("%.4f", m.img2txt[0]) + "/" + fmt("%.4f", m.img2txt[2]);
}

std::vector<EvalReport> g_shape_reports;

// 6. End-to-end reproduction on the seeded synthetic corpus.
Outcome end_to_end() {
  Outcome o;
  const auto start = Clock::now();
  SyntheticConfig sc;
  sc.clusters = 8;
  sc.pairs_per_cluster = 50;
  sc.latent_dim = 16;
  sc.text_dim = 128;
  sc.image_dim = 192;
  sc.noise_sigma = 0.1;
  sc.seed = 42;
  const SyntheticDataset data = generate_synthetic(sc);

  const DirectionMaps oracle = evaluate_both(data.oracle_model, data);
  o.require(oracle.txt2img[0] >= 0.99 && oracle.img2txt[0] >= 0.99, "(a) oracle MAP@1 < 0.99");

  const FeatureSet text(Modality::kText, data.text);
  const FeatureSet image(Modality::kImage, data.image);
  TrainConfig tc;  // defaults
  tc.epochs = 50;
  const FitResult trained = fit(text, image, data.pairs, tc);
  const DirectionMaps model = evaluate_both(trained.model, data);
  o.require(model.txt2img[0] >= 0.9 && model.img2txt[0] >= 0.9, "(b) MAP@1 < 0.9");
  o.require(model.txt2img[2] >= 0.95 && model.img2txt[2] >= 0.95, "(b) MAP@10 < 0.95");

  TrainConfig frozen = tc;
  frozen.epochs = 0;
  const FitResult baseline_fit = fit(text, image, data.pairs, frozen);
  const DirectionMaps baseline = evaluate_both(baseline_fit.model, data);
  o.require(model.txt2img[2] - baseline.txt2img[2] >= 0.3 &&
                model.img2txt[2] - baseline.img2txt[2] >= 0.3,
            "(c) baseline gap < 0.3");

  const double elapsed = seconds_since(start);
  o.require(elapsed < 60.0, "runtime " + fmt("%.1f s", elapsed));
  o.detail = describe("oracle", oracle) + "; " + describe("trained", model) + "; " +
             describe("random", baseline) + "; " + fmt("%.1f s", elapsed) +
             (o.pass ? "" : " | " + o.detail);

  std::vector<FeatureRecord> all = data.text;
  all.insert(all.end(), data.image.begin(), data.image.end());
  const UnifiedIndex index = index_features(trained.model, all);
  g_shape_reports = {
      evaluate_retrieval(trained.model, index, data.text, data.qrels, kDefaultKList,
                         Direction::kTextToImage),
      evaluate_retrieval(trained.model, index, data.image, data.qrels, kDefaultKList,
                         Direction::kImageToText)};
  return o;
}

// 7. Report shape mirrors MAP@{1,5,10} x {txt2img, img2txt}.
Outcome report_shape() {
  Outcome o;
  o.require(g_shape_reports.size() == 2, "criterion 6 produced no reports");
  if (!o.pass) return o;
  const std::string table = format_report_table(g_shape_reports);
  const std::string json = io::format_report(g_shape_reports);
  for (const char* token : {"MAP@1", "MAP@5", "MAP@10", "txt2img", "img2txt"}) {
    o.require(table.find(token) != std::string::npos, std::string("table lacks ") + token);
    o.require(json.find(token) != std::string::npos, std::string("report lacks ") + token);
  }
  o.require(io::parse_report(json) == g_shape_reports, "report does not round-trip");
  if (o.pass) o.detail = "table and report carry MAP@1 MAP@5 MAP@10 for txt2img and img2txt";
  return o;
}

// 8. Identical CLI invocations produce byte-identical artifacts.
Outcome determinism() {
  Outcome o;
  auto pipeline = [](const testing::TempDir& dir) {
    std::ostringstream out, err;
    auto call = [&](std::vector<std::string> args) {
      return cli::cli_main(args, out, err);
    };
    const std::string d = dir.path().string();
    int rc = call({"synth", "--out-dir", d, "--pairs-per-cluster", "10", "--seed", "42"});
    rc |= call({"train", "--text", d + "/text.jsonl", "--image", d + "/image.jsonl", "--pairs",
                d + "/pairs.tsv", "--out", d + "/model.json", "--epochs", "5", "--seed", "42"});
    rc |= call({"index", "--model", d + "/model.json", "--features", d + "/text.jsonl",
                "--features", d + "/image.jsonl", "--out", d + "/index.json"});
    rc |= call({"eval", "--model", d + "/model.json", "--index", d + "/index.json", "--text",
                d + "/text.jsonl", "--image", d + "/image.jsonl", "--pairs", d + "/pairs.tsv",
                "--out", d + "/report.json"});
    return rc;
  };
  testing::TempDir a, b;
  o.require(pipeline(a) == 0 && pipeline(b) == 0, "pipeline failed");
  for (const char* name : {"model.json", "index.json", "report.json"}) {
    const std::string left = testing::read_text(a / name);
    o.require(!left.empty() && left == testing::read_text(b / name),
              std::string(name) + " differs");
  }
  if (o.pass) o.detail = "model.json, index.json, report.json byte-identical across two runs";
  return o;
}

// 9. Pair relevance head on the separable toy set.
Outcome pair_head() {
  Outcome o;
  o.require(combine_pair(Vector{1, 2}, Vector{1, 2}) == Vector{1, 2, 1, 2, 0, 0, 1, 2},
            "combine_pair x == y");
  o.require(combine_pair(Vector{1, 0}, Vector{0, 1}) == Vector{1, 0, 0, 1, 1, 1, 1, 1},
            "combine_pair orthogonal");
  const auto examples = make_separable_pairs(200, 8, 42);
  std::size_t oracle_correct = 0;
  for (const auto& e : examples) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < e.x.size(); ++i) d2 += (e.x[i] - e.y[i]) * (e.x[i] - e.y[i]);
    if ((std::sqrt(d2) < 0.7) == e.relevant) ++oracle_correct;
  }
  o.require(oracle_correct == examples.size(), "distance threshold does not separate the set");
  TrainConfig config;
  config.epochs = 100;
  config.seed = 42;
  const double accuracy = pair_accuracy(fit_pair_head(examples, config), examples);
  o.require(accuracy >= 0.95, "accuracy " + fmt("%.3f", accuracy));
  if (o.pass) o.detail = "threshold oracle separates 200/200; training accuracy " + fmt("%.3f", accuracy);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1. gradient correctness", gradient_correctness},
      {"2. loss closed forms", loss_closed_forms},
      {"3. metric oracle equivalence", metric_oracle},
      {"4. ranking exactness", ranking_exactness},
      {"5. cosine similarity properties", cosine_properties},
      {"6. end-to-end synthetic reproduction", end_to_end},
      {"7. report table shape", report_shape},
      {"8. CLI determinism", determinism},
      {"9. pair relevance head", pair_head},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
