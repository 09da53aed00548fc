#include "cardl/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "cardl/errors.hpp"

namespace cardl {

void SyntheticConfig::validate() const {
  if (clusters < 2) throw UsageError("synthetic data needs at least 2 clusters");
  if (pairs_per_cluster < 1) throw UsageError("pairs_per_cluster must be at least 1");
  if (latent_dim == 0 || text_dim == 0 || image_dim == 0) {
    throw UsageError("synthetic dimensions must be positive");
  }
  if (latent_dim > text_dim || latent_dim > image_dim) {
    throw UsageError("latent_dim " + std::to_string(latent_dim) +
                     " exceeds text_dim/image_dim " + std::to_string(text_dim) + "/" +
                     std::to_string(image_dim));
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw UsageError("noise_sigma must be a nonnegative number");
  }
  if (identity_maps && (text_dim != latent_dim || image_dim != latent_dim)) {
    throw UsageError("identity maps need text_dim == image_dim == latent_dim");
  }
}

namespace {

std::string make_id(char prefix, std::size_t i, std::size_t total) {
  const int width = static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

Matrix random_map(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

Vector apply(const Matrix& map, const Vector& z, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Vector out(map.rows());
  for (std::size_t r = 0; r < map.rows(); ++r) {
    out[r] = dot(map.row(r), z);
    if (sigma > 0.0) out[r] += sigma * noise(rng);
  }
  return out;
}

MlpParams linear_head(Matrix weight) {
  MlpParams head;
  const std::size_t rows = weight.rows();
  head.layers.push_back({std::move(weight), Vector(rows, 0.0)});
  return head;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticDataset data;
  if (config.identity_maps) {
    data.text_map = Matrix::identity(config.latent_dim);
    data.image_map = Matrix::identity(config.latent_dim);
  } else {
    data.text_map = random_map(config.text_dim, config.latent_dim, rng);
    data.image_map = random_map(config.image_dim, config.latent_dim, rng);
  }

  std::vector<Vector> centers(config.clusters, Vector(config.latent_dim));
  for (auto& c : centers)
    for (double& v : c) v = normal(rng);

  const std::size_t total = config.clusters * config.pairs_per_cluster;
  for (std::size_t p = 0; p < total; ++p) {
    const std::size_t cluster = p % config.clusters;
    Vector z = centers[cluster];
    if (config.noise_sigma > 0.0) {
      for (double& v : z) v += config.noise_sigma * normal(rng);
    }
    const std::string text_id = make_id('t', p, total);
    const std::string image_id = make_id('i', p, total);
    data.text.push_back({text_id, Modality::kText, apply(data.text_map, z, config.noise_sigma, rng)});
    data.image.push_back(
        {image_id, Modality::kImage, apply(data.image_map, z, config.noise_sigma, rng)});
    std::optional<std::string> label;
    if (config.label_pairs) label = "c" + std::to_string(cluster);
    data.pairs.push_back({text_id, image_id, label});
    data.latents.push_back(std::move(z));
    data.clusters.push_back(cluster);
  }

  for (std::size_t p = 0; p < total; ++p) {
    for (std::size_t q = 0; q < total; ++q) {
      const bool relevant =
          p == q || (config.same_cluster_relevant && data.clusters[p] == data.clusters[q]);
      if (!relevant) continue;
      data.qrels[data.pairs[p].text_id].insert(data.pairs[q].image_id);
      data.qrels[data.pairs[p].image_id].insert(data.pairs[q].text_id);
    }
  }

  data.oracle_model.text_head = linear_head(pseudo_inverse(data.text_map));
  data.oracle_model.image_head = linear_head(pseudo_inverse(data.image_map));
  data.oracle_model.unified_dim = config.latent_dim;
  data.oracle_model.temperature = kDefaultTemperature;
  return data;
}

}  // namespace cardl
