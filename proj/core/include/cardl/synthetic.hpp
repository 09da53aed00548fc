#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/evaluation.hpp"
#include "cardl/features.hpp"
#include "cardl/matrix.hpp"

namespace cardl {

// Clustered corpus with a known linear generative model. Each pair shares a
// latent z = center + N(0, sigma); text = A_t z + N(0, sigma) and
// image = A_i z + N(0, sigma). Clusters play the role of distinct fields.
struct SyntheticConfig {
  std::size_t clusters = 8;
  std::size_t pairs_per_cluster = 50;
  std::size_t text_dim = 128;
  std::size_t image_dim = 192;
  std::size_t latent_dim = 16;
  double noise_sigma = 0.1;
  std::uint64_t seed = 42;
  // Judge every same-cluster item relevant instead of only the paired one.
  bool same_cluster_relevant = false;
  // Write the cluster as the pair label (extra in-batch positives in training).
  bool label_pairs = false;
  // Use A_t = A_i = I; requires text_dim == image_dim == latent_dim.
  bool identity_maps = false;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<FeatureRecord> text;
  std::vector<FeatureRecord> image;
  std::vector<PairedExample> pairs;
  RelevanceJudgments qrels;
  std::vector<Vector> latents;        // one per pair
  std::vector<std::size_t> clusters;  // cluster of each pair
  Matrix text_map;                    // text_dim x latent_dim
  Matrix image_map;                   // image_dim x latent_dim
  // Linear heads computing pinv(A) x, i.e. latent recovery, for each modality.
  AlignmentModel oracle_model;
};

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

}  // namespace cardl
