#pragma once

#include <cstdint>
#include <random>

#include "gar/dataset.hpp"
#include "gar/types.hpp"

namespace gar {

enum class ForestVariant { qrfm, qrfatw };

struct ForestConfig {
  int n_trees = 2000;
  int min_leaf = 5;
  int mtry_extra = 20;  // J: features per split = min(p, floor(sqrt(p)) + J)
  QuantileLevel tau{0.05};
  std::uint64_t seed = 0;
  // Meinshausen-style per-leaf weight normalization; the displayed raw
  // count formula is the default.
  bool normalize_leaf_weights = false;
  void validate() const;
};

struct Tree {
  struct Node {
    int feature = -1;       // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_id = -1;
    int subset_size = 0;    // candidate features drawn at this split
  };
  std::vector<Node> nodes;                 // nodes[0] is the root
  std::vector<std::vector<int>> leaf_rows; // weight-half rows per leaf
  std::vector<int> structure_rows;
  std::vector<int> weight_rows;

  int n_leaves() const { return static_cast<int>(leaf_rows.size()); }
  int find_leaf(const Eigen::Ref<const Vector>& x) const;
};

struct Forest {
  ForestConfig config;
  ForestVariant variant = ForestVariant::qrfm;
  std::vector<Tree> trees;
  Vector responses;  // full training response vector
};

/// Grow one tree on the given structure rows: depth-first, split feature
/// drawn from a fresh random subset, split values at midpoints between
/// consecutive distinct feature values, children always nonempty. Nodes
/// where no candidate split improves the criterion become leaves.
Tree grow_tree(const Matrix& x, const Vector& y, const std::vector<int>& rows,
               const ForestConfig& config, ForestVariant variant,
               std::mt19937_64& rng);

/// B trees, each on an independent half-sample split into a structure half
/// and a weights half. Per-tree seeds are derived in counter mode from the
/// root seed, so the forest is reproducible and trees are independent of
/// the thread schedule.
Forest fit_forest(const PanelData& panel, const ForestConfig& config,
                  ForestVariant variant);

/// Accumulated leaf-membership weights over the training rows for a query.
Vector forest_weights(const Forest& forest, const Eigen::Ref<const Vector>& x);

double predict_quantile(const Forest& forest,
                        const Eigen::Ref<const Vector>& x, QuantileLevel tau);

/// Same prediction with the response vector replaced; the honesty property
/// says structure-half perturbations cannot change the result.
double predict_quantile_with(const Forest& forest,
                             const Eigen::Ref<const Vector>& x,
                             QuantileLevel tau, const Vector& responses);

}  // namespace gar
