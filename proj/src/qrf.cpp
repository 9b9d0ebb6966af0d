#include "gar/qrf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gar/parallel.hpp"
#include "gar/qr_core.hpp"
#include "gar/rng.hpp"

namespace gar {

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error(ErrorKind::usage, "need at least one tree");
  if (min_leaf < 1) throw Error(ErrorKind::usage, "min_leaf must be >= 1");
  if (mtry_extra < 0) throw Error(ErrorKind::usage, "mtry_extra must be >= 0");
}

int Tree::find_leaf(const Eigen::Ref<const Vector>& x) const {
  int at = 0;
  while (nodes[at].leaf_id < 0) {
    const Node& node = nodes[at];
    at = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[at].leaf_id;
}

namespace {

// Fenwick tree over response ranks; supports the prefix-count search used
// by the quantile-split sweep.
class RankCounter {
 public:
  explicit RankCounter(int n) : tree_(n + 1, 0), n_(n) {
    log_ = 1;
    while ((1 << log_) <= n_) ++log_;
  }
  void add(int i, int delta) {
    for (++i; i <= n_; i += i & -i) tree_[i] += delta;
  }
  // 0-based rank of the smallest element whose prefix count reaches target
  int find(int target) const {
    int pos = 0, rem = target;
    for (int pw = 1 << log_; pw > 0; pw >>= 1) {
      const int next = pos + pw;
      if (next <= n_ && tree_[next] < rem) {
        pos = next;
        rem -= tree_[next];
      }
    }
    return pos;
  }

 private:
  std::vector<int> tree_;
  int n_;
  int log_;
};

struct NodeTask {
  std::vector<int> rows;
  int node_index;
};

struct BestSplit {
  double criterion = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

std::vector<int> draw_feature_subset(int p, int k, std::mt19937_64& rng) {
  std::vector<int> pool(p);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, p - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

Tree grow_tree(const Matrix& x, const Vector& y, const std::vector<int>& rows,
               const ForestConfig& config, ForestVariant variant,
               std::mt19937_64& rng) {
  config.validate();
  if (rows.empty()) throw Error(ErrorKind::usage, "grow_tree: empty sample");
  const int p = static_cast<int>(x.cols());
  const int mtry = std::min(
      p, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))) +
             config.mtry_extra);

  Tree tree;
  tree.structure_rows = rows;
  tree.nodes.push_back({});
  std::vector<NodeTask> stack;
  stack.push_back({rows, 0});
  int leaf_count = 0;

  std::vector<std::pair<double, double>> by_feature;  // (value, response)

  while (!stack.empty()) {
    NodeTask task = std::move(stack.back());
    stack.pop_back();
    auto& node_rows = task.rows;
    const int n = static_cast<int>(node_rows.size());

    double y_min = y[node_rows[0]], y_max = y_min;
    for (int r : node_rows) {
      y_min = std::min(y_min, y[r]);
      y_max = std::max(y_max, y[r]);
    }

    BestSplit best;
    if (n > config.min_leaf && y_max > y_min) {
      const auto subset = draw_feature_subset(p, mtry, rng);

      // parent statistic
      double parent_stat;
      std::vector<double> node_y(n);
      for (int i = 0; i < n; ++i) node_y[i] = y[node_rows[i]];
      std::vector<double> uniq = node_y;
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      if (variant == ForestVariant::qrfm) {
        parent_stat = std::accumulate(node_y.begin(), node_y.end(), 0.0) / n;
      } else {
        parent_stat = uniq[0];
        int c = quantile_count(config.tau.tau(), n);
        int seen = 0;
        for (double v : uniq) {
          seen += static_cast<int>(std::count(node_y.begin(), node_y.end(), v));
          if (seen >= c) {
            parent_stat = v;
            break;
          }
        }
      }

      for (int feature : subset) {
        by_feature.clear();
        by_feature.reserve(n);
        for (int r : node_rows) by_feature.push_back({x(r, feature), y[r]});
        std::sort(by_feature.begin(), by_feature.end());
        if (by_feature.front().first == by_feature.back().first) continue;

        if (variant == ForestVariant::qrfm) {
          double left_sum = 0.0;
          const double total =
              std::accumulate(node_y.begin(), node_y.end(), 0.0);
          for (int i = 0; i + 1 < n; ++i) {
            left_sum += by_feature[i].second;
            if (by_feature[i].first == by_feature[i + 1].first) continue;
            const double mean_l = left_sum / (i + 1);
            const double mean_r = (total - left_sum) / (n - i - 1);
            const double crit = std::abs(mean_l - parent_stat) +
                                std::abs(mean_r - parent_stat);
            if (crit > best.criterion) {
              best = {crit, feature,
                      0.5 * (by_feature[i].first + by_feature[i + 1].first)};
            }
          }
        } else {
          const int m_ranks = static_cast<int>(uniq.size());
          RankCounter left(m_ranks), right(m_ranks);
          std::vector<int> rank_of(n);
          for (int i = 0; i < n; ++i) {
            rank_of[i] = static_cast<int>(
                std::lower_bound(uniq.begin(), uniq.end(), by_feature[i].second) -
                uniq.begin());
            right.add(rank_of[i], 1);
          }
          for (int i = 0; i + 1 < n; ++i) {
            left.add(rank_of[i], 1);
            right.add(rank_of[i], -1);
            if (by_feature[i].first == by_feature[i + 1].first) continue;
            const double q_l =
                uniq[left.find(quantile_count(config.tau.tau(), i + 1))];
            const double q_r =
                uniq[right.find(quantile_count(config.tau.tau(), n - i - 1))];
            const double crit =
                std::abs(q_l - parent_stat) + std::abs(q_r - parent_stat);
            if (crit > best.criterion) {
              best = {crit, feature,
                      0.5 * (by_feature[i].first + by_feature[i + 1].first)};
            }
          }
        }
      }

      if (best.feature >= 0) {
        Tree::Node& parent = tree.nodes[task.node_index];
        parent.feature = best.feature;
        parent.threshold = best.threshold;
        parent.subset_size = static_cast<int>(subset.size());
        std::vector<int> left_rows, right_rows;
        for (int r : node_rows) {
          if (x(r, best.feature) <= best.threshold)
            left_rows.push_back(r);
          else
            right_rows.push_back(r);
        }
        const int left_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        const int right_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[task.node_index].left = left_index;
        tree.nodes[task.node_index].right = right_index;
        stack.push_back({std::move(left_rows), left_index});
        stack.push_back({std::move(right_rows), right_index});
        continue;
      }
    }
    tree.nodes[task.node_index].leaf_id = leaf_count++;
  }

  tree.leaf_rows.assign(leaf_count, {});
  return tree;
}

Forest fit_forest(const PanelData& panel, const ForestConfig& config,
                  ForestVariant variant) {
  config.validate();
  const Eigen::Index t_len = panel.T();
  if (t_len < 4) throw Error(ErrorKind::data, "fit_forest: need T >= 4");

  Forest forest;
  forest.config = config;
  forest.variant = variant;
  forest.responses = panel.y;
  forest.trees.resize(config.n_trees);

  std::vector<std::string> failures(config.n_trees);
  par::parallel_for(config.n_trees, [&](std::ptrdiff_t b) {
    try {
      std::mt19937_64 rng = make_engine(config.seed, static_cast<std::uint64_t>(b));
      const int n_b = static_cast<int>(t_len) / 2;
      std::vector<int> pool(t_len);
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < n_b; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(t_len) - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      // drawn prefix is already in random order: front half builds the
      // structure, the rest carries the weights (extra row on odd sizes)
      const int n_tree = n_b / 2;
      std::vector<int> structure(pool.begin(), pool.begin() + n_tree);
      std::vector<int> weights(pool.begin() + n_tree, pool.begin() + n_b);

      Tree tree = grow_tree(panel.x, panel.y, structure, config, variant, rng);
      tree.weight_rows = weights;
      for (int r : weights) {
        const int leaf = tree.find_leaf(panel.x.row(r));
        tree.leaf_rows[leaf].push_back(r);
      }
      forest.trees[b] = std::move(tree);
    } catch (const std::exception& e) {
      failures[b] = e.what();
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw Error(ErrorKind::numeric, "fit_forest: " + f);
  return forest;
}

Vector forest_weights(const Forest& forest, const Eigen::Ref<const Vector>& x) {
  const Eigen::Index t_len = forest.responses.size();
  const int n_trees = static_cast<int>(forest.trees.size());
  std::vector<int> leaf_of(n_trees);
  par::parallel_for(n_trees, [&](std::ptrdiff_t b) {
    leaf_of[b] = forest.trees[b].find_leaf(x);
  });

  Vector w = Vector::Zero(t_len);
  if (!forest.config.normalize_leaf_weights) {
    std::vector<long long> counts(t_len, 0);
    for (int b = 0; b < n_trees; ++b)
      for (int r : forest.trees[b].leaf_rows[leaf_of[b]]) ++counts[r];
    for (Eigen::Index r = 0; r < t_len; ++r)
      w[r] = static_cast<double>(counts[r]) / n_trees;
  } else {
    for (int b = 0; b < n_trees; ++b) {
      const auto& members = forest.trees[b].leaf_rows[leaf_of[b]];
      if (members.empty()) continue;
      const double share = 1.0 / (static_cast<double>(members.size()) * n_trees);
      for (int r : members) w[r] += share;
    }
  }
  return w;
}

double predict_quantile_with(const Forest& forest,
                             const Eigen::Ref<const Vector>& x,
                             QuantileLevel tau, const Vector& responses) {
  if (responses.size() != forest.responses.size())
    throw Error(ErrorKind::usage, "response override has the wrong length");
  Vector w = forest_weights(forest, x);
  if (w.sum() <= 0.0)
    throw AllLeavesEmpty("no weight-half member in any matching leaf");
  return weighted_quantile(responses, w, tau);
}

double predict_quantile(const Forest& forest,
                        const Eigen::Ref<const Vector>& x, QuantileLevel tau) {
  return predict_quantile_with(forest, x, tau, forest.responses);
}

}  // namespace gar
