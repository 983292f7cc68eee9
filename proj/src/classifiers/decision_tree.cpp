#include "eitvent/classifiers/decision_tree.hpp"

#include <algorithm>
#include <cmath>

#include "eitvent/errors.hpp"

namespace eitvent {

ColumnMatrix ColumnMatrix::from(const TrainingSet& data) {
  ColumnMatrix m;
  m.n = data.n;
  m.d = data.d;
  m.y = data.y;
  m.columns.resize(static_cast<std::size_t>(data.n) *
                   static_cast<std::size_t>(data.d));
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.d; ++j) {
      m.columns[static_cast<std::size_t>(j) * static_cast<std::size_t>(m.n) +
                static_cast<std::size_t>(i)] = data.at(i, j);
    }
  }
  return m;
}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& b = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(b.feature)] < b.threshold ? b.left : b.right;
  }
  return nodes[static_cast<std::size_t>(node)];
}

std::vector<double> Tree::importance(int n_features) const {
  std::vector<double> imp(static_cast<std::size_t>(n_features), 0.0);
  for (const TreeNode& node : nodes) {
    if (node.feature >= 0) {
      imp[static_cast<std::size_t>(node.feature)] += node.risk_reduction;
    }
  }
  if (branch_count > 0) {
    for (double& v : imp) v /= branch_count;
  }
  return imp;
}

namespace {

double gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p0 = w0 / w;
  const double p1 = w1 / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;  // impurity decrease, node-relative
};

struct Entry {
  double value;
  double weight;
  std::uint8_t label;
};

struct EntryLight {
  double value;
  std::uint8_t label;
};

class TreeBuilder {
 public:
  TreeBuilder(const ColumnMatrix& data, std::span<const int> samples,
              std::span<const double> weights, const TreeBuildConfig& config,
              Rng* rng)
      : data_(data), config_(config), rng_(rng),
        samples_(samples.begin(), samples.end()),
        weights_(weights.begin(), weights.end()) {
    unweighted_ = true;
    for (const double w : weights_) {
      root_weight_ += w;
      if (w != 1.0) unweighted_ = false;
    }
  }

  Tree build() {
    Tree tree;
    tree.nodes.reserve(64);
    grow(tree, 0, static_cast<int>(samples_.size()), 0);
    return tree;
  }

 private:
  int grow(Tree& tree, int begin, int end, int depth) {
    double w0 = 0.0;
    double w1 = 0.0;
    for (int i = begin; i < end; ++i) {
      const int s = samples_[static_cast<std::size_t>(i)];
      const double w = weights_[static_cast<std::size_t>(i)];
      if (data_.y[static_cast<std::size_t>(s)] == 0) {
        w0 += w;
      } else {
        w1 += w;
      }
    }
    const int count = end - begin;
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const bool can_split = depth < config_.max_depth &&
                           count >= 2 * config_.min_leaf && w0 > 0.0 && w1 > 0.0;
    SplitChoice split;
    if (can_split) split = best_split(begin, end, w0, w1);

    if (!split.found) {
      TreeNode& leaf = tree.nodes[static_cast<std::size_t>(node_id)];
      leaf.feature = -1;
      // Weighted majority; ties label non-healthy.
      leaf.leaf_label = w1 >= w0 ? 1 : 0;
      leaf.nh_fraction = (w0 + w1) > 0.0 ? w1 / (w0 + w1) : 1.0;
      return node_id;
    }

    const int mid = partition(begin, end, split.feature, split.threshold);
    {
      TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.risk_reduction = ((w0 + w1) / root_weight_) * split.decrease;
    }
    ++tree.branch_count;
    const int left = grow(tree, begin, mid, depth + 1);
    const int right = grow(tree, mid, end, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.left = left;
    node.right = right;
    return node_id;
  }

  // Both sweeps maximize the Gini proxy
  //   (l0^2 + l1^2)/wl + (r0^2 + r1^2)/wr,
  // which is an increasing affine image of the impurity decrease.
  // Gini is concave, so the decrease is mathematically >= 0; zero-gain
  // splits on impure nodes are kept (they can enable gains deeper
  // down, e.g. XOR). Strict improvement keeps the first candidate on
  // ties: the lowest feature index, then the lowest threshold.
  SplitChoice best_split(int begin, int end, double w0, double w1) {
    const double node_weight = w0 + w1;
    SplitChoice best;
    if (gini(w0, w1) <= 0.0) return best;

    candidate_features_.clear();
    if (config_.mtry <= 0 || config_.mtry >= data_.d) {
      for (int f = 0; f < data_.d; ++f) candidate_features_.push_back(f);
    } else {
      candidate_features_ = rng_->sample_without_replacement(data_.d, config_.mtry);
    }

    const int m = end - begin;
    double best_proxy = 0.0;
    if (unweighted_) {
      light_entries_.resize(static_cast<std::size_t>(m));
      for (const int f : candidate_features_) {
        for (int i = begin; i < end; ++i) {
          const int s = samples_[static_cast<std::size_t>(i)];
          light_entries_[static_cast<std::size_t>(i - begin)] = {
              data_.value(s, f), data_.y[static_cast<std::size_t>(s)]};
        }
        std::sort(light_entries_.begin(), light_entries_.end(),
                  [](const EntryLight& a, const EntryLight& b) {
                    return a.value < b.value;
                  });
        int left1 = 0;
        for (int i = 0; i + 1 < m; ++i) {
          left1 += light_entries_[static_cast<std::size_t>(i)].label;
          if (light_entries_[static_cast<std::size_t>(i)].value ==
              light_entries_[static_cast<std::size_t>(i + 1)].value) {
            continue;
          }
          const int left_count = i + 1;
          const int right_count = m - left_count;
          if (left_count < config_.min_leaf || right_count < config_.min_leaf) {
            continue;
          }
          const double l1 = left1;
          const double l0 = left_count - left1;
          const double r1 = w1 - l1;
          const double r0 = w0 - l0;
          const double proxy =
              (l0 * l0 + l1 * l1) / left_count + (r0 * r0 + r1 * r1) / right_count;
          if (!best.found || proxy > best_proxy + 1e-9) {
            best.found = true;
            best.feature = f;
            best.threshold =
                (light_entries_[static_cast<std::size_t>(i)].value +
                 light_entries_[static_cast<std::size_t>(i + 1)].value) /
                2.0;
            best_proxy = proxy;
          }
        }
      }
    } else {
      entries_.resize(static_cast<std::size_t>(m));
      for (const int f : candidate_features_) {
        for (int i = begin; i < end; ++i) {
          const int s = samples_[static_cast<std::size_t>(i)];
          entries_[static_cast<std::size_t>(i - begin)] = {
              data_.value(s, f), weights_[static_cast<std::size_t>(i)],
              data_.y[static_cast<std::size_t>(s)]};
        }
        std::sort(entries_.begin(), entries_.end(),
                  [](const Entry& a, const Entry& b) { return a.value < b.value; });
        double left0 = 0.0;
        double left1 = 0.0;
        for (int i = 0; i + 1 < m; ++i) {
          const Entry& e = entries_[static_cast<std::size_t>(i)];
          if (e.label == 0) {
            left0 += e.weight;
          } else {
            left1 += e.weight;
          }
          if (e.value == entries_[static_cast<std::size_t>(i + 1)].value) continue;
          const int left_count = i + 1;
          const int right_count = m - left_count;
          if (left_count < config_.min_leaf || right_count < config_.min_leaf) {
            continue;
          }
          const double wl = left0 + left1;
          const double wr = node_weight - wl;
          if (wl <= 0.0 || wr <= 0.0) continue;
          const double r0 = w0 - left0;
          const double r1 = w1 - left1;
          const double proxy = (left0 * left0 + left1 * left1) / wl +
                               (r0 * r0 + r1 * r1) / wr;
          if (!best.found || proxy > best_proxy + 1e-15) {
            best.found = true;
            best.feature = f;
            best.threshold =
                (e.value + entries_[static_cast<std::size_t>(i + 1)].value) / 2.0;
            best_proxy = proxy;
          }
        }
      }
    }
    if (best.found) {
      const double base_proxy = (w0 * w0 + w1 * w1) / node_weight;
      best.decrease = std::max(0.0, (best_proxy - base_proxy) / node_weight);
    }
    return best;
  }

  /// Stable partition of [begin,end) on value < threshold; returns the
  /// boundary. Keeps samples_ and weights_ aligned.
  int partition(int begin, int end, int feature, double threshold) {
    scratch_samples_.clear();
    scratch_weights_.clear();
    int mid = begin;
    for (int i = begin; i < end; ++i) {
      const int s = samples_[static_cast<std::size_t>(i)];
      if (data_.value(s, feature) < threshold) {
        samples_[static_cast<std::size_t>(mid)] = s;
        weights_[static_cast<std::size_t>(mid)] =
            weights_[static_cast<std::size_t>(i)];
        ++mid;
      } else {
        scratch_samples_.push_back(s);
        scratch_weights_.push_back(weights_[static_cast<std::size_t>(i)]);
      }
    }
    std::copy(scratch_samples_.begin(), scratch_samples_.end(),
              samples_.begin() + mid);
    std::copy(scratch_weights_.begin(), scratch_weights_.end(),
              weights_.begin() + mid);
    return mid;
  }

  const ColumnMatrix& data_;
  TreeBuildConfig config_;
  Rng* rng_;
  std::vector<int> samples_;
  std::vector<double> weights_;
  std::vector<int> candidate_features_;
  std::vector<Entry> entries_;
  std::vector<EntryLight> light_entries_;
  std::vector<int> scratch_samples_;
  std::vector<double> scratch_weights_;
  double root_weight_ = 0.0;
  bool unweighted_ = false;
};

}  // namespace

Tree build_tree(const ColumnMatrix& data, std::span<const int> samples,
                std::span<const double> weights, const TreeBuildConfig& config,
                Rng* rng) {
  if (samples.empty() || samples.size() != weights.size()) {
    throw DataError("build_tree: samples and weights must align and be non-empty");
  }
  if (config.mtry > 0 && config.mtry < data.d && rng == nullptr) {
    throw DataError("build_tree: feature subsampling requires an rng");
  }
  TreeBuilder builder(data, samples, weights, config, rng);
  return builder.build();
}

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::train(
    const TrainingSet& data, const TreeParams& params, std::uint64_t seed) {
  data.validate();
  const ColumnMatrix columns = ColumnMatrix::from(data);
  std::vector<int> samples(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) samples[static_cast<std::size_t>(i)] = i;
  const std::vector<double> weights(static_cast<std::size_t>(data.n), 1.0);
  TreeBuildConfig config;
  config.max_depth = params.max_depth;
  config.min_leaf = params.min_leaf;
  config.mtry = 0;
  Tree tree = build_tree(columns, samples, weights, config, nullptr);
  return std::make_unique<DecisionTreeModel>(std::move(tree), data.d, params, seed);
}

Prediction DecisionTreeModel::predict(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != dimension_) {
    throw DataError("feature dimension mismatch: got " +
                    std::to_string(features.size()) + ", expected " +
                    std::to_string(dimension_));
  }
  const TreeNode& leaf = tree_.leaf_for(features);
  return {static_cast<Label>(leaf.leaf_label), leaf.nh_fraction};
}

nlohmann::json tree_to_json(const Tree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({{"f", n.feature},
                     {"t", n.threshold},
                     {"l", n.left},
                     {"r", n.right},
                     {"c", n.leaf_label},
                     {"p", n.nh_fraction},
                     {"rr", n.risk_reduction}});
  }
  return {{"nodes", std::move(nodes)}, {"branch_count", tree.branch_count}};
}

Tree tree_from_json(const nlohmann::json& j) {
  Tree tree;
  tree.branch_count = j.at("branch_count").get<int>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("f").get<int>();
    node.threshold = n.at("t").get<double>();
    node.left = n.at("l").get<int>();
    node.right = n.at("r").get<int>();
    node.leaf_label = n.at("c").get<std::uint8_t>();
    node.nh_fraction = n.at("p").get<double>();
    node.risk_reduction = n.at("rr").get<double>();
    tree.nodes.push_back(node);
  }
  return tree;
}

nlohmann::json DecisionTreeModel::params_to_json() const {
  return {{"dimension", dimension_}, {"tree", tree_to_json(tree_)}};
}

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::from_json(
    const nlohmann::json& j) {
  const auto& params_json = j.at("hyperparameters");
  TreeParams params;
  params.max_depth = params_json.at("max_depth").get<int>();
  params.min_leaf = params_json.at("min_leaf").get<int>();
  return std::make_unique<DecisionTreeModel>(
      tree_from_json(j.at("parameters").at("tree")),
      j.at("parameters").at("dimension").get<int>(), params,
      j.at("seed").get<std::uint64_t>());
}

}  // namespace eitvent
