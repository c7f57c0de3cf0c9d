#include "ugbdt/tree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "ugbdt/errors.hpp"

namespace ugbdt {

namespace {

std::atomic<std::uint64_t> g_tree_evals{0};

} // namespace

std::uint64_t tree_evaluations() { return g_tree_evals.load(std::memory_order_relaxed); }
void reset_tree_evaluations() { g_tree_evals.store(0, std::memory_order_relaxed); }
void add_tree_evaluations(std::uint64_t count) {
    g_tree_evals.fetch_add(count, std::memory_order_relaxed);
}

void TreeParams::validate() const {
    if (min_rows_per_leaf < 1) throw ValidationError("min_rows_per_leaf must be >= 1");
    if (max_bins < 2) throw ValidationError("max_bins must be >= 2");
    if (max_bins > 65535) throw ValidationError("max_bins must fit 16-bit codes (<= 65535)");
}

BinnedMatrix BinnedMatrix::build(const EncodedMatrix& X, std::size_t max_bins) {
    if (max_bins < 2 || max_bins > 65535) {
        throw ValidationError("max_bins must be in [2, 65535]");
    }
    BinnedMatrix b;
    b.n = X.n;
    b.p = X.p;
    b.thresholds.resize(X.p);
    b.n_codes.resize(X.p);
    b.codes.resize(X.n * X.p);

    std::vector<double> sorted(X.n);
    std::vector<double> boundaries;
    for (std::size_t f = 0; f < X.p; ++f) {
        for (std::size_t r = 0; r < X.n; ++r) sorted[r] = X.at(r, f);
        std::sort(sorted.begin(), sorted.end());

        boundaries.clear();
        for (const double v : sorted) {
            if (boundaries.empty() || boundaries.back() != v) boundaries.push_back(v);
        }
        if (boundaries.size() > max_bins) {
            // Too many distinct values: keep max_bins evenly spaced order
            // statistics of the rows (min and max always included).
            std::vector<double> selected;
            selected.reserve(max_bins);
            for (std::size_t k = 0; k < max_bins; ++k) {
                const std::size_t rank = k * (X.n - 1) / (max_bins - 1);
                const double v = sorted[rank];
                if (selected.empty() || selected.back() != v) selected.push_back(v);
            }
            boundaries = std::move(selected);
        }

        auto& thr = b.thresholds[f];
        thr.reserve(boundaries.size() > 0 ? boundaries.size() - 1 : 0);
        for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
            thr.push_back(boundaries[i] + (boundaries[i + 1] - boundaries[i]) / 2.0);
        }
        b.n_codes[f] = static_cast<std::uint16_t>(thr.size() + 1);

        for (std::size_t r = 0; r < X.n; ++r) {
            const auto it = std::lower_bound(thr.begin(), thr.end(), X.at(r, f));
            b.codes[r * X.p + f] = static_cast<std::uint16_t>(it - thr.begin());
        }
    }
    return b;
}

namespace {

// Depth-first recursive construction. Each split depends only on the node's
// own rows, so this grows the same tree as a level-by-level sweep, and the
// node list comes out in preorder.
class TreeBuilder {
public:
    TreeBuilder(const BinnedMatrix& binned, std::span<const double> targets, std::size_t d_out,
                const TreeParams& params, DecisionTree& tree)
        : b_(binned), targets_(targets), d_out_(d_out), params_(params), tree_(tree) {
        hist_offset_.resize(b_.p + 1, 0);
        for (std::size_t f = 0; f < b_.p; ++f) {
            hist_offset_[f + 1] = hist_offset_[f] + b_.n_codes[f];
        }
        hist_sums_.resize(hist_offset_[b_.p] * d_out_);
        hist_counts_.resize(hist_offset_[b_.p]);
    }

    std::int32_t build(std::vector<std::uint32_t>& order, std::size_t begin, std::size_t end,
                       std::size_t depth) {
        const auto index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const std::size_t n_node = end - begin;

        // Node stats: per-dimension sum and exact constancy check.
        std::vector<double> sum(d_out_, 0.0);
        bool pure = true;
        for (std::size_t d = 0; d < d_out_; ++d) {
            const double first = targets_[order[begin] * d_out_ + d];
            for (std::size_t i = begin; i < end; ++i) {
                const double t = targets_[order[i] * d_out_ + d];
                sum[d] += t;
                pure = pure && t == first;
            }
        }

        BestSplit best;
        const bool can_split = depth < params_.max_depth && !pure &&
                               n_node >= 2 * params_.min_rows_per_leaf;
        if (can_split) best = find_best_split(order, begin, end, sum);

        if (best.feature < 0) {
            auto& node = tree_.nodes[index];
            node.value_offset = static_cast<std::int32_t>(tree_.leaf_values.size());
            for (std::size_t d = 0; d < d_out_; ++d) {
                tree_.leaf_values.push_back(sum[d] / static_cast<double>(n_node));
            }
            return index;
        }

        const auto f = static_cast<std::size_t>(best.feature);
        const std::uint16_t k = best.code;
        const auto mid_it = std::stable_partition(
            order.begin() + static_cast<std::ptrdiff_t>(begin),
            order.begin() + static_cast<std::ptrdiff_t>(end),
            [&](std::uint32_t r) { return b_.code(r, f) <= k; });
        const auto mid = static_cast<std::size_t>(mid_it - order.begin());

        tree_.nodes[index].feature = best.feature;
        tree_.nodes[index].threshold = b_.thresholds[f][k];
        const auto left = build(order, begin, mid, depth + 1);
        tree_.nodes[index].left = left;
        const auto right = build(order, mid, end, depth + 1);
        tree_.nodes[index].right = right;
        return index;
    }

private:
    struct BestSplit {
        double gain = 0.0;
        std::int32_t feature = -1;
        std::uint16_t code = 0;
    };

    BestSplit find_best_split(const std::vector<std::uint32_t>& order, std::size_t begin,
                              std::size_t end, const std::vector<double>& total_sum) {
        std::fill(hist_sums_.begin(), hist_sums_.end(), 0.0);
        std::fill(hist_counts_.begin(), hist_counts_.end(), 0u);
        const std::size_t p = b_.p;

        if (d_out_ == 2) {
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t r = order[i];
                const std::uint16_t* crow = b_.codes.data() + static_cast<std::size_t>(r) * p;
                const double t0 = targets_[r * 2];
                const double t1 = targets_[r * 2 + 1];
                for (std::size_t f = 0; f < p; ++f) {
                    const std::size_t cell = hist_offset_[f] + crow[f];
                    hist_counts_[cell] += 1;
                    hist_sums_[cell * 2] += t0;
                    hist_sums_[cell * 2 + 1] += t1;
                }
            }
        } else {
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t r = order[i];
                const std::uint16_t* crow = b_.codes.data() + static_cast<std::size_t>(r) * p;
                const double* trow = targets_.data() + static_cast<std::size_t>(r) * d_out_;
                for (std::size_t f = 0; f < p; ++f) {
                    const std::size_t cell = hist_offset_[f] + crow[f];
                    hist_counts_[cell] += 1;
                    for (std::size_t d = 0; d < d_out_; ++d) {
                        hist_sums_[cell * d_out_ + d] += trow[d];
                    }
                }
            }
        }

        const auto n_node = static_cast<double>(end - begin);
        const std::size_t min_rows = params_.min_rows_per_leaf;
        BestSplit best;
        std::vector<double> left_sum(d_out_);
        for (std::size_t f = 0; f < p; ++f) {
            const std::size_t codes = b_.n_codes[f];
            if (codes < 2) continue;
            std::size_t left_count = 0;
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            for (std::size_t k = 0; k + 1 < codes; ++k) {
                const std::size_t cell = hist_offset_[f] + k;
                left_count += hist_counts_[cell];
                for (std::size_t d = 0; d < d_out_; ++d) {
                    left_sum[d] += hist_sums_[cell * d_out_ + d];
                }
                const std::size_t right_count = (end - begin) - left_count;
                if (left_count < min_rows || right_count < min_rows) continue;
                double gain = 0.0;
                for (std::size_t d = 0; d < d_out_; ++d) {
                    const double mean_l = left_sum[d] / static_cast<double>(left_count);
                    const double mean_r = (total_sum[d] - left_sum[d]) /
                                          static_cast<double>(right_count);
                    const double diff = mean_l - mean_r;
                    gain += diff * diff;
                }
                gain *= static_cast<double>(left_count) * static_cast<double>(right_count) /
                        n_node;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<std::int32_t>(f);
                    best.code = static_cast<std::uint16_t>(k);
                }
            }
        }
        return best;
    }

    const BinnedMatrix& b_;
    std::span<const double> targets_;
    std::size_t d_out_;
    const TreeParams& params_;
    DecisionTree& tree_;
    std::vector<std::size_t> hist_offset_;
    std::vector<double> hist_sums_;
    std::vector<std::uint32_t> hist_counts_;
};

} // namespace

DecisionTree fit_tree(const BinnedMatrix& binned, std::span<const double> targets,
                      std::size_t d_out, std::span<const std::uint32_t> row_set,
                      const TreeParams& params) {
    params.validate();
    if (d_out < 1) throw ValidationError("d_out must be >= 1");
    if (row_set.empty()) throw ValidationError("fit_tree requires a nonempty row set");
    if (row_set.size() < params.min_rows_per_leaf) {
        throw ValidationError("row set smaller than min_rows_per_leaf");
    }
    if (targets.size() != binned.n * d_out) {
        throw ValidationError("targets size does not match matrix rows times d_out");
    }
    for (const auto r : row_set) {
        if (r >= binned.n) throw ValidationError("row index out of range");
        for (std::size_t d = 0; d < d_out; ++d) {
            if (!std::isfinite(targets[r * d_out + d])) {
                throw NumericError("non-finite tree-fit target at row " + std::to_string(r));
            }
        }
    }

    DecisionTree tree;
    tree.d_out = d_out;
    tree.input_width = binned.p;
    std::vector<std::uint32_t> order(row_set.begin(), row_set.end());
    TreeBuilder builder(binned, targets, d_out, params, tree);
    builder.build(order, 0, order.size(), 0);
    return tree;
}

DecisionTree fit_tree(const EncodedMatrix& X, std::span<const double> targets, std::size_t d_out,
                      std::span<const std::uint32_t> row_set, const TreeParams& params) {
    return fit_tree(BinnedMatrix::build(X, params.max_bins), targets, d_out, row_set, params);
}

const double* DecisionTree::leaf_for(const double* row) const {
    const TreeNode* node = nodes.data();
    while (node->feature >= 0) {
        const bool go_left = row[node->feature] <= node->threshold;
        node = nodes.data() + (go_left ? node->left : node->right);
    }
    return leaf_values.data() + node->value_offset;
}

void DecisionTree::predict_into(std::span<const double> row, double* out) const {
    if (row.size() != input_width) {
        throw ValidationError("prediction row has " + std::to_string(row.size()) +
                              " features, tree expects " + std::to_string(input_width));
    }
    g_tree_evals.fetch_add(1, std::memory_order_relaxed);
    const double* leaf = leaf_for(row.data());
    std::copy(leaf, leaf + d_out, out);
}

std::vector<double> predict_tree(const DecisionTree& tree, std::span<const double> row) {
    std::vector<double> out(tree.d_out);
    tree.predict_into(row, out.data());
    return out;
}

} // namespace ugbdt
