#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ugbdt/data.hpp"

namespace ugbdt {

struct TreeParams {
    std::size_t max_depth = 6;
    std::size_t min_rows_per_leaf = 1;
    std::size_t max_bins = 255;

    void validate() const;
};

// Quantile-binned view of an encoded matrix, built once and reused across
// boosting iterations. Feature f has thresholds[f] (sorted ascending) and
// n_codes[f] = |thresholds[f]|+1 bins; code(v) is the index of the first
// threshold >= v, so splitting at threshold k sends codes <= k left, matching
// the real-valued rule v <= threshold.
struct BinnedMatrix {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<std::vector<double>> thresholds;
    std::vector<std::uint16_t> n_codes;
    std::vector<std::uint16_t> codes; // row-major n×p

    std::uint16_t code(std::size_t row, std::size_t feature) const {
        return codes[row * p + feature];
    }

    // Thresholds are midpoints of adjacent distinct values. Columns with more
    // than max_bins distinct values are first reduced to max_bins evenly
    // spaced order statistics.
    static BinnedMatrix build(const EncodedMatrix& X, std::size_t max_bins);
};

struct TreeNode {
    std::int32_t feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t value_offset = -1; // leaf: index into leaf_values (d_out entries)
};

// Binary regression tree with d_out outputs per leaf. Nodes are stored in
// preorder with the root at index 0.
struct DecisionTree {
    std::vector<TreeNode> nodes;
    std::vector<double> leaf_values;
    std::size_t d_out = 1;
    std::size_t input_width = 0;

    const double* leaf_for(const double* row) const;
    void predict_into(std::span<const double> row, double* out) const;
    std::size_t leaf_count() const { return leaf_values.size() / d_out; }
};

std::vector<double> predict_tree(const DecisionTree& tree, std::span<const double> row);

// Prediction-path instrumentation: total number of single-tree evaluations
// since the last reset. Shared across threads (relaxed counter); meant for
// cost assertions in tests, not for precise profiling.
std::uint64_t tree_evaluations();
void reset_tree_evaluations();
void add_tree_evaluations(std::uint64_t count);

// Greedy level-wise least-squares fit. Gain of a split is the total
// squared-error reduction summed over output dimensions; a node is split only
// if the best gain is strictly positive and both children keep at least
// min_rows_per_leaf rows. Equal gains resolve to the lowest feature index,
// then the lowest threshold. targets is row-major n×d_out.
DecisionTree fit_tree(const BinnedMatrix& binned, std::span<const double> targets,
                      std::size_t d_out, std::span<const std::uint32_t> row_set,
                      const TreeParams& params);

DecisionTree fit_tree(const EncodedMatrix& X, std::span<const double> targets, std::size_t d_out,
                      std::span<const std::uint32_t> row_set, const TreeParams& params);

} // namespace ugbdt
