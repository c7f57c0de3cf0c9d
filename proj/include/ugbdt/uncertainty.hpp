#pragma once

#include <span>
#include <vector>

#include "ugbdt/boosting.hpp"
#include "ugbdt/ensemble.hpp"

namespace ugbdt {

enum class UncertaintyKind { entropy_nats, variance };

// total == expected_data + knowledge holds bit-exactly: the reported total is
// assembled from the two parts.
struct UncertaintyReport {
    UncertaintyKind kind = UncertaintyKind::entropy_nats;
    double total = 0.0;
    double expected_data = 0.0;
    double knowledge = 0.0;
};

// Binary entropy in nats with p clamped to [1e-12, 1-1e-12].
double binary_entropy(double p);

// Classification decomposition over member positive-class probabilities:
// total ~ H(mean p), expected_data = mean H(p_m), knowledge = difference
// (mutual information between members and the label).
UncertaintyReport entropy_decomposition(std::span<const double> member_probs);

// Regression decomposition by the law of total variation, population form:
// knowledge = (1/M)Σ(mean μ − μ_m)², expected_data = (1/M)Σ σ_m².
UncertaintyReport variance_decomposition(std::span<const double> mus,
                                         std::span<const double> sigmas);
UncertaintyReport variance_decomposition(std::span<const Distribution> members);

// A single model only has a total: H(p) for classification, σ² for
// regression. The data/knowledge split needs an ensemble.
double single_model_measures(const Distribution& dist);

struct UncertaintyTable {
    UncertaintyKind kind = UncertaintyKind::entropy_nats;
    std::vector<double> total;
    std::vector<double> expected_data;
    std::vector<double> knowledge;

    std::size_t size() const { return total.size(); }
};

// Row-wise decomposition of every row of X under the ensemble's task.
UncertaintyTable score_dataset(const Ensemble& ensemble, const EncodedMatrix& X);

} // namespace ugbdt
