#include "ugbdt/uncertainty.hpp"

#include <cmath>

#include "ugbdt/errors.hpp"

namespace ugbdt {

double binary_entropy(double p) {
    constexpr double floor = 1e-12;
    const double q = p < floor ? floor : (p > 1.0 - floor ? 1.0 - floor : p);
    return -(q * std::log(q) + (1.0 - q) * std::log(1.0 - q));
}

UncertaintyReport entropy_decomposition(std::span<const double> member_probs) {
    if (member_probs.empty()) {
        throw ValidationError("entropy decomposition needs at least one member");
    }
    const auto m = static_cast<double>(member_probs.size());
    double mean_p = 0.0;
    double mean_entropy = 0.0;
    for (const double p : member_probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("member probability outside [0, 1]");
        }
        mean_p += p;
        mean_entropy += binary_entropy(p);
    }
    mean_p /= m;
    mean_entropy /= m;

    UncertaintyReport report;
    report.kind = UncertaintyKind::entropy_nats;
    report.expected_data = mean_entropy;
    report.knowledge = binary_entropy(mean_p) - mean_entropy;
    // Reassembling keeps total == expected_data + knowledge exact; it differs
    // from H(mean p) by at most one rounding step.
    report.total = report.expected_data + report.knowledge;
    return report;
}

UncertaintyReport variance_decomposition(std::span<const double> mus,
                                         std::span<const double> sigmas) {
    if (mus.empty() || mus.size() != sigmas.size()) {
        throw ValidationError("variance decomposition needs matching nonempty parameter lists");
    }
    const auto m = static_cast<double>(mus.size());
    double mean_mu = 0.0;
    for (const double mu : mus) mean_mu += mu;
    mean_mu /= m;

    double knowledge = 0.0;
    double expected_data = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (!(sigmas[i] > 0.0)) throw ValidationError("member sigma must be positive");
        const double d = mean_mu - mus[i];
        knowledge += d * d;
        expected_data += sigmas[i] * sigmas[i];
    }
    knowledge /= m;
    expected_data /= m;

    UncertaintyReport report;
    report.kind = UncertaintyKind::variance;
    report.knowledge = knowledge;
    report.expected_data = expected_data;
    report.total = report.expected_data + report.knowledge;
    return report;
}

UncertaintyReport variance_decomposition(std::span<const Distribution> members) {
    std::vector<double> mus(members.size());
    std::vector<double> sigmas(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        mus[i] = members[i].mu;
        sigmas[i] = members[i].sigma;
    }
    return variance_decomposition(mus, sigmas);
}

double single_model_measures(const Distribution& dist) {
    if (dist.kind == LossKind::logistic) return binary_entropy(dist.p);
    return dist.sigma * dist.sigma;
}

UncertaintyTable score_dataset(const Ensemble& ensemble, const EncodedMatrix& X) {
    UncertaintyTable table;
    table.kind = ensemble.loss.kind == LossKind::logistic ? UncertaintyKind::entropy_nats
                                                          : UncertaintyKind::variance;
    table.total.reserve(X.n);
    table.expected_data.reserve(X.n);
    table.knowledge.reserve(X.n);

    std::vector<double> probs;
    for (std::size_t r = 0; r < X.n; ++r) {
        const std::span<const double> row(X.row(r), X.p);
        const auto members = ensemble.member_predictions(row);
        UncertaintyReport report;
        if (table.kind == UncertaintyKind::entropy_nats) {
            probs.clear();
            for (const auto& dist : members) probs.push_back(dist.p);
            report = entropy_decomposition(probs);
        } else {
            report = variance_decomposition(members);
        }
        table.total.push_back(report.total);
        table.expected_data.push_back(report.expected_data);
        table.knowledge.push_back(report.knowledge);
    }
    return table;
}

} // namespace ugbdt
