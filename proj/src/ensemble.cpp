#include "ugbdt/ensemble.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "ugbdt/errors.hpp"

namespace ugbdt {

const char* to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::independent_sgb: return "independent_sgb";
        case EnsembleKind::independent_sglb: return "independent_sglb";
        case EnsembleKind::virtual_sglb: return "virtual_sglb";
    }
    return "independent_sgb";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "independent_sgb") return EnsembleKind::independent_sgb;
    if (s == "independent_sglb") return EnsembleKind::independent_sglb;
    if (s == "virtual_sglb") return EnsembleKind::virtual_sglb;
    throw ValidationError("unknown ensemble kind '" + s + "'");
}

VirtualSpec VirtualSpec::make(std::size_t stride, std::size_t iterations) {
    if (stride < 1) throw ValidationError("virtual-ensemble stride must be >= 1");
    if (stride > iterations) {
        throw ValidationError("virtual-ensemble stride exceeds the trained iterations");
    }
    VirtualSpec spec;
    spec.stride = stride;
    spec.iterations = iterations;
    const std::size_t lo = iterations / (2 * stride); // members at strictly later checkpoints
    const std::size_t hi = iterations / stride;
    for (std::size_t j = lo + 1; j <= hi; ++j) spec.checkpoints.push_back(stride * j);
    if (spec.checkpoints.empty()) {
        throw ValidationError("virtual-ensemble checkpoint set is empty");
    }
    return spec;
}

std::vector<double> Ensemble::member_raw(std::span<const double> row) const {
    const std::size_t d = loss.d_out();
    if (kind == EnsembleKind::virtual_sglb) {
        return models[0].predict_raw_at(row, virtual_spec.checkpoints);
    }
    std::vector<double> raw(models.size() * d);
    for (std::size_t m = 0; m < models.size(); ++m) {
        models[m].predict_raw_into(row, raw.data() + m * d);
    }
    return raw;
}

std::vector<Distribution> Ensemble::member_predictions(std::span<const double> row) const {
    const auto raw = member_raw(row);
    const std::size_t d = loss.d_out();
    const std::size_t count = size();
    std::vector<Distribution> out;
    out.reserve(count);
    const GBMModel& reference = models[0];
    for (std::size_t m = 0; m < count; ++m) {
        out.push_back(reference.distribution_from_raw(raw.data() + m * d));
    }
    return out;
}

double Ensemble::predictive_posterior_class(std::span<const double> row) const {
    if (loss.kind != LossKind::logistic) {
        throw ValidationError("predictive posterior over classes needs a classification ensemble");
    }
    const auto members = member_predictions(row);
    double total = 0.0;
    for (const auto& dist : members) total += dist.p;
    return total / static_cast<double>(members.size());
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("UGBDT_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

Ensemble train_ensemble(const EncodedMatrix& X, std::span<const double> y,
                        const TrainConfig& config, LossSpec loss, std::size_t members,
                        std::size_t threads) {
    if (members < 1) throw ValidationError("ensemble needs at least one member");

    Ensemble ensemble;
    ensemble.kind = config.mode == TrainMode::sglb ? EnsembleKind::independent_sglb
                                                   : EnsembleKind::independent_sgb;
    ensemble.loss = loss;
    ensemble.models.resize(members);

    const std::size_t workers = std::min(resolve_threads(threads), members);
    if (workers <= 1) {
        for (std::size_t m = 0; m < members; ++m) {
            TrainConfig member_config = config;
            member_config.seed = config.seed + m;
            ensemble.models[m] = train(X, y, member_config, loss);
        }
        return ensemble;
    }

    // Members are independent; each worker fills disjoint slots, so the
    // result does not depend on the worker count.
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const std::size_t m = next.fetch_add(1);
            if (m >= members) return;
            try {
                TrainConfig member_config = config;
                member_config.seed = config.seed + m;
                ensemble.models[m] = train(X, y, member_config, loss);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return ensemble;
}

Ensemble virtual_members(GBMModel model, std::size_t stride) {
    Ensemble ensemble;
    ensemble.kind = EnsembleKind::virtual_sglb;
    ensemble.loss = model.loss;
    ensemble.virtual_spec = VirtualSpec::make(stride, model.iterations());
    ensemble.models.push_back(std::move(model));
    return ensemble;
}

} // namespace ugbdt
