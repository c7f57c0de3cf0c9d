#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ugbdt/boosting.hpp"

namespace ugbdt {

enum class EnsembleKind { independent_sgb, independent_sglb, virtual_sglb };

const char* to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& s);

// Checkpoint layout of a virtual ensemble carved from one model of T trees:
// member t for each t in {K·j : floor(T/2K) < j <= floor(T/K)}. Every
// checkpoint lies in (T/2, T]; early iterations are excluded.
struct VirtualSpec {
    std::size_t stride = 50;       // K
    std::size_t iterations = 1000; // T
    std::vector<std::size_t> checkpoints;

    std::size_t members() const { return checkpoints.size(); }

    static VirtualSpec make(std::size_t stride, std::size_t iterations);
};

// Either M independently trained models or one model plus virtual checkpoints.
// Members are exposed uniformly through member_predictions.
struct Ensemble {
    EnsembleKind kind = EnsembleKind::independent_sgb;
    LossSpec loss;
    std::vector<GBMModel> models; // M models, or exactly 1 when virtual
    VirtualSpec virtual_spec;     // meaningful only when kind == virtual_sglb

    std::size_t size() const {
        return kind == EnsembleKind::virtual_sglb ? virtual_spec.members() : models.size();
    }

    // Raw scores per member, row-major M×d_out. A virtual ensemble fills all
    // members in one traversal of the model's trees (each tree evaluated at
    // most once per call).
    std::vector<double> member_raw(std::span<const double> row) const;

    std::vector<Distribution> member_predictions(std::span<const double> row) const;

    // Predictive posterior for classification: the mean member probability.
    double predictive_posterior_class(std::span<const double> row) const;
};

// Trains M models that differ only in seed (seed+0 .. seed+M-1). `threads`
// sets the worker count for member-level parallelism; 0 reads UGBDT_THREADS,
// falling back to the machine parallelism. The result is bit-identical for
// any thread count.
Ensemble train_ensemble(const EncodedMatrix& X, std::span<const double> y,
                        const TrainConfig& config, LossSpec loss, std::size_t members,
                        std::size_t threads = 0);

// Wraps a trained model as a virtual ensemble with stride K.
Ensemble virtual_members(GBMModel model, std::size_t stride);

std::size_t resolve_threads(std::size_t requested);

} // namespace ugbdt
