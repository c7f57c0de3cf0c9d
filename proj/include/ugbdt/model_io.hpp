#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ugbdt/data.hpp"
#include "ugbdt/ensemble.hpp"

namespace ugbdt {

inline constexpr int kModelFormatVersion = 1;

struct ModelProvenance {
    std::string mode; // "sgb" | "sglb"
    std::uint64_t seed = 0;
    std::string config_digest; // config_digest() of the training configuration
};

// Self-contained trained model: the booster, the feature encoder it was
// fitted with, and the training-split column stats used to normalize OOD
// pools later. Serialized as JSON with shortest-round-trip numbers, so
// save -> load -> save is byte-identical and predictions survive to 0 ULP.
struct ModelFile {
    int format_version = kModelFormatVersion;
    GBMModel model;
    Encoder encoder;
    ColumnStats training_stats;
    ModelProvenance provenance;
};

// FNV-1a over a canonical rendering of the full training configuration,
// as a 16-digit hex string.
std::string config_digest(const TrainConfig& config, LossSpec loss);

void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

// Ensemble as a list of member model files. Virtual ensembles persist as a
// single member plus the checkpoint stride K.
struct ManifestFile {
    int format_version = kModelFormatVersion;
    EnsembleKind kind = EnsembleKind::independent_sglb;
    std::vector<std::string> members; // paths relative to the manifest file
    std::size_t virtual_stride = 0;   // K; nonzero only for virtual kinds
    ModelProvenance provenance;
};

void save_manifest(const ManifestFile& manifest, const std::string& path);
ManifestFile load_manifest(const std::string& path);

// A model or manifest loaded for scoring. Bare model files yield a
// one-member ensemble with is_ensemble = false, so callers can keep
// single-model and ensemble reporting apart.
struct LoadedModel {
    bool is_ensemble = false;
    Ensemble ensemble;
    Encoder encoder;
    ColumnStats training_stats;
    ModelProvenance provenance;
};

// Accepts either a model file or a manifest (detected by its "members" key).
LoadedModel load_for_inference(const std::string& path);

} // namespace ugbdt
