#include "ugbdt/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ugbdt/text.hpp"

namespace ugbdt {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out.good()) throw DataError("cannot write '" + path + "'");
}

ordered_json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw DataError("cannot read '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return ordered_json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

ordered_json provenance_to_json(const ModelProvenance& p) {
    ordered_json j;
    j["mode"] = p.mode;
    j["seed"] = p.seed;
    j["config_digest"] = p.config_digest;
    return j;
}

ModelProvenance provenance_from_json(const ordered_json& j) {
    ModelProvenance p;
    p.mode = j.at("mode").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.config_digest = j.at("config_digest").get<std::string>();
    return p;
}

ordered_json schema_to_json(const Schema& schema) {
    ordered_json j;
    j["task"] = to_string(schema.task);
    auto cols = ordered_json::array();
    for (const auto& c : schema.columns) {
        cols.push_back(ordered_json::array({c.name, to_string(c.kind)}));
    }
    j["columns"] = std::move(cols);
    return j;
}

Schema schema_from_json(const ordered_json& j) {
    Schema schema;
    schema.task = task_from_string(j.at("task").get<std::string>());
    for (const auto& c : j.at("columns")) {
        schema.columns.push_back(
            {c.at(0).get<std::string>(), column_kind_from_string(c.at(1).get<std::string>())});
    }
    return schema;
}

ordered_json encoder_to_json(const Encoder& encoder) {
    ordered_json j;
    j["schema"] = schema_to_json(encoder.schema);
    auto cats = ordered_json::array();
    for (const auto& col : encoder.categorical) {
        ordered_json c;
        c["source_column"] = col.source_column;
        c["mode"] = col.mode == EncodeMode::one_hot ? "one_hot" : "target_mean";
        c["vocabulary"] = col.vocabulary;
        auto stats = ordered_json::array();
        for (const auto& [category, stat] : col.stats) {
            stats.push_back(ordered_json::array({category, stat.sum, stat.count}));
        }
        c["stats"] = std::move(stats);
        c["prior"] = col.prior;
        c["smoothing"] = col.smoothing;
        cats.push_back(std::move(c));
    }
    j["categorical"] = std::move(cats);
    return j;
}

Encoder encoder_from_json(const ordered_json& j) {
    Encoder encoder;
    encoder.schema = schema_from_json(j.at("schema"));
    for (const auto& c : j.at("categorical")) {
        ColumnEncoder col;
        col.source_column = c.at("source_column").get<std::size_t>();
        const auto mode = c.at("mode").get<std::string>();
        if (mode == "one_hot") {
            col.mode = EncodeMode::one_hot;
        } else if (mode == "target_mean") {
            col.mode = EncodeMode::target_mean;
        } else {
            throw ValidationError("unknown encode mode '" + mode + "'");
        }
        col.vocabulary = c.at("vocabulary").get<std::vector<std::string>>();
        for (const auto& s : c.at("stats")) {
            col.stats[s.at(0).get<std::string>()] = {s.at(1).get<double>(),
                                                     s.at(2).get<std::size_t>()};
        }
        col.prior = c.at("prior").get<double>();
        col.smoothing = c.at("smoothing").get<double>();
        encoder.categorical.push_back(std::move(col));
    }
    return encoder;
}

ordered_json stats_to_json(const ColumnStats& stats) {
    auto j = ordered_json::array();
    for (const auto& col : stats.columns) {
        ordered_json c;
        c["mean"] = col.mean;
        c["variance"] = col.variance;
        c["categories"] = col.categories;
        j.push_back(std::move(c));
    }
    return j;
}

ColumnStats stats_from_json(const ordered_json& j) {
    ColumnStats stats;
    for (const auto& c : j) {
        ColumnStats::Entry entry;
        entry.mean = c.at("mean").get<double>();
        entry.variance = c.at("variance").get<double>();
        entry.categories = c.at("categories").get<std::vector<std::string>>();
        stats.columns.push_back(std::move(entry));
    }
    return stats;
}

ordered_json tree_to_json(const DecisionTree& tree) {
    ordered_json j;
    auto nodes = ordered_json::array();
    for (const auto& node : tree.nodes) {
        nodes.push_back(ordered_json::array(
            {node.feature, node.threshold, node.left, node.right, node.value_offset}));
    }
    j["nodes"] = std::move(nodes);
    j["values"] = tree.leaf_values;
    return j;
}

DecisionTree tree_from_json(const ordered_json& j, std::size_t d_out, std::size_t input_width) {
    DecisionTree tree;
    tree.d_out = d_out;
    tree.input_width = input_width;
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at(0).get<std::int32_t>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<std::int32_t>();
        node.right = n.at(3).get<std::int32_t>();
        node.value_offset = n.at(4).get<std::int32_t>();
        tree.nodes.push_back(node);
    }
    tree.leaf_values = j.at("values").get<std::vector<double>>();
    if (tree.nodes.empty()) throw ValidationError("tree has no nodes");
    if (tree.leaf_values.size() % d_out != 0) {
        throw ValidationError("leaf values do not match the loss dimension");
    }
    return tree;
}

} // namespace

std::string config_digest(const TrainConfig& config, LossSpec loss) {
    std::string text;
    text += "mode=";
    text += to_string(config.mode);
    text += ";iterations=" + std::to_string(config.iterations);
    text += ";epsilon=" + format_double(config.epsilon);
    text += ";sample_rate=" + format_double(config.sample_rate);
    text += ";beta=" + format_double(config.beta);
    text += ";gamma=" + format_double(config.gamma);
    text += ";seed=" + std::to_string(config.seed);
    text += ";depth=" + std::to_string(config.tree.max_depth);
    text += ";min_rows=" + std::to_string(config.tree.min_rows_per_leaf);
    text += ";max_bins=" + std::to_string(config.tree.max_bins);
    text += ";log_sigma=" + format_double(config.log_sigma.lo) + "," +
            format_double(config.log_sigma.hi);
    text += ";loss=";
    text += to_string(loss.kind);
    return fnv1a_hex(text);
}

void save_model(const ModelFile& file, const std::string& path) {
    ordered_json j;
    j["format_version"] = file.format_version;
    j["loss"] = to_string(file.model.loss.kind);
    j["iterations"] = file.model.trees.size();
    j["learning_rate"] = file.model.epsilon;
    j["gamma"] = file.model.gamma;
    j["f0"] = file.model.f0;
    j["log_sigma_bounds"] = ordered_json::array({file.model.log_sigma.lo, file.model.log_sigma.hi});
    auto trees = ordered_json::array();
    for (const auto& tree : file.model.trees) trees.push_back(tree_to_json(tree));
    j["trees"] = std::move(trees);
    j["encoder"] = encoder_to_json(file.encoder);
    j["training_stats"] = stats_to_json(file.training_stats);
    j["provenance"] = provenance_to_json(file.provenance);
    write_text(path, j.dump(2) + "\n");
}

ModelFile load_model(const std::string& path) {
    const ordered_json j = parse_file(path);
    try {
        ModelFile file;
        file.format_version = j.at("format_version").get<int>();
        if (file.format_version != kModelFormatVersion) {
            throw DataError(path + ": unsupported model format_version " +
                            std::to_string(file.format_version));
        }
        file.model.loss.kind = loss_kind_from_string(j.at("loss").get<std::string>());
        file.model.epsilon = j.at("learning_rate").get<double>();
        file.model.gamma = j.at("gamma").get<double>();
        file.model.f0 = j.at("f0").get<std::vector<double>>();
        const auto& bounds = j.at("log_sigma_bounds");
        file.model.log_sigma = {bounds.at(0).get<double>(), bounds.at(1).get<double>()};
        file.encoder = encoder_from_json(j.at("encoder"));
        file.training_stats = stats_from_json(j.at("training_stats"));
        file.provenance = provenance_from_json(j.at("provenance"));
        file.model.mode = train_mode_from_string(file.provenance.mode);
        file.model.input_width = file.encoder.encoded_width();

        const auto d_out = file.model.loss.d_out();
        if (file.model.f0.size() != d_out) {
            throw ValidationError("f0 does not match the loss dimension");
        }
        for (const auto& t : j.at("trees")) {
            file.model.trees.push_back(tree_from_json(t, d_out, file.model.input_width));
        }
        if (j.at("iterations").get<std::size_t>() != file.model.trees.size()) {
            throw ValidationError("iteration count does not match the tree list");
        }
        file.model.rebuild_weights();
        return file;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void save_manifest(const ManifestFile& manifest, const std::string& path) {
    ordered_json j;
    j["format_version"] = manifest.format_version;
    j["kind"] = to_string(manifest.kind);
    j["members"] = manifest.members;
    if (manifest.kind == EnsembleKind::virtual_sglb) {
        j["virtual_stride"] = manifest.virtual_stride;
    }
    j["provenance"] = provenance_to_json(manifest.provenance);
    write_text(path, j.dump(2) + "\n");
}

ManifestFile load_manifest(const std::string& path) {
    const ordered_json j = parse_file(path);
    try {
        ManifestFile manifest;
        manifest.format_version = j.at("format_version").get<int>();
        if (manifest.format_version != kModelFormatVersion) {
            throw DataError(path + ": unsupported manifest format_version " +
                            std::to_string(manifest.format_version));
        }
        manifest.kind = ensemble_kind_from_string(j.at("kind").get<std::string>());
        manifest.members = j.at("members").get<std::vector<std::string>>();
        manifest.virtual_stride = j.value("virtual_stride", std::size_t{0});
        manifest.provenance = provenance_from_json(j.at("provenance"));
        if (manifest.members.empty()) throw ValidationError("manifest lists no members");
        if (manifest.kind == EnsembleKind::virtual_sglb) {
            if (manifest.members.size() != 1) {
                throw ValidationError("a virtual ensemble persists exactly one member");
            }
            if (manifest.virtual_stride == 0) {
                throw ValidationError("a virtual ensemble needs a nonzero stride");
            }
        }
        return manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw DataError(path + ": " + e.what());
    }
}

LoadedModel load_for_inference(const std::string& path) {
    const ordered_json probe = parse_file(path);
    if (!probe.contains("members")) {
        ModelFile file = load_model(path);
        LoadedModel loaded;
        loaded.is_ensemble = false;
        loaded.ensemble.kind = file.model.mode == TrainMode::sgb
                                   ? EnsembleKind::independent_sgb
                                   : EnsembleKind::independent_sglb;
        loaded.ensemble.loss = file.model.loss;
        loaded.encoder = std::move(file.encoder);
        loaded.training_stats = std::move(file.training_stats);
        loaded.provenance = std::move(file.provenance);
        loaded.ensemble.models.push_back(std::move(file.model));
        return loaded;
    }

    const ManifestFile manifest = load_manifest(path);
    const auto base = std::filesystem::path(path).parent_path();

    LoadedModel loaded;
    loaded.is_ensemble = true;
    loaded.provenance = manifest.provenance;

    std::vector<ModelFile> members;
    members.reserve(manifest.members.size());
    for (const auto& member : manifest.members) {
        members.push_back(load_model((base / member).string()));
    }
    for (std::size_t m = 1; m < members.size(); ++m) {
        if (members[m].model.loss.kind != members[0].model.loss.kind) {
            throw DataError(path + ": members disagree on the loss kind");
        }
        if (members[m].encoder.schema != members[0].encoder.schema ||
            members[m].encoder.encoded_width() != members[0].encoder.encoded_width()) {
            throw DataError(path + ": members disagree on the encoder");
        }
    }
    loaded.encoder = members[0].encoder;
    loaded.training_stats = members[0].training_stats;

    if (manifest.kind == EnsembleKind::virtual_sglb) {
        loaded.ensemble = virtual_members(std::move(members[0].model), manifest.virtual_stride);
        return loaded;
    }
    loaded.ensemble.kind = manifest.kind;
    loaded.ensemble.loss = members[0].model.loss;
    for (auto& member : members) loaded.ensemble.models.push_back(std::move(member.model));
    return loaded;
}

} // namespace ugbdt
