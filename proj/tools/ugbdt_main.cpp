#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ugbdt/metrics.hpp"
#include "ugbdt/model_io.hpp"
#include "ugbdt/synthetic.hpp"
#include "ugbdt/text.hpp"
#include "ugbdt/uncertainty.hpp"

namespace {

using namespace ugbdt;

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out.good()) throw DataError("cannot write '" + path + "'");
}

void note_file(const std::string& path, std::size_t rows) {
    std::cout << "wrote " << path << " (" << rows << " rows)\n";
}

// Reorders the dataset's columns to the encoder's schema by name, dropping
// columns the model never saw (such as evaluation-only mask columns).
Dataset project_for_encoder(const Dataset& dataset, const Schema& schema) {
    if (dataset.schema == schema) return dataset;
    if (dataset.schema.task != schema.task) {
        throw ValidationError("dataset task does not match the model's task");
    }
    Dataset out;
    out.schema = schema;
    out.numeric.resize(schema.columns.size());
    out.strings.resize(schema.columns.size());
    out.n = dataset.n;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        const auto& want = schema.columns[c];
        bool found = false;
        for (std::size_t s = 0; s < dataset.schema.columns.size(); ++s) {
            if (dataset.schema.columns[s].name != want.name) continue;
            if (dataset.schema.columns[s].kind != want.kind) {
                throw ValidationError("column '" + want.name + "' is " +
                                      to_string(dataset.schema.columns[s].kind) +
                                      " but the model expects " + to_string(want.kind));
            }
            out.numeric[c] = dataset.numeric[s];
            out.strings[c] = dataset.strings[s];
            found = true;
            break;
        }
        if (!found) {
            throw ValidationError("column '" + want.name +
                                  "' required by the model is missing from the data");
        }
    }
    return out;
}

Dataset load_dataset(const std::string& csv_path, const std::string& schema_path) {
    const Schema schema = Schema::load(schema_path);
    return load_csv(csv_path, schema);
}

// ---------------------------------------------------------------------------
// synth

struct SynthHeartArgs {
    std::uint64_t seed = 1;
    std::size_t per_cell = 1000;
    std::string out = ".";
};

void run_synth_heart(const SynthHeartArgs& args) {
    HeartSpec spec;
    spec.per_cell = args.per_cell;
    const HeartData data = generate_heart(spec, args.seed);

    ensure_dir(args.out);
    const fs::path out(args.out);
    save_csv(data.train, (out / "heart_train.csv").string());
    data.train.schema.save((out / "heart_train.schema").string());
    save_csv(data.grid_eval, (out / "heart_grid.csv").string());
    data.grid_eval.schema.save((out / "heart_grid.schema").string());

    std::string mask;
    for (const auto& row : spec.heart_mask) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            mask += row[j] ? '1' : '0';
            mask += j + 1 < row.size() ? "," : "\n";
        }
    }
    write_text_file((out / "heart_mask.csv").string(), mask);

    note_file((out / "heart_train.csv").string(), data.train.n);
    note_file((out / "heart_grid.csv").string(), data.grid_eval.n);
    std::cout << "wrote " << (out / "heart_mask.csv").string() << "\n";
}

struct SynthSpiralArgs {
    std::uint64_t seed = 1;
    std::size_t n_per_class = 2000;
    double noise_sd = 0.02;
    double turns = 1.75;
    bool no_derived = false;
    std::size_t positive_class = 0;
    std::string out = ".";
};

void run_synth_spiral(const SynthSpiralArgs& args) {
    if (args.positive_class >= SpiralSpec::classes) {
        throw ValidationError("--positive-class must be 0, 1, or 2");
    }
    SpiralSpec spec;
    spec.n_per_class = args.n_per_class;
    spec.noise_sd = args.noise_sd;
    spec.rotation_turns = args.turns;
    spec.derived_features = !args.no_derived;
    Dataset data = generate_spiral(spec, args.seed);

    // One-vs-rest binarization for the binary logistic loss; the raw arm
    // index rides along for plotting.
    const std::size_t target = data.schema.target_index();
    std::vector<std::string> arms;
    arms.reserve(data.n);
    for (auto& label : data.numeric[target]) {
        arms.push_back(format_double(label));
        label = label == static_cast<double>(args.positive_class) ? 1.0 : 0.0;
    }
    data.schema.columns.push_back({"arm", ColumnKind::ignored});
    data.numeric.emplace_back();
    data.strings.push_back(std::move(arms));

    ensure_dir(args.out);
    const fs::path out(args.out);
    save_csv(data, (out / "spiral.csv").string());
    data.schema.save((out / "spiral.schema").string());
    note_file((out / "spiral.csv").string(), data.n);
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string data;
    std::string schema;
    std::string out = ".";
    std::string mode = "sglb";
    std::size_t trees = 1000;
    double learning_rate = 0.1;
    std::size_t depth = 6;
    double sample_rate = -1.0; // sentinel: sgb 0.5, sglb 1.0
    double beta = 0.0;         // sentinel: n
    double gamma = -1.0;       // sentinel: sglb 1/(2n), sgb 0
    std::size_t members = 10;
    std::uint64_t seed = 1;
    bool grid = false;
};

double mean_single_nll(const GBMModel& model, const EncodedMatrix& X,
                       std::span<const double> y) {
    double total = 0.0;
    for (std::size_t r = 0; r < X.n; ++r) {
        const auto dist = model.predict_distribution(std::span<const double>(X.row(r), X.p));
        total += nll(dist, y[r]);
    }
    return total / static_cast<double>(X.n);
}

void run_train(const TrainArgs& args) {
    if (args.members < 1) throw ValidationError("--members must be at least 1");
    const Dataset data = load_dataset(args.data, args.schema);
    const DatasetSplit split = split_dataset(data, SplitFractions{}, args.seed);

    const Encoder encoder = fit_encoder(split.train);
    const EncodedMatrix X_train = encode(split.train, encoder);
    const EncodedMatrix X_valid = encode(split.valid, encoder);
    const LossSpec loss = LossSpec::for_task(data.schema.task);

    TrainConfig base;
    base.mode = train_mode_from_string(args.mode);
    base.iterations = args.trees;
    base.epsilon = args.learning_rate;
    base.sample_rate =
        args.sample_rate >= 0.0 ? args.sample_rate : (base.mode == TrainMode::sgb ? 0.5 : 1.0);
    base.beta = args.beta;
    base.gamma = args.gamma;
    base.seed = args.seed;
    base.tree.max_depth = args.depth;

    if (args.grid) {
        const double learning_rates[] = {0.001, 0.01, 0.1};
        const std::size_t depths[] = {3, 4, 5, 6};
        double best_nll = std::numeric_limits<double>::infinity();
        double best_rate = base.epsilon;
        std::size_t best_depth = base.tree.max_depth;
        for (const double rate : learning_rates) {
            for (const std::size_t depth : depths) {
                TrainConfig candidate = base;
                candidate.epsilon = rate;
                candidate.tree.max_depth = depth;
                const GBMModel model =
                    train(X_train, split.train.targets(), candidate, loss);
                const double valid_nll = mean_single_nll(model, X_valid, split.valid.targets());
                std::cout << "grid learning_rate=" << format_double(rate) << " depth=" << depth
                          << " valid_nll=" << format_double(valid_nll) << "\n";
                if (valid_nll < best_nll) {
                    best_nll = valid_nll;
                    best_rate = rate;
                    best_depth = depth;
                }
            }
        }
        base.epsilon = best_rate;
        base.tree.max_depth = best_depth;
        std::cout << "selected learning_rate=" << format_double(best_rate)
                  << " depth=" << best_depth << "\n";
    }

    const TrainConfig resolved = base.resolved(X_train.n);
    const ColumnStats stats = ColumnStats::compute(split.train);
    ensure_dir(args.out);
    const fs::path out(args.out);

    std::cout << "training mode=" << args.mode << " trees=" << resolved.iterations
              << " learning_rate=" << format_double(resolved.epsilon)
              << " depth=" << resolved.tree.max_depth
              << " sample_rate=" << format_double(resolved.sample_rate)
              << " beta=" << format_double(resolved.beta)
              << " gamma=" << format_double(resolved.gamma) << " members=" << args.members
              << " seed=" << args.seed << " rows=" << X_train.n << "\n";

    if (args.members == 1) {
        ModelFile file;
        file.model = train(X_train, split.train.targets(), resolved, loss);
        file.encoder = encoder;
        file.training_stats = stats;
        file.provenance = {args.mode, resolved.seed, config_digest(resolved, loss)};
        const auto path = (out / "model.json").string();
        save_model(file, path);
        std::cout << "valid_nll=" << format_double(mean_single_nll(file.model, X_valid,
                                                                   split.valid.targets()))
                  << "\n";
        std::cout << "wrote " << path << "\n";
        return;
    }

    const Ensemble ensemble =
        train_ensemble(X_train, split.train.targets(), resolved, loss, args.members);

    ManifestFile manifest;
    manifest.kind =
        base.mode == TrainMode::sgb ? EnsembleKind::independent_sgb : EnsembleKind::independent_sglb;
    manifest.provenance = {args.mode, resolved.seed, config_digest(resolved, loss)};
    for (std::size_t m = 0; m < ensemble.models.size(); ++m) {
        TrainConfig member_config = resolved;
        member_config.seed = resolved.seed + m;
        const std::string name = "member_" + std::to_string(m) + ".json";
        ModelFile file;
        file.model = ensemble.models[m];
        file.encoder = encoder;
        file.training_stats = stats;
        file.provenance = {args.mode, member_config.seed, config_digest(member_config, loss)};
        save_model(file, (out / name).string());
        manifest.members.push_back(name);
    }
    const auto manifest_path = (out / "manifest.json").string();
    save_manifest(manifest, manifest_path);

    const EvalReport report = evaluate_split(ensemble, X_valid, split.valid.targets());
    std::cout << "valid_nll=" << format_double(report.nll) << "\n";
    std::cout << "wrote " << manifest_path << " (" << args.members << " members)\n";
}

// ---------------------------------------------------------------------------
// uncertainty

struct UncertaintyArgs {
    std::string model;
    std::string data;
    std::string schema;
    std::string out = ".";
    std::size_t virtual_stride = 0;
};

void run_uncertainty(const UncertaintyArgs& args) {
    LoadedModel loaded = load_for_inference(args.model);
    if (args.virtual_stride > 0) {
        if (loaded.is_ensemble) {
            throw ValidationError("--virtual requires a single model file, not a manifest");
        }
        GBMModel model = std::move(loaded.ensemble.models[0]);
        loaded.ensemble = virtual_members(std::move(model), args.virtual_stride);
        loaded.is_ensemble = true;
        std::cout << "virtual ensemble: " << loaded.ensemble.size() << " members (stride "
                  << args.virtual_stride << ")\n";
    }

    const Dataset data =
        project_for_encoder(load_dataset(args.data, args.schema), loaded.encoder.schema);
    const EncodedMatrix X = encode(data, loaded.encoder);

    ensure_dir(args.out);
    const auto path = (fs::path(args.out) / "uncertainty.csv").string();
    std::string csv;
    if (loaded.is_ensemble) {
        const std::uint64_t before = tree_evaluations();
        const UncertaintyTable table = score_dataset(loaded.ensemble, X);
        if (loaded.ensemble.kind == EnsembleKind::virtual_sglb) {
            // One pass over the trees serves every checkpoint.
            const std::uint64_t cost = tree_evaluations() - before;
            const std::uint64_t expected =
                static_cast<std::uint64_t>(X.n) * loaded.ensemble.models[0].trees.size();
            if (cost != expected) {
                throw NumericError("virtual ensemble re-evaluated trees: " +
                                   std::to_string(cost) + " evaluations for " +
                                   std::to_string(expected) + " tree-rows");
            }
        }
        csv = "row,total,data,knowledge\n";
        for (std::size_t r = 0; r < table.size(); ++r) {
            csv += std::to_string(r) + "," + format_double(table.total[r]) + "," +
                   format_double(table.expected_data[r]) + "," +
                   format_double(table.knowledge[r]) + "\n";
        }
    } else {
        const GBMModel& model = loaded.ensemble.models[0];
        csv = "row,total,data\n";
        for (std::size_t r = 0; r < X.n; ++r) {
            const auto dist = model.predict_distribution(std::span<const double>(X.row(r), X.p));
            const double measure = single_model_measures(dist);
            csv += std::to_string(r) + "," + format_double(measure) + "," +
                   format_double(measure) + "\n";
        }
    }
    write_text_file(path, csv);
    note_file(path, X.n);
}

// ---------------------------------------------------------------------------
// ood-eval

struct OodEvalArgs {
    std::string model;
    std::string data;
    std::string schema;
    std::string pool;
    std::string pool_schema;
    std::string mask_col;
    std::uint64_t seed = 1;
    std::string out = ".";
};

struct ScoredRows {
    std::vector<double> total;
    std::vector<double> knowledge; // empty for single models
};

ScoredRows score_rows(const LoadedModel& loaded, const EncodedMatrix& X) {
    ScoredRows scores;
    if (loaded.is_ensemble) {
        const UncertaintyTable table = score_dataset(loaded.ensemble, X);
        scores.total = table.total;
        scores.knowledge = table.knowledge;
        return scores;
    }
    const GBMModel& model = loaded.ensemble.models[0];
    scores.total.reserve(X.n);
    for (std::size_t r = 0; r < X.n; ++r) {
        const auto dist = model.predict_distribution(std::span<const double>(X.row(r), X.p));
        scores.total.push_back(single_model_measures(dist));
    }
    return scores;
}

void write_measure_csv(const std::string& path,
                       const std::vector<std::pair<std::string, double>>& measures) {
    std::string csv = "measure,value\n";
    for (const auto& [name, value] : measures) {
        csv += name + "," + format_double(value) + "\n";
        std::cout << name << "=" << format_double(value) << "\n";
    }
    write_text_file(path, csv);
}

void run_ood_eval(const OodEvalArgs& args) {
    if (args.pool.empty() == args.mask_col.empty()) {
        throw ValidationError("pass exactly one of --pool or --mask-col");
    }
    const LoadedModel loaded = load_for_inference(args.model);
    const Dataset raw = load_dataset(args.data, args.schema);

    std::vector<double> labels;
    std::vector<double> total;
    std::vector<double> knowledge;

    if (!args.mask_col.empty()) {
        // Grid mode: one dataset, the mask column marks the OOD rows.
        std::size_t mask_index = raw.schema.columns.size();
        for (std::size_t c = 0; c < raw.schema.columns.size(); ++c) {
            if (raw.schema.columns[c].name == args.mask_col) mask_index = c;
        }
        if (mask_index == raw.schema.columns.size()) {
            throw DataError("mask column '" + args.mask_col + "' not found");
        }
        labels.reserve(raw.n);
        const auto& column = raw.schema.columns[mask_index];
        for (std::size_t r = 0; r < raw.n; ++r) {
            double value = 0.0;
            if (column.kind == ColumnKind::numeric || column.kind == ColumnKind::target) {
                value = raw.numeric[mask_index][r];
            } else {
                const auto& cell = raw.strings[mask_index][r];
                if (cell == "0") {
                    value = 0.0;
                } else if (cell == "1") {
                    value = 1.0;
                } else {
                    throw DataError("mask column '" + args.mask_col + "' holds '" + cell +
                                    "'; expected 0 or 1");
                }
            }
            if (value != 0.0 && value != 1.0) {
                throw DataError("mask column '" + args.mask_col + "' must be 0/1");
            }
            labels.push_back(value);
        }
        const EncodedMatrix X =
            encode(project_for_encoder(raw, loaded.encoder.schema), loaded.encoder);
        ScoredRows scores = score_rows(loaded, X);
        total = std::move(scores.total);
        knowledge = std::move(scores.knowledge);
    } else {
        // Pool mode: build the OOD set, then score both populations.
        OodSpec spec;
        spec.source = load_dataset(args.pool, args.pool_schema);
        spec.in_domain_schema = loaded.encoder.schema;
        spec.in_domain_stats = loaded.training_stats;
        spec.size = raw.n;
        spec.seed = args.seed;
        const Dataset ood = build_ood_set(spec);

        const EncodedMatrix X_in =
            encode(project_for_encoder(raw, loaded.encoder.schema), loaded.encoder);
        const EncodedMatrix X_ood = encode(ood, loaded.encoder);
        ScoredRows in_scores = score_rows(loaded, X_in);
        const ScoredRows ood_scores = score_rows(loaded, X_ood);

        labels.assign(X_in.n, 0.0);
        labels.insert(labels.end(), X_ood.n, 1.0);
        total = std::move(in_scores.total);
        total.insert(total.end(), ood_scores.total.begin(), ood_scores.total.end());
        if (loaded.is_ensemble) {
            knowledge = std::move(in_scores.knowledge);
            knowledge.insert(knowledge.end(), ood_scores.knowledge.begin(),
                             ood_scores.knowledge.end());
        }
        std::cout << "ood set: " << X_ood.n << " rows (matches the test size)\n";
    }

    std::vector<std::pair<std::string, double>> measures;
    measures.emplace_back("auc_total", auc_roc(total, labels));
    if (!knowledge.empty()) measures.emplace_back("auc_knowledge", auc_roc(knowledge, labels));

    ensure_dir(args.out);
    write_measure_csv((fs::path(args.out) / "ood_auc.csv").string(), measures);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string model;
    std::string data;
    std::string schema;
    std::string out = ".";
    bool oracle_uncertainty = false; // test hook: score rows by their own error
};

void run_evaluate(const EvaluateArgs& args) {
    const LoadedModel loaded = load_for_inference(args.model);
    const Dataset data =
        project_for_encoder(load_dataset(args.data, args.schema), loaded.encoder.schema);
    const EncodedMatrix X = encode(data, loaded.encoder);
    const std::vector<double>& y = data.targets();

    const EvalReport report = evaluate_split(loaded.ensemble, X, y);

    // Per-row errors for the rejection metrics: squared error against the
    // mixture mean, or 0/1 misclassification against the posterior.
    std::vector<double> errors(X.n, 0.0);
    for (std::size_t r = 0; r < X.n; ++r) {
        const std::span<const double> row(X.row(r), X.p);
        if (report.task == Task::regression) {
            const auto members = loaded.ensemble.member_predictions(row);
            double mean_mu = 0.0;
            for (const auto& m : members) mean_mu += m.mu;
            mean_mu /= static_cast<double>(members.size());
            errors[r] = (mean_mu - y[r]) * (mean_mu - y[r]);
        } else {
            const double p = loaded.ensemble.predictive_posterior_class(row);
            const double predicted = p >= 0.5 ? 1.0 : 0.0;
            errors[r] = predicted == y[r] ? 0.0 : 1.0;
        }
    }
    ScoredRows scores = score_rows(loaded, X);
    if (args.oracle_uncertainty) scores.total = errors;

    std::vector<std::pair<std::string, double>> measures;
    measures.emplace_back("nll", report.nll);
    if (report.task == Task::regression) {
        measures.emplace_back("rmse", report.rmse);
    } else {
        measures.emplace_back("error_rate", report.error_rate);
    }
    measures.emplace_back("prr_total", prr(scores.total, errors));
    if (!scores.knowledge.empty()) {
        measures.emplace_back("prr_knowledge", prr(scores.knowledge, errors));
    }

    ensure_dir(args.out);
    write_measure_csv((fs::path(args.out) / "evaluation.csv").string(), measures);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-boosted decision trees with uncertainty estimation"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate synthetic datasets");
    synth->require_subcommand(1);

    SynthHeartArgs heart_args;
    auto* heart = synth->add_subcommand("heart", "9x9 heart-masked regression grid");
    heart->add_option("--seed", heart_args.seed, "Master seed");
    heart->add_option("--per-cell", heart_args.per_cell, "Training rows per unmasked cell");
    heart->add_option("--out", heart_args.out, "Output directory");
    heart->callback([&] { run_synth_heart(heart_args); });

    SynthSpiralArgs spiral_args;
    auto* spiral = synth->add_subcommand("spiral", "Three-arm spiral classification set");
    spiral->add_option("--seed", spiral_args.seed, "Master seed");
    spiral->add_option("--n-per-class", spiral_args.n_per_class, "Points per arm");
    spiral->add_option("--noise-sd", spiral_args.noise_sd, "Coordinate jitter");
    spiral->add_option("--turns", spiral_args.turns, "Rotation turns");
    spiral->add_flag("--no-derived", spiral_args.no_derived, "Skip rotated-axes and radius");
    spiral->add_option("--positive-class", spiral_args.positive_class,
                       "Arm treated as the positive class");
    spiral->add_option("--out", spiral_args.out, "Output directory");
    spiral->callback([&] { run_synth_spiral(spiral_args); });

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a model or ensemble");
    train_cmd->add_option("--data", train_args.data, "Training CSV")->required();
    train_cmd->add_option("--schema", train_args.schema, "Schema sidecar")->required();
    train_cmd->add_option("--out", train_args.out, "Output directory");
    train_cmd->add_option("--mode", train_args.mode, "sgb or sglb")
        ->check(CLI::IsMember({"sgb", "sglb"}));
    train_cmd->add_option("--trees", train_args.trees, "Boosting iterations T");
    train_cmd->add_option("--learning-rate", train_args.learning_rate, "Step size");
    train_cmd->add_option("--depth", train_args.depth, "Tree depth");
    train_cmd->add_option("--sample-rate", train_args.sample_rate, "SGB row subsample rate");
    train_cmd->add_option("--beta", train_args.beta, "SGLB inverse temperature (0: n)");
    train_cmd->add_option("--gamma", train_args.gamma, "SGLB shrinkage (negative: 1/(2n))");
    train_cmd->add_option("--members", train_args.members, "Ensemble size M");
    train_cmd->add_option("--seed", train_args.seed, "Master seed");
    train_cmd->add_flag("--grid", train_args.grid,
                        "Grid-search learning rate and depth by validation NLL");
    train_cmd->callback([&] { run_train(train_args); });

    UncertaintyArgs unc_args;
    auto* unc = app.add_subcommand("uncertainty", "Per-row uncertainty decomposition");
    unc->add_option("--model", unc_args.model, "Model or manifest file")->required();
    unc->add_option("--data", unc_args.data, "CSV to score")->required();
    unc->add_option("--schema", unc_args.schema, "Schema sidecar")->required();
    unc->add_option("--out", unc_args.out, "Output directory");
    unc->add_option("--virtual", unc_args.virtual_stride,
                    "Build a virtual ensemble with stride K");
    unc->callback([&] { run_uncertainty(unc_args); });

    OodEvalArgs ood_args;
    auto* ood = app.add_subcommand("ood-eval", "AUC of uncertainty as an OOD detector");
    ood->add_option("--model", ood_args.model, "Model or manifest file")->required();
    ood->add_option("--data", ood_args.data, "In-domain CSV (or grid CSV with --mask-col)")
        ->required();
    ood->add_option("--schema", ood_args.schema, "Schema sidecar")->required();
    ood->add_option("--pool", ood_args.pool, "OOD pool CSV");
    ood->add_option("--pool-schema", ood_args.pool_schema, "OOD pool schema");
    ood->add_option("--mask-col", ood_args.mask_col, "0/1 column marking OOD rows");
    ood->add_option("--seed", ood_args.seed, "OOD sampling seed");
    ood->add_option("--out", ood_args.out, "Output directory");
    ood->callback([&] { run_ood_eval(ood_args); });

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "NLL, RMSE/error rate, and PRR");
    eval->add_option("--model", eval_args.model, "Model or manifest file")->required();
    eval->add_option("--data", eval_args.data, "Test CSV")->required();
    eval->add_option("--schema", eval_args.schema, "Schema sidecar")->required();
    eval->add_option("--out", eval_args.out, "Output directory");
    eval->add_flag("--oracle-uncertainty", eval_args.oracle_uncertainty)->group("");
    eval->callback([&] { run_evaluate(eval_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
