#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aagan/config.hpp"
#include "aagan/data.hpp"
#include "aagan/errors.hpp"
#include "aagan/eval.hpp"
#include "aagan/model.hpp"
#include "aagan/rng.hpp"
#include "aagan/train.hpp"

namespace {

using namespace aagan;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

LossWeights parse_weights(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty())
            throw ConfigError("weights: expected four comma-separated numbers, got '" + text +
                              "'");
        vals.push_back(v);
    }
    if (vals.size() != 4)
        throw ConfigError("weights: expected four comma-separated numbers, got '" + text + "'");
    return {vals[0], vals[1], vals[2], vals[3]};
}

std::vector<std::string> parse_variants(const std::string& text) {
    if (text == "all") return all_variant_ids();
    std::vector<std::string> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ConfigError("variants: empty id in '" + text + "'");
        ids.push_back(item);
    }
    if (ids.empty()) throw ConfigError("variants: none given");
    return ids;
}

// Layered options shared by the training-driven commands: defaults, then the
// JSON config file, then explicit flags. The file may also carry the dataset
// path and output directory alongside the training keys.
struct RunOpts {
    std::string config_path, dataset, out_dir = ".";
    bool print_config = false;

    std::size_t epochs = 0, batch = 0, hidden = 0;
    double lr = 0.0, decay = 0.0, fraction = 0.0;
    std::size_t resample = 0, horizon = 0;
    std::uint64_t seed = 0;
    std::string variant, weights, setting;
    bool epoch_eval = false;

    CLI::Option *o_epochs = nullptr, *o_batch = nullptr, *o_hidden = nullptr;
    CLI::Option *o_lr = nullptr, *o_decay = nullptr, *o_fraction = nullptr;
    CLI::Option *o_resample = nullptr, *o_horizon = nullptr, *o_seed = nullptr;
    CLI::Option *o_variant = nullptr, *o_weights = nullptr, *o_setting = nullptr;
    CLI::Option *o_epoch_eval = nullptr, *o_out_dir = nullptr;

    void attach_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        o_out_dir = cmd->add_option("--out-dir", out_dir, "output directory");
        cmd->add_flag("--print-config", print_config,
                      "print the resolved configuration and exit");
    }

    void attach_split(CLI::App* cmd) {
        o_setting = cmd->add_option("--setting", setting, "observation protocol")
                        ->check(CLI::IsMember({"earliest", "latest"}));
        o_fraction = cmd->add_option("--fraction", fraction, "observed fraction of each sequence")
                         ->excludes(o_setting);
        o_resample = cmd->add_option("--resample", resample, "resample length, 0 keeps native");
        o_horizon = cmd->add_option("--horizon", horizon, "future steps, 0 matches observed");
    }

    void attach_train(CLI::App* cmd) {
        attach_common(cmd);
        cmd->add_option("--dataset", dataset, "dataset container path");
        o_epochs = cmd->add_option("--epochs", epochs, "training epochs");
        o_batch = cmd->add_option("--batch", batch, "mini-batch size");
        o_lr = cmd->add_option("--lr", lr, "initial learning rate");
        o_decay = cmd->add_option("--decay", decay, "learning rate decay");
        o_hidden = cmd->add_option("--hidden", hidden, "recurrent state width");
        o_seed = cmd->add_option("--seed", seed, "run seed");
        o_variant = cmd->add_option("--variant", variant, "model variant id");
        o_weights = cmd->add_option("--weights", weights,
                                    "loss weights as wV,wTP,wC,wR");
        o_epoch_eval = cmd->add_flag("--epoch-eval", epoch_eval,
                                     "record train and test accuracy each epoch");
        attach_split(cmd);
    }

    // Config file first, explicit flags on top.
    TrainConfig resolve() {
        TrainConfig config;
        if (!config_path.empty()) {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(read_file(config_path));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(config_path + ": malformed JSON: " + e.what());
            }
            if (!doc.is_object()) throw ConfigError(config_path + ": expected a JSON object");
            if (doc.contains("dataset")) {
                if (dataset.empty()) dataset = doc.at("dataset").get<std::string>();
                doc.erase("dataset");
            }
            if (doc.contains("out_dir")) {
                if (o_out_dir != nullptr && o_out_dir->count() == 0)
                    out_dir = doc.at("out_dir").get<std::string>();
                doc.erase("out_dir");
            }
            config = train_config_from_json(doc.dump());
        }
        if (o_epochs->count() > 0) config.epochs = epochs;
        if (o_batch->count() > 0) config.batch_size = batch;
        if (o_lr->count() > 0) config.learning_rate = lr;
        if (o_decay->count() > 0) config.decay = decay;
        if (o_hidden->count() > 0) config.hidden_dim = hidden;
        if (o_seed->count() > 0) config.seed = seed;
        if (o_variant->count() > 0) config.variant = variant;
        if (o_weights->count() > 0) config.weights = parse_weights(weights);
        if (o_epoch_eval->count() > 0) config.epoch_eval = epoch_eval;
        apply_split(config.split);
        return config;
    }

    void apply_split(SplitSpec& split) const {
        if (o_setting != nullptr && o_setting->count() > 0)
            split.observed_fraction = setting == "earliest" ? 0.2 : 0.5;
        if (o_fraction != nullptr && o_fraction->count() > 0)
            split.observed_fraction = fraction;
        if (o_resample != nullptr && o_resample->count() > 0) split.resample_len = resample;
        if (o_horizon != nullptr && o_horizon->count() > 0) split.future_horizon = horizon;
    }

    std::string resolved_document(const TrainConfig& config) const {
        nlohmann::json doc = nlohmann::json::parse(train_config_to_json(config));
        if (!dataset.empty()) doc["dataset"] = dataset;
        doc["out_dir"] = out_dir;
        return doc.dump(2);
    }

    void require_dataset() const {
        if (dataset.empty()) throw CLI::RequiredError("--dataset");
    }
};

DatasetManifest load_for(const CheckpointData& ckpt, const std::string& path) {
    DatasetManifest manifest = load_dataset(path);
    if (manifest.feature_dim != ckpt.feature_dim || manifest.num_classes != ckpt.num_classes)
        throw ConfigError("dataset dimensions " + std::to_string(manifest.num_classes) +
                          " classes x " + std::to_string(manifest.feature_dim) +
                          " features do not match the checkpoint (" +
                          std::to_string(ckpt.num_classes) + " x " +
                          std::to_string(ckpt.feature_dim) + ")");
    return manifest;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

int cmd_gen_data(const std::string& out, bool print_config, const GeneratorConfig& config) {
    if (print_config) {
        std::cout << generator_config_to_json(config) << "\n";
        return 0;
    }
    if (out.empty()) throw CLI::RequiredError("--out");

    const DatasetManifest manifest = generate_synthetic_dataset(config);
    save_dataset(manifest, out);
    std::cout << "dataset " << out << ": classes=" << manifest.num_classes
              << " dim=" << manifest.feature_dim << " records=" << manifest.records.size()
              << " train=" << manifest.train_indices.size()
              << " test=" << manifest.test_indices.size() << " seed=" << config.seed << "\n";
    return 0;
}

int cmd_train(RunOpts& opts) {
    const TrainConfig config = opts.resolve();
    if (opts.print_config) {
        std::cout << opts.resolved_document(config) << "\n";
        return 0;
    }
    opts.require_dataset();

    const DatasetManifest manifest = load_dataset(opts.dataset);
    Trainer trainer(manifest, config);
    trainer.run();

    ensure_dir(opts.out_dir);
    const std::string checkpoint = join_path(opts.out_dir, "checkpoint.bin");
    const std::string metrics = join_path(opts.out_dir, "metrics.csv");
    trainer.save_checkpoint(checkpoint);
    write_metrics_csv(trainer.metrics(), metrics);

    std::cout << "trained variant=" << config.variant
              << " steps=" << trainer.progress().global_step
              << " clamp_events=" << trainer.metrics().clamp_events
              << " checkpoint=" << checkpoint << " metrics=" << metrics << "\n";
    return 0;
}

int cmd_eval(RunOpts& opts, const std::string& checkpoint_path) {
    if (checkpoint_path.empty()) throw CLI::RequiredError("--checkpoint");
    const CheckpointData ckpt = load_checkpoint_file(checkpoint_path);

    SplitSpec split = ckpt.config.split;
    opts.apply_split(split);
    if (opts.print_config) {
        TrainConfig shown = ckpt.config;
        shown.split = split;
        std::cout << opts.resolved_document(shown) << "\n";
        return 0;
    }
    opts.require_dataset();

    const DatasetManifest manifest = load_for(ckpt, opts.dataset);
    const EvalReport report = evaluate(ckpt.bundle, manifest, split);

    ensure_dir(opts.out_dir);
    write_eval_report_csv(report, join_path(opts.out_dir, "report.csv"));
    write_eval_report_json(report, join_path(opts.out_dir, "report.json"));

    char acc[40];
    std::snprintf(acc, sizeof acc, "%.17g", report.accuracy);
    std::cout << "setting=" << report.setting << " accuracy=" << acc
              << " correct=" << report.correct << " total=" << report.sample_count << "\n";
    return 0;
}

int cmd_ablate(RunOpts& opts, const std::string& variants, std::size_t seed_count) {
    const TrainConfig config = opts.resolve();
    if (opts.print_config) {
        std::cout << opts.resolved_document(config) << "\n";
        return 0;
    }
    opts.require_dataset();
    if (seed_count == 0) throw ConfigError("--seeds must be at least 1");

    const std::vector<std::string> ids = parse_variants(variants);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < seed_count; ++i) seeds.push_back(config.seed + i);

    const DatasetManifest manifest = load_dataset(opts.dataset);
    const std::vector<AblationResult> results = run_ablation(manifest, config, ids, seeds);

    ensure_dir(opts.out_dir);
    write_ablation_csv(results, join_path(opts.out_dir, "ablation.csv"));
    write_ablation_json(results, join_path(opts.out_dir, "ablation.json"));

    for (const AblationResult& r : results) {
        char acc[40];
        std::snprintf(acc, sizeof acc, "%.17g", r.report.accuracy);
        std::cout << "variant=" << r.variant << " accuracy=" << acc
                  << " seed=" << r.config.seed << "\n";
    }
    return 0;
}

int cmd_export(RunOpts& opts, const std::string& checkpoint_path, std::size_t samples) {
    if (checkpoint_path.empty()) throw CLI::RequiredError("--checkpoint");
    const CheckpointData ckpt = load_checkpoint_file(checkpoint_path);

    SplitSpec split = ckpt.config.split;
    opts.apply_split(split);
    if (opts.print_config) {
        TrainConfig shown = ckpt.config;
        shown.split = split;
        std::cout << opts.resolved_document(shown) << "\n";
        return 0;
    }
    opts.require_dataset();

    const DatasetManifest manifest = load_for(ckpt, opts.dataset);
    Rng rng(mix_seed(ckpt.config.seed, kModelInitTag));
    const ModelBundle before = build_model(variant_spec(ckpt.config.variant), ckpt.feature_dim,
                                           ckpt.num_classes, ckpt.config, rng);
    const std::vector<EmbeddingRow> rows =
        export_embeddings(before, ckpt.bundle, manifest, split, samples);

    ensure_dir(opts.out_dir);
    const std::string path = join_path(opts.out_dir, "embeddings.csv");
    write_embeddings_csv(rows, path);
    std::cout << "embeddings=" << path << " rows=" << rows.size() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stream action anticipation workbench"};
    app.require_subcommand(1);

    // gen-data
    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset container");
    std::string gen_config, gen_out;
    bool gen_print = false;
    GeneratorConfig gen_cfg;
    gen->add_option("--config", gen_config, "JSON generator config");
    gen->add_option("--out", gen_out, "dataset path to write");
    gen->add_flag("--print-config", gen_print, "print the resolved configuration and exit");
    CLI::Option* g_classes = gen->add_option("--classes", gen_cfg.classes, "action classes");
    CLI::Option* g_dim = gen->add_option("--dim", gen_cfg.feature_dim, "feature width");
    CLI::Option* g_samples =
        gen->add_option("--samples", gen_cfg.samples_per_class, "samples per class");
    CLI::Option* g_len = gen->add_option("--len", gen_cfg.total_len, "sequence length");
    CLI::Option* g_noise = gen->add_option("--noise", gen_cfg.noise, "observation noise");
    CLI::Option* g_seed = gen->add_option("--seed", gen_cfg.seed, "generator seed");
    CLI::Option* g_frac =
        gen->add_option("--train-fraction", gen_cfg.train_fraction, "train split share");

    // train
    CLI::App* tr = app.add_subcommand("train", "train a variant and write a checkpoint");
    RunOpts train_opts;
    train_opts.attach_train(tr);

    // eval
    CLI::App* ev = app.add_subcommand("eval", "score a checkpoint on a dataset's test split");
    RunOpts eval_opts;
    std::string eval_checkpoint;
    eval_opts.attach_common(ev);
    ev->add_option("--dataset", eval_opts.dataset, "dataset container path");
    ev->add_option("--checkpoint", eval_checkpoint, "checkpoint to score");
    eval_opts.attach_split(ev);

    // ablate
    CLI::App* ab = app.add_subcommand("ablate", "train and score variants across seeds");
    RunOpts ablate_opts;
    std::string ablate_variants = "all";
    std::size_t ablate_seeds = 5;
    ablate_opts.attach_train(ab);
    ab->add_option("--variants", ablate_variants, "comma-separated variant ids or 'all'");
    ab->add_option("--seeds", ablate_seeds, "number of consecutive seeds per variant");

    // export-embeddings
    CLI::App* ex = app.add_subcommand("export-embeddings",
                                      "project context descriptors before and after training");
    RunOpts export_opts;
    std::string export_checkpoint;
    std::size_t export_samples = 40;
    export_opts.attach_common(ex);
    ex->add_option("--dataset", export_opts.dataset, "dataset container path");
    ex->add_option("--checkpoint", export_checkpoint, "trained checkpoint");
    ex->add_option("--samples", export_samples, "records to project");
    export_opts.attach_split(ex);

    try {
        app.parse(argc, argv);

        if (app.got_subcommand(gen)) {
            // Flags win over the config file; remember which ones were given.
            GeneratorConfig flags = gen_cfg;
            if (!gen_config.empty()) {
                gen_cfg = generator_config_from_json(read_file(gen_config));
                if (g_classes->count() > 0) gen_cfg.classes = flags.classes;
                if (g_dim->count() > 0) gen_cfg.feature_dim = flags.feature_dim;
                if (g_samples->count() > 0) gen_cfg.samples_per_class = flags.samples_per_class;
                if (g_len->count() > 0) gen_cfg.total_len = flags.total_len;
                if (g_noise->count() > 0) gen_cfg.noise = flags.noise;
                if (g_seed->count() > 0) gen_cfg.seed = flags.seed;
                if (g_frac->count() > 0) gen_cfg.train_fraction = flags.train_fraction;
            }
            return cmd_gen_data(gen_out, gen_print, gen_cfg);
        }
        if (app.got_subcommand(tr)) return cmd_train(train_opts);
        if (app.got_subcommand(ev)) return cmd_eval(eval_opts, eval_checkpoint);
        if (app.got_subcommand(ab)) return cmd_ablate(ablate_opts, ablate_variants, ablate_seeds);
        if (app.got_subcommand(ex)) return cmd_export(export_opts, export_checkpoint,
                                                      export_samples);
        return 2; // unreachable with require_subcommand
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const aagan::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
