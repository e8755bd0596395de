#include "aagan/config.hpp"

#include <set>

#include <json.hpp>

#include "aagan/errors.hpp"

namespace aagan {

namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& known, const char* where) {
    for (const auto& [key, value] : object.items())
        if (!known.count(key))
            throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
}

json split_to_json(const SplitSpec& s) {
    return {{"observed_fraction", s.observed_fraction},
            {"resample_len", s.resample_len},
            {"future_horizon", s.future_horizon}};
}

SplitSpec split_from_json(const json& j) {
    reject_unknown(j, {"observed_fraction", "resample_len", "future_horizon"}, "split");
    SplitSpec s;
    s.observed_fraction = j.value("observed_fraction", s.observed_fraction);
    s.resample_len = j.value("resample_len", s.resample_len);
    s.future_horizon = j.value("future_horizon", s.future_horizon);
    return s;
}

json parse(const std::string& text, const char* where) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + ": malformed JSON: " + e.what());
    }
}

} // namespace

TrainConfig train_config_from_json(const std::string& text) {
    const json j = parse(text, "train config");
    reject_unknown(j,
                   {"weights", "epochs", "batch_size", "learning_rate", "decay", "hidden_dim",
                    "energy_hidden", "disc_hidden", "split", "seed", "variant",
                    "non_saturating_generator", "strict_attention",
                    "cosine_distance_literal", "discriminator_updates_context", "epoch_eval"},
                   "train config");
    TrainConfig c;
    if (j.contains("weights")) {
        const json& w = j["weights"];
        reject_unknown(w, {"visual", "temporal", "classification", "regularization"}, "weights");
        c.weights.visual = w.value("visual", c.weights.visual);
        c.weights.temporal = w.value("temporal", c.weights.temporal);
        c.weights.classification = w.value("classification", c.weights.classification);
        c.weights.regularization = w.value("regularization", c.weights.regularization);
    }
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.decay = j.value("decay", c.decay);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.energy_hidden = j.value("energy_hidden", c.energy_hidden);
    c.disc_hidden = j.value("disc_hidden", c.disc_hidden);
    if (j.contains("split")) c.split = split_from_json(j["split"]);
    c.seed = j.value("seed", c.seed);
    c.variant = j.value("variant", c.variant);
    c.non_saturating_generator = j.value("non_saturating_generator", c.non_saturating_generator);
    c.strict_attention = j.value("strict_attention", c.strict_attention);
    c.cosine_distance_literal = j.value("cosine_distance_literal", c.cosine_distance_literal);
    c.discriminator_updates_context =
        j.value("discriminator_updates_context", c.discriminator_updates_context);
    c.epoch_eval = j.value("epoch_eval", c.epoch_eval);
    return c;
}

std::string train_config_to_json(const TrainConfig& c) {
    json j;
    j["weights"] = {{"visual", c.weights.visual},
                    {"temporal", c.weights.temporal},
                    {"classification", c.weights.classification},
                    {"regularization", c.weights.regularization}};
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["decay"] = c.decay;
    j["hidden_dim"] = c.hidden_dim;
    j["energy_hidden"] = c.energy_hidden;
    j["disc_hidden"] = c.disc_hidden;
    j["split"] = split_to_json(c.split);
    j["seed"] = c.seed;
    j["variant"] = c.variant;
    j["non_saturating_generator"] = c.non_saturating_generator;
    j["strict_attention"] = c.strict_attention;
    j["cosine_distance_literal"] = c.cosine_distance_literal;
    j["discriminator_updates_context"] = c.discriminator_updates_context;
    j["epoch_eval"] = c.epoch_eval;
    return j.dump(2);
}

GeneratorConfig generator_config_from_json(const std::string& text) {
    const json j = parse(text, "data config");
    reject_unknown(j,
                   {"classes", "feature_dim", "samples_per_class", "total_len", "noise", "seed",
                    "train_fraction"},
                   "data config");
    GeneratorConfig c;
    c.classes = j.value("classes", c.classes);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.samples_per_class = j.value("samples_per_class", c.samples_per_class);
    c.total_len = j.value("total_len", c.total_len);
    c.noise = j.value("noise", c.noise);
    c.seed = j.value("seed", c.seed);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    return c;
}

std::string generator_config_to_json(const GeneratorConfig& c) {
    json j;
    j["classes"] = c.classes;
    j["feature_dim"] = c.feature_dim;
    j["samples_per_class"] = c.samples_per_class;
    j["total_len"] = c.total_len;
    j["noise"] = c.noise;
    j["seed"] = c.seed;
    j["train_fraction"] = c.train_fraction;
    return j.dump(2);
}

std::uint64_t config_hash(const TrainConfig& config) {
    const std::string text = train_config_to_json(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void validate(const TrainConfig& config) {
    if (config.epochs < 1) throw ConfigError("train config: epochs must be at least 1");
    if (config.batch_size < 1) throw ConfigError("train config: batch size must be at least 1");
    if (!(config.learning_rate > 0.0))
        throw ConfigError("train config: learning rate must be positive");
    if (config.decay < 0.0) throw ConfigError("train config: decay must be non-negative");
    if (config.hidden_dim < 1) throw ConfigError("train config: hidden dim must be at least 1");
    if (!(config.split.observed_fraction > 0.0) || !(config.split.observed_fraction < 1.0))
        throw ConfigError("train config: observed fraction must lie in (0,1)");
}

} // namespace aagan
