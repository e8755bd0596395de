#ifndef AAGAN_CONFIG_HPP
#define AAGAN_CONFIG_HPP

#include <cstdint>
#include <string>

#include "aagan/data.hpp"
#include "aagan/losses.hpp"

namespace aagan {

struct TrainConfig {
    LossWeights weights;
    std::size_t epochs = 40;
    std::size_t batch_size = 32;
    double learning_rate = 2e-4;
    double decay = 8e-9;
    std::size_t hidden_dim = 300;
    std::size_t energy_hidden = 0; // 0: linear attention energies
    std::size_t disc_hidden = 0;   // judge head width, 0: hidden_dim
    SplitSpec split;
    std::uint64_t seed = 1;
    std::string variant = "full";
    bool non_saturating_generator = true;
    bool strict_attention = false;
    bool cosine_distance_literal = false;
    bool discriminator_updates_context = false;
    bool epoch_eval = false;
};

// JSON round trip with unknown keys rejected; the emitted form is canonical
// (sorted keys), so equal configs serialize identically.
TrainConfig train_config_from_json(const std::string& text);
std::string train_config_to_json(const TrainConfig& config);

GeneratorConfig generator_config_from_json(const std::string& text);
std::string generator_config_to_json(const GeneratorConfig& config);

// FNV-1a over the canonical serialization; pins checkpoints to their config.
std::uint64_t config_hash(const TrainConfig& config);

void validate(const TrainConfig& config); // throws ConfigError

} // namespace aagan

#endif
