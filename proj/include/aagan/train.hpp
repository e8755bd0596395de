#ifndef AAGAN_TRAIN_HPP
#define AAGAN_TRAIN_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aagan/adam.hpp"
#include "aagan/config.hpp"
#include "aagan/data.hpp"
#include "aagan/losses.hpp"
#include "aagan/model.hpp"

namespace aagan {

struct TrainMetrics {
    std::vector<LossBreakdown> history; // one entry per executed step
    std::size_t clamp_events = 0;
    std::vector<double> epoch_train_accuracy; // filled when epoch_eval is on
    std::vector<double> epoch_test_accuracy;
};

// Stages run in order: stage 0 trains synthesis (plus the classifier for
// joint variants); two-stage variants then train the classifier alone in
// stage 1 against the frozen pipeline. Each stage runs config.epochs epochs.
struct TrainProgress {
    std::uint64_t stage = 0;
    std::uint64_t epoch = 0;
    std::uint64_t step_in_epoch = 0;
    std::uint64_t global_step = 0;
};

// Alternating-phase training over one dataset. Every step consumes one
// mini-batch: adversarial variants first update the discriminators on their
// losses with the context held constant, then update everything else on the
// weighted joint objective with generator-side adversarial terms.
class Trainer {
public:
    Trainer(const DatasetManifest& manifest, const TrainConfig& config);

    bool finished() const;
    void step();
    void run(); // all remaining steps

    std::uint64_t total_stages() const;
    std::uint64_t steps_per_epoch() const;

    const ModelBundle& bundle() const { return bundle_; }
    const TrainMetrics& metrics() const { return metrics_; }
    const TrainProgress& progress() const { return progress_; }
    const TrainConfig& config() const { return config_; }

    // Binary snapshot of parameters, optimizer states, and progress.
    // Written atomically via a sibling temp file. Loading requires the
    // checkpoint's configuration hash to match this trainer's.
    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

private:
    const std::vector<std::size_t>& epoch_order();
    std::vector<std::size_t> batch_indices();
    void discriminator_phase(const BatchData& batch, LossBreakdown& entry);
    void main_phase(const BatchData& batch, LossBreakdown& entry);
    void classifier_phase(const BatchData& batch, LossBreakdown& entry);
    void apply_updates(Graph& g, const ParamRegistry& registry, AdamState& state);
    void check_finite(double value, const char* component) const;
    void advance();

    const DatasetManifest& manifest_;
    TrainConfig config_;
    VariantSpec variant_;
    ModelBundle bundle_;
    AdamState disc_state_, main_state_, stage2_state_;
    TrainProgress progress_;
    TrainMetrics metrics_;
    std::vector<std::size_t> order_;
    std::uint64_t order_epoch_ = static_cast<std::uint64_t>(-1);
};

struct TrainResult {
    ModelBundle bundle;
    TrainMetrics metrics;
    TrainProgress progress;
};

TrainResult train(const DatasetManifest& manifest, const TrainConfig& config);

// Checkpoint contents decoded without a trainer; the bundle is rebuilt from
// the embedded configuration and overwritten with the stored parameters.
struct CheckpointData {
    TrainConfig config;
    std::size_t feature_dim = 0;
    std::size_t num_classes = 0;
    TrainProgress progress;
    std::size_t clamp_events = 0;
    AdamState disc_state, main_state, stage2_state;
    ModelBundle bundle;
};

CheckpointData load_checkpoint_file(const std::string& path);

// Per-step loss table; epoch accuracies, when recorded, land in a second
// file at path + ".epochs.csv".
void write_metrics_csv(const TrainMetrics& metrics, const std::string& path);

// Deterministic sub-seed tags; checkpoints and resume tests rely on these
// staying fixed.
inline constexpr std::uint64_t kModelInitTag = 0xAB001ULL;
inline constexpr std::uint64_t kShuffleTagBase = 0xE0000ULL;

} // namespace aagan

#endif
