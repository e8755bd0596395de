#ifndef AAGAN_DATA_HPP
#define AAGAN_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aagan/tensor.hpp"

namespace aagan {

// One action sample as two aligned feature streams: appearance embeddings
// and motion embeddings, row t describing frame t.
struct FeatureSequenceRecord {
    Tensor visual;   // [T_total x D]
    Tensor temporal; // [T_total x D]
    std::size_t label = 0;
    std::string id;
};

struct GeneratorConfig {
    std::size_t classes = 4;
    std::size_t feature_dim = 32;
    std::size_t samples_per_class = 150;
    std::size_t total_len = 50;
    double noise = 0.05;
    std::uint64_t seed = 1;
    double train_fraction = 2.0 / 3.0;
};

struct DatasetManifest {
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::vector<FeatureSequenceRecord> records;
    std::vector<std::size_t> train_indices, test_indices;
    bool has_generator = false;
    GeneratorConfig generator; // meaningful only when has_generator
};

// Protocol for carving a sequence into an observed prefix and the future
// window the model must anticipate.
struct SplitSpec {
    double observed_fraction = 0.2; // 0.2 earliest protocol, 0.5 latest
    std::size_t resample_len = 50;  // 0: keep the native length
    std::size_t future_horizon = 0; // 0: match the observed length
};

struct SplitResult {
    Tensor observed_visual, observed_temporal; // [T x D]
    Tensor future_visual, future_temporal;     // [H x D]
    std::size_t label = 0;
};

// Each class is a seeded random rotation with its own unit anchor; samples
// start near the anchor and follow the class dynamics. The visual stream is
// the trajectory plus noise, the temporal stream its first differences plus
// noise. All emitted values lie on a 2^-12 grid so the 32-bit container
// round-trips them exactly.
DatasetManifest generate_synthetic_dataset(const GeneratorConfig& config);

// Uniform nearest-index resampling of both streams to target_len rows.
FeatureSequenceRecord resample_sequence(const FeatureSequenceRecord& record,
                                        std::size_t target_len);

// Resamples per spec, then splits: observed rows 1..T with
// T = round(fraction * length), future rows T+1..T+H.
SplitResult split_observed_future(const FeatureSequenceRecord& record, const SplitSpec& spec);

// Binary container plus a JSON sidecar (path + ".json") carrying the split
// assignments and, for synthetic data, the generator settings. Payloads are
// 32-bit floats.
void save_dataset(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_dataset(const std::string& path);

} // namespace aagan

#endif
