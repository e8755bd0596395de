#ifndef AAGAN_EVAL_HPP
#define AAGAN_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aagan/config.hpp"
#include "aagan/data.hpp"
#include "aagan/model.hpp"
#include "aagan/tensor.hpp"

namespace aagan {

struct EvalReport {
    std::string setting;
    double accuracy = 0.0; // correct / sample_count exactly
    std::vector<double> per_class_accuracy;
    std::vector<std::size_t> per_class_correct, per_class_total;
    std::size_t sample_count = 0;
    std::size_t correct = 0;
};

struct ClassificationResult {
    std::size_t predicted = 0;
    std::vector<double> distribution;
    Tensor step_distributions; // [T x K]
};

// Splits one record per the protocol spec and classifies its observed
// portion. Evaluation never mutates the bundle.
ClassificationResult classify_record(const ModelBundle& bundle,
                                     const FeatureSequenceRecord& record,
                                     const SplitSpec& spec);

EvalReport evaluate_subset(const ModelBundle& bundle, const DatasetManifest& manifest,
                           const SplitSpec& spec, const std::vector<std::size_t>& indices,
                           const std::string& setting);

// Scores the manifest's test split. An empty setting name derives one from
// the observed fraction (0.2 "Earliest", 0.5 "Latest").
EvalReport evaluate(const ModelBundle& bundle, const DatasetManifest& manifest,
                    const SplitSpec& spec, const std::string& setting = "");

struct AblationResult {
    std::string variant;
    EvalReport report;
    TrainConfig config; // the median run's exact configuration
};

// Trains and scores each variant once per seed, reporting the median-accuracy
// run per variant (lower median for even counts, ties kept in seed order).
std::vector<AblationResult> run_ablation(const DatasetManifest& manifest,
                                         const TrainConfig& base,
                                         const std::vector<std::string>& variant_ids,
                                         const std::vector<std::uint64_t>& seeds);

struct EmbeddingRow {
    std::string id;
    std::size_t label = 0;
    double x_before = 0.0, y_before = 0.0;
    double x_after = 0.0, y_after = 0.0;
};

// Final-timestep context descriptors for test records sampled round-robin
// across classes, projected to 2D independently per bundle.
std::vector<EmbeddingRow> export_embeddings(const ModelBundle& before, const ModelBundle& after,
                                            const DatasetManifest& manifest,
                                            const SplitSpec& spec, std::size_t sample_count);

void write_eval_report_csv(const EvalReport& report, const std::string& path);
void write_eval_report_json(const EvalReport& report, const std::string& path);
void write_ablation_csv(const std::vector<AblationResult>& results, const std::string& path);
void write_ablation_json(const std::vector<AblationResult>& results, const std::string& path);
void write_embeddings_csv(const std::vector<EmbeddingRow>& rows, const std::string& path);

} // namespace aagan

#endif
