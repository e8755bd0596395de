#include "aagan/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "aagan/errors.hpp"
#include "aagan/heads.hpp"
#include "aagan/pca.hpp"
#include "aagan/train.hpp"

namespace aagan {

namespace {

std::string protocol_name(double fraction) {
    if (fraction == 0.2) return "Earliest";
    if (fraction == 0.5) return "Latest";
    char buf[40];
    std::snprintf(buf, sizeof buf, "fraction=%g", fraction);
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
    std::string quoted = "\"";
    for (char c : raw) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f || !f.write(text.data(), static_cast<std::streamsize>(text.size())))
        throw IoError("cannot write " + path);
}

// Last context step of one record's observed portion, as a plain row.
std::vector<double> final_context_row(const ModelBundle& bundle,
                                      const FeatureSequenceRecord& record,
                                      const SplitSpec& spec) {
    const SplitResult split = split_observed_future(record, spec);
    Graph g;
    const StagedModel staged = stage_model(g, bundle);
    std::vector<Var> visual, temporal;
    if (bundle.variant.use_visual) visual = stage_sample_steps(g, split.observed_visual);
    if (bundle.variant.use_temporal) temporal = stage_sample_steps(g, split.observed_temporal);
    const ContextPipeline ctx = build_context_pipeline(g, staged, bundle, visual, temporal);
    return g.value(ctx.context_steps.back()).values();
}

} // namespace

ClassificationResult classify_record(const ModelBundle& bundle,
                                     const FeatureSequenceRecord& record,
                                     const SplitSpec& spec) {
    const SplitResult split = split_observed_future(record, spec);
    Graph g;
    const StagedModel staged = stage_model(g, bundle);

    std::vector<Var> visual, temporal;
    if (bundle.variant.use_visual) visual = stage_sample_steps(g, split.observed_visual);
    if (bundle.variant.use_temporal) temporal = stage_sample_steps(g, split.observed_temporal);
    const ContextPipeline ctx = build_context_pipeline(g, staged, bundle, visual, temporal);

    const std::vector<Var> input =
        classifier_input_steps(g, staged, bundle, ctx, split.future_visual.rows());
    const std::vector<Var> logits = classifier_logits(g, staged.classifier, input);

    std::vector<Var> rows;
    rows.reserve(logits.size());
    for (const Var step : logits) rows.push_back(g.softmax_rows(step));

    ClassificationResult result;
    result.step_distributions = gather_rows(g, rows);
    result.predicted = vote_from_distributions(result.step_distributions, &result.distribution);
    return result;
}

EvalReport evaluate_subset(const ModelBundle& bundle, const DatasetManifest& manifest,
                           const SplitSpec& spec, const std::vector<std::size_t>& indices,
                           const std::string& setting) {
    if (indices.empty()) throw ConfigError("evaluation needs a non-empty record set");

    EvalReport report;
    report.setting = setting;
    report.sample_count = indices.size();
    report.per_class_correct.assign(manifest.num_classes, 0);
    report.per_class_total.assign(manifest.num_classes, 0);

    for (std::size_t idx : indices) {
        if (idx >= manifest.records.size())
            throw ShapeError("evaluation: record index " + std::to_string(idx) +
                             " out of range (have " + std::to_string(manifest.records.size()) +
                             " records)");
        const FeatureSequenceRecord& record = manifest.records[idx];
        const ClassificationResult result = classify_record(bundle, record, spec);
        ++report.per_class_total[record.label];
        if (result.predicted == record.label) {
            ++report.correct;
            ++report.per_class_correct[record.label];
        }
    }

    report.accuracy =
        static_cast<double>(report.correct) / static_cast<double>(report.sample_count);
    report.per_class_accuracy.assign(manifest.num_classes, 0.0);
    for (std::size_t c = 0; c < manifest.num_classes; ++c)
        if (report.per_class_total[c] > 0)
            report.per_class_accuracy[c] = static_cast<double>(report.per_class_correct[c]) /
                                           static_cast<double>(report.per_class_total[c]);
    return report;
}

EvalReport evaluate(const ModelBundle& bundle, const DatasetManifest& manifest,
                    const SplitSpec& spec, const std::string& setting) {
    if (manifest.test_indices.empty()) throw ConfigError("dataset has no test split");
    return evaluate_subset(bundle, manifest, spec, manifest.test_indices,
                           setting.empty() ? protocol_name(spec.observed_fraction) : setting);
}

std::vector<AblationResult> run_ablation(const DatasetManifest& manifest,
                                         const TrainConfig& base,
                                         const std::vector<std::string>& variant_ids,
                                         const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
    for (const std::string& id : variant_ids) variant_spec(id); // fail fast on bad ids

    std::vector<AblationResult> results;
    results.reserve(variant_ids.size());
    for (const std::string& id : variant_ids) {
        struct Run {
            EvalReport report;
            TrainConfig config;
        };
        std::vector<Run> runs;
        runs.reserve(seeds.size());
        for (std::uint64_t seed : seeds) {
            TrainConfig config = base;
            config.variant = id;
            config.seed = seed;
            const TrainResult trained = train(manifest, config);
            runs.push_back({evaluate(trained.bundle, manifest, config.split), config});
        }
        std::vector<std::size_t> order(runs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return runs[a].report.accuracy < runs[b].report.accuracy;
        });
        const Run& median = runs[order[(order.size() - 1) / 2]];
        results.push_back({id, median.report, median.config});
    }
    return results;
}

std::vector<EmbeddingRow> export_embeddings(const ModelBundle& before, const ModelBundle& after,
                                            const DatasetManifest& manifest,
                                            const SplitSpec& spec, std::size_t sample_count) {
    if (sample_count < 3) throw ConfigError("embedding export needs at least 3 samples");
    if (before.variant.id != after.variant.id || before.hidden_dim != after.hidden_dim ||
        before.feature_dim != after.feature_dim)
        throw ConfigError("embedding export needs structurally identical bundles");
    if (manifest.test_indices.size() < sample_count)
        throw ConfigError("embedding export: asked for " + std::to_string(sample_count) +
                          " samples, test split holds " +
                          std::to_string(manifest.test_indices.size()));

    // One record per class in turn keeps every class represented even for
    // small sample counts.
    std::vector<std::vector<std::size_t>> by_class(manifest.num_classes);
    for (std::size_t idx : manifest.test_indices)
        by_class[manifest.records[idx].label].push_back(idx);

    std::vector<std::size_t> chosen;
    std::vector<std::size_t> cursor(manifest.num_classes, 0);
    while (chosen.size() < sample_count) {
        bool any = false;
        for (std::size_t c = 0; c < by_class.size() && chosen.size() < sample_count; ++c) {
            if (cursor[c] < by_class[c].size()) {
                chosen.push_back(by_class[c][cursor[c]++]);
                any = true;
            }
        }
        if (!any) break; // unreachable given the size check above
    }

    Tensor points_before({chosen.size(), context_width(before.variant, before.hidden_dim)});
    Tensor points_after({chosen.size(), context_width(after.variant, after.hidden_dim)});
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const FeatureSequenceRecord& record = manifest.records[chosen[i]];
        const std::vector<double> row_b = final_context_row(before, record, spec);
        const std::vector<double> row_a = final_context_row(after, record, spec);
        for (std::size_t j = 0; j < row_b.size(); ++j) points_before.at(i, j) = row_b[j];
        for (std::size_t j = 0; j < row_a.size(); ++j) points_after.at(i, j) = row_a[j];
    }

    const Tensor proj_before = pca_2d(points_before);
    const Tensor proj_after = pca_2d(points_after);

    std::vector<EmbeddingRow> rows;
    rows.reserve(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const FeatureSequenceRecord& record = manifest.records[chosen[i]];
        rows.push_back({record.id, record.label, proj_before.at(i, 0), proj_before.at(i, 1),
                        proj_after.at(i, 0), proj_after.at(i, 1)});
    }
    return rows;
}

void write_eval_report_csv(const EvalReport& report, const std::string& path) {
    std::string out = "scope,correct,total,accuracy\n";
    out += csv_field(report.setting) + "," + std::to_string(report.correct) + "," +
           std::to_string(report.sample_count) + "," + format_double(report.accuracy) + "\n";
    for (std::size_t c = 0; c < report.per_class_accuracy.size(); ++c)
        out += "class_" + std::to_string(c) + "," + std::to_string(report.per_class_correct[c]) +
               "," + std::to_string(report.per_class_total[c]) + "," +
               format_double(report.per_class_accuracy[c]) + "\n";
    write_text(out, path);
}

namespace {

nlohmann::json report_to_json(const EvalReport& report) {
    return nlohmann::json{{"setting", report.setting},
                          {"accuracy", report.accuracy},
                          {"correct", report.correct},
                          {"sample_count", report.sample_count},
                          {"per_class_accuracy", report.per_class_accuracy},
                          {"per_class_correct", report.per_class_correct},
                          {"per_class_total", report.per_class_total}};
}

} // namespace

void write_eval_report_json(const EvalReport& report, const std::string& path) {
    write_text(report_to_json(report).dump(2) + "\n", path);
}

void write_ablation_csv(const std::vector<AblationResult>& results, const std::string& path) {
    std::string out = "variant,setting,seed,correct,total,accuracy\n";
    for (const AblationResult& r : results)
        out += csv_field(r.variant) + "," + csv_field(r.report.setting) + "," +
               std::to_string(r.config.seed) + "," + std::to_string(r.report.correct) + "," +
               std::to_string(r.report.sample_count) + "," + format_double(r.report.accuracy) +
               "\n";
    write_text(out, path);
}

void write_ablation_json(const std::vector<AblationResult>& results, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const AblationResult& r : results)
        arr.push_back(nlohmann::json{{"variant", r.variant},
                                     {"seed", r.config.seed},
                                     {"report", report_to_json(r.report)}});
    write_text(arr.dump(2) + "\n", path);
}

void write_embeddings_csv(const std::vector<EmbeddingRow>& rows, const std::string& path) {
    std::string out = "id,label,x_before,y_before,x_after,y_after\n";
    for (const EmbeddingRow& r : rows)
        out += csv_field(r.id) + "," + std::to_string(r.label) + "," + format_double(r.x_before) +
               "," + format_double(r.y_before) + "," + format_double(r.x_after) + "," +
               format_double(r.y_after) + "\n";
    write_text(out, path);
}

} // namespace aagan
