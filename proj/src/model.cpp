#include "aagan/model.hpp"

#include <string>
#include <utility>

#include "aagan/errors.hpp"

namespace aagan {

namespace {

struct VariantRow {
    const char* id;
    bool v, tp, att, gen, adv, joint, reg;
};

// Streams, attention, synthesis, adversarial training, joint training, and
// the alignment regularizer per ablation id. Classifier-only rows keep
// joint=true so nothing runs in two stages.
constexpr VariantRow kVariantTable[] = {
    {"a", true, false, false, false, false, true, false},
    {"b", false, true, false, false, false, true, false},
    {"c", true, true, false, false, false, true, false},
    {"d", true, false, false, true, false, true, false},
    {"e", false, true, false, true, false, true, false},
    {"f", true, true, false, true, false, true, false},
    {"g", true, true, true, true, false, true, false},
    {"h", true, false, false, true, true, false, true},
    {"i", false, true, false, true, true, false, true},
    {"j", true, true, true, true, true, false, true},
    {"k", true, false, false, true, true, true, false},
    {"l", false, true, false, true, true, true, false},
    {"m", true, false, false, true, true, true, true},
    {"n", false, true, false, true, true, true, true},
    {"o", true, true, true, true, true, true, false},
    {"full", true, true, true, true, true, true, true},
};

} // namespace

VariantSpec variant_spec(const std::string& id) {
    for (const VariantRow& row : kVariantTable) {
        if (id == row.id) {
            VariantSpec spec;
            spec.id = row.id;
            spec.use_visual = row.v;
            spec.use_temporal = row.tp;
            spec.use_attention = row.att;
            spec.generators = row.gen;
            spec.adversarial = row.adv;
            spec.joint = row.joint;
            spec.regularizer = row.reg;
            return spec;
        }
    }
    throw ConfigError("unknown variant id \"" + id + "\" (valid: a..o, full)");
}

const std::vector<std::string>& all_variant_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const VariantRow& row : kVariantTable) out.emplace_back(row.id);
        return out;
    }();
    return ids;
}

std::size_t context_width(const VariantSpec& variant, std::size_t hidden_dim) {
    return variant.single_stream() ? hidden_dim : 2 * hidden_dim;
}

std::size_t classifier_input_width(const VariantSpec& variant, std::size_t hidden_dim,
                                   std::size_t feature_dim) {
    if (!variant.two_stage()) return context_width(variant, hidden_dim);
    return variant.single_stream() ? feature_dim : 2 * feature_dim;
}

void ModelBundle::collect(std::vector<Tensor*>& out) {
    if (encoder_v) encoder_v->collect(out);
    if (encoder_tp) encoder_tp->collect(out);
    if (attention) attention->collect(out);
    if (generator_v) generator_v->collect(out);
    if (generator_tp) generator_tp->collect(out);
    if (discriminator_v) discriminator_v->collect(out);
    if (discriminator_tp) discriminator_tp->collect(out);
    classifier.collect(out);
}

void ModelBundle::collect(std::vector<const Tensor*>& out) const {
    if (encoder_v) encoder_v->collect(out);
    if (encoder_tp) encoder_tp->collect(out);
    if (attention) attention->collect(out);
    if (generator_v) generator_v->collect(out);
    if (generator_tp) generator_tp->collect(out);
    if (discriminator_v) discriminator_v->collect(out);
    if (discriminator_tp) discriminator_tp->collect(out);
    classifier.collect(out);
}

std::size_t ModelBundle::parameter_count() const {
    std::vector<const Tensor*> all;
    collect(all);
    std::size_t n = 0;
    for (const Tensor* t : all) n += t->size();
    return n;
}

ModelBundle build_model(const VariantSpec& variant, std::size_t feature_dim,
                        std::size_t num_classes, const TrainConfig& config, Rng& rng) {
    if (feature_dim == 0) throw ConfigError("build_model: feature_dim must be positive");
    const std::size_t hidden = config.hidden_dim;

    ModelBundle bundle;
    bundle.variant = variant;
    bundle.feature_dim = feature_dim;
    bundle.hidden_dim = hidden;
    bundle.num_classes = num_classes;
    bundle.strict_attention = config.strict_attention;

    if (variant.use_visual) bundle.encoder_v = LstmParams::init(feature_dim, hidden, rng);
    if (variant.use_temporal) bundle.encoder_tp = LstmParams::init(feature_dim, hidden, rng);
    if (variant.use_attention)
        bundle.attention = AttentionParams::init(hidden, config.energy_hidden, rng);

    const std::size_t ctx = context_width(variant, hidden);
    if (variant.generators) {
        if (variant.use_visual)
            bundle.generator_v = GeneratorParams::init(ctx, hidden, feature_dim, rng);
        if (variant.use_temporal)
            bundle.generator_tp = GeneratorParams::init(ctx, hidden, feature_dim, rng);
    }
    if (variant.generators && variant.adversarial) {
        if (variant.use_visual)
            bundle.discriminator_v =
                DiscriminatorParams::init(ctx, feature_dim, hidden, config.disc_hidden, rng);
        if (variant.use_temporal)
            bundle.discriminator_tp =
                DiscriminatorParams::init(ctx, feature_dim, hidden, config.disc_hidden, rng);
    }
    bundle.classifier = ClassifierParams::init(
        classifier_input_width(variant, hidden, feature_dim), hidden, num_classes, rng);
    return bundle;
}

StagedModel stage_model(Graph& g, ModelBundle& bundle, unsigned trainable_mask,
                        ParamRegistry* registry) {
    StagedModel staged;
    const bool enc = trainable_mask & kPartEncoders;
    const bool att = trainable_mask & kPartAttention;
    const bool gen = trainable_mask & kPartGenerators;
    const bool dis = trainable_mask & kPartDiscriminators;
    const bool cls = trainable_mask & kPartClassifier;

    if (bundle.encoder_v) staged.encoder_v = stage_lstm(g, *bundle.encoder_v, enc, registry);
    if (bundle.encoder_tp) staged.encoder_tp = stage_lstm(g, *bundle.encoder_tp, enc, registry);
    if (bundle.attention)
        staged.attention = stage_attention(g, *bundle.attention, att, registry);
    if (bundle.generator_v)
        staged.generator_v = stage_generator(g, *bundle.generator_v, gen, registry);
    if (bundle.generator_tp)
        staged.generator_tp = stage_generator(g, *bundle.generator_tp, gen, registry);
    if (bundle.discriminator_v)
        staged.discriminator_v = stage_discriminator(g, *bundle.discriminator_v, dis, registry);
    if (bundle.discriminator_tp)
        staged.discriminator_tp = stage_discriminator(g, *bundle.discriminator_tp, dis, registry);
    staged.classifier = stage_classifier(g, bundle.classifier, cls, registry);
    return staged;
}

StagedModel stage_model(Graph& g, const ModelBundle& bundle) {
    StagedModel staged;
    if (bundle.encoder_v) staged.encoder_v = stage_lstm(g, *bundle.encoder_v);
    if (bundle.encoder_tp) staged.encoder_tp = stage_lstm(g, *bundle.encoder_tp);
    if (bundle.attention) staged.attention = stage_attention(g, *bundle.attention);
    if (bundle.generator_v) staged.generator_v = stage_generator(g, *bundle.generator_v);
    if (bundle.generator_tp) staged.generator_tp = stage_generator(g, *bundle.generator_tp);
    if (bundle.discriminator_v)
        staged.discriminator_v = stage_discriminator(g, *bundle.discriminator_v);
    if (bundle.discriminator_tp)
        staged.discriminator_tp = stage_discriminator(g, *bundle.discriminator_tp);
    staged.classifier = stage_classifier(g, bundle.classifier);
    return staged;
}

namespace {

// Stacks row t of each sample's [T x D] block into one [B x D] step block.
std::vector<Tensor> stack_steps(const std::vector<const Tensor*>& samples, std::size_t steps,
                                std::size_t dim) {
    std::vector<Tensor> blocks;
    blocks.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        Tensor block({samples.size(), dim});
        for (std::size_t i = 0; i < samples.size(); ++i)
            for (std::size_t d = 0; d < dim; ++d) block.at(i, d) = samples[i]->at(t, d);
        blocks.push_back(std::move(block));
    }
    return blocks;
}

} // namespace

BatchData make_batch(const DatasetManifest& manifest, const std::vector<std::size_t>& indices,
                     const SplitSpec& spec) {
    if (indices.empty()) throw ShapeError("make_batch: empty index list");

    std::vector<SplitResult> splits;
    splits.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= manifest.records.size())
            throw ShapeError("make_batch: record index " + std::to_string(idx) +
                             " out of range (have " + std::to_string(manifest.records.size()) +
                             " records)");
        splits.push_back(split_observed_future(manifest.records[idx], spec));
    }

    const std::size_t observed = splits.front().observed_visual.rows();
    const std::size_t horizon = splits.front().future_visual.rows();
    const std::size_t dim = splits.front().observed_visual.cols();
    for (std::size_t i = 1; i < splits.size(); ++i) {
        if (splits[i].observed_visual.rows() != observed ||
            splits[i].future_visual.rows() != horizon ||
            splits[i].observed_visual.cols() != dim)
            throw ShapeError("make_batch: record \"" + manifest.records[indices[i]].id +
                             "\" splits to a different shape than the first record; set a "
                             "resample length to batch variable-length records");
    }

    BatchData batch;
    batch.batch = splits.size();
    std::vector<const Tensor*> view(splits.size());

    for (std::size_t i = 0; i < splits.size(); ++i) view[i] = &splits[i].observed_visual;
    batch.observed_visual = stack_steps(view, observed, dim);
    for (std::size_t i = 0; i < splits.size(); ++i) view[i] = &splits[i].observed_temporal;
    batch.observed_temporal = stack_steps(view, observed, dim);
    for (std::size_t i = 0; i < splits.size(); ++i) view[i] = &splits[i].future_visual;
    batch.future_visual = stack_steps(view, horizon, dim);
    for (std::size_t i = 0; i < splits.size(); ++i) view[i] = &splits[i].future_temporal;
    batch.future_temporal = stack_steps(view, horizon, dim);

    batch.labels.reserve(splits.size());
    for (const SplitResult& s : splits) batch.labels.push_back(s.label);
    return batch;
}

std::vector<Var> stage_batch_steps(Graph& g, const std::vector<Tensor>& blocks) {
    std::vector<Var> steps;
    steps.reserve(blocks.size());
    for (const Tensor& block : blocks) steps.push_back(g.constant(block));
    return steps;
}

ContextPipeline build_context_pipeline(Graph& g, const StagedModel& staged,
                                       const ModelBundle& bundle,
                                       const std::vector<Var>& visual_steps,
                                       const std::vector<Var>& temporal_steps) {
    const VariantSpec& variant = bundle.variant;
    if (variant.use_visual && variant.use_temporal &&
        visual_steps.size() != temporal_steps.size())
        throw ShapeError("context pipeline: " + std::to_string(visual_steps.size()) +
                         " visual steps vs " + std::to_string(temporal_steps.size()) +
                         " temporal steps");

    std::vector<LstmState> states_v, states_tp;
    if (variant.use_visual) states_v = lstm_unroll(g, *staged.encoder_v, visual_steps);
    if (variant.use_temporal) states_tp = lstm_unroll(g, *staged.encoder_tp, temporal_steps);

    ContextPipeline out;
    const std::size_t steps = variant.use_visual ? states_v.size() : states_tp.size();
    out.context_steps.reserve(steps);

    for (std::size_t t = 0; t < steps; ++t) {
        if (variant.single_stream()) {
            out.context_steps.push_back(variant.use_visual ? states_v[t].h : states_tp[t].h);
        } else if (!variant.use_attention) {
            out.context_steps.push_back(g.concat_cols(states_v[t].h, states_tp[t].h));
        } else {
            FusedStep fused = attention_fuse_step(g, *staged.attention, states_v[t].h,
                                                  states_tp[t].h, bundle.strict_attention);
            out.context_steps.push_back(fused.context);
            out.alpha_v.push_back(fused.alpha_v);
            out.alpha_tp.push_back(fused.alpha_tp);
        }
    }
    return out;
}

std::vector<Var> classifier_input_steps(Graph& g, const StagedModel& staged,
                                        const ModelBundle& bundle,
                                        const ContextPipeline& context, std::size_t horizon) {
    const VariantSpec& variant = bundle.variant;
    if (!variant.two_stage()) return context.context_steps;

    std::vector<Var> gen_v, gen_tp;
    if (variant.use_visual)
        gen_v = generator_unroll(g, *staged.generator_v, context.context_steps, horizon);
    if (variant.use_temporal)
        gen_tp = generator_unroll(g, *staged.generator_tp, context.context_steps, horizon);

    if (variant.single_stream()) return variant.use_visual ? gen_v : gen_tp;

    std::vector<Var> joined;
    joined.reserve(gen_v.size());
    for (std::size_t t = 0; t < gen_v.size(); ++t)
        joined.push_back(g.concat_cols(gen_v[t], gen_tp[t]));
    return joined;
}

} // namespace aagan
