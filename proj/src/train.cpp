#include "aagan/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>

#include "aagan/errors.hpp"
#include "aagan/eval.hpp"
#include "aagan/rng.hpp"

namespace aagan {

namespace {

constexpr char kCheckpointMagic[4] = {'A', 'A', 'G', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

unsigned disc_mask(const TrainConfig& config) {
    unsigned mask = kPartDiscriminators;
    if (config.discriminator_updates_context) mask |= kPartEncoders | kPartAttention;
    return mask;
}

unsigned main_mask(const VariantSpec& variant) {
    unsigned mask = kPartEncoders | kPartAttention | kPartGenerators;
    if (variant.joint) mask |= kPartClassifier;
    return mask;
}

// Mirrors stage_model's staging order so optimizer state built from this
// list aligns pairwise with a phase's registry.
std::vector<Tensor*> collect_masked(ModelBundle& bundle, unsigned mask) {
    std::vector<Tensor*> out;
    if (mask & kPartEncoders) {
        if (bundle.encoder_v) bundle.encoder_v->collect(out);
        if (bundle.encoder_tp) bundle.encoder_tp->collect(out);
    }
    if ((mask & kPartAttention) && bundle.attention) bundle.attention->collect(out);
    if (mask & kPartGenerators) {
        if (bundle.generator_v) bundle.generator_v->collect(out);
        if (bundle.generator_tp) bundle.generator_tp->collect(out);
    }
    if (mask & kPartDiscriminators) {
        if (bundle.discriminator_v) bundle.discriminator_v->collect(out);
        if (bundle.discriminator_tp) bundle.discriminator_tp->collect(out);
    }
    if (mask & kPartClassifier) bundle.classifier.collect(out);
    return out;
}

std::vector<std::vector<std::size_t>> shapes_of(const std::vector<Tensor*>& params) {
    std::vector<std::vector<std::size_t>> shapes;
    shapes.reserve(params.size());
    for (const Tensor* t : params) shapes.push_back(t->shape());
    return shapes;
}

// Staging collect_masked's mask through stage_model must yield the same
// parameter sequence; a mismatch is an internal wiring bug.
void require_aligned(const ParamRegistry& registry, const AdamState& state) {
    if (registry.size() != state.m.size())
        throw ShapeError("optimizer group holds " + std::to_string(state.m.size()) +
                         " tensors but the staged phase registered " +
                         std::to_string(registry.size()));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    put_u64(out, bits);
}

void put_tensor(std::string& out, const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t dim : t.shape()) put_u32(out, static_cast<std::uint32_t>(dim));
    for (double v : t.values()) put_f64(out, v);
}

void put_adam(std::string& out, const AdamState& s) {
    put_u64(out, s.step);
    put_u32(out, static_cast<std::uint32_t>(s.m.size()));
    for (std::size_t i = 0; i < s.m.size(); ++i) {
        put_tensor(out, s.m[i]);
        for (double v : s.v[i].values()) put_f64(out, v);
    }
}

struct Cursor {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw IoError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, sizeof d);
        return d;
    }
    Tensor tensor() {
        const std::uint32_t rank = u32();
        if (rank == 0 || rank > 4) throw IoError("checkpoint: implausible tensor rank");
        std::vector<std::size_t> shape(rank);
        std::size_t total = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            shape[i] = u32();
            if (shape[i] == 0 || total > (1u << 28) / shape[i])
                throw IoError("checkpoint: implausible tensor shape");
            total *= shape[i];
        }
        Tensor t(std::move(shape));
        for (std::size_t i = 0; i < total; ++i) t.values()[i] = f64();
        return t;
    }
    AdamState adam() {
        AdamState s;
        s.step = u64();
        const std::uint32_t count = u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            Tensor m = tensor();
            Tensor v(m.shape());
            for (std::size_t j = 0; j < v.size(); ++j) v.values()[j] = f64();
            s.m.push_back(std::move(m));
            s.v.push_back(std::move(v));
        }
        return s;
    }
};

void check_adam_against(const AdamState& loaded, const std::vector<Tensor*>& group,
                        const char* which) {
    if (loaded.m.size() != group.size())
        throw IoError(std::string("checkpoint: ") + which + " optimizer state holds " +
                      std::to_string(loaded.m.size()) + " tensors, model needs " +
                      std::to_string(group.size()));
    for (std::size_t i = 0; i < group.size(); ++i)
        if (loaded.m[i].shape() != group[i]->shape())
            throw IoError(std::string("checkpoint: ") + which +
                          " optimizer tensor shape mismatch at index " + std::to_string(i));
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

Trainer::Trainer(const DatasetManifest& manifest, const TrainConfig& config)
    : manifest_(manifest), config_(config), variant_(variant_spec(config.variant)) {
    validate(config_);
    if (manifest_.train_indices.empty()) throw ConfigError("dataset has no training split");
    if (config_.epoch_eval && manifest_.test_indices.empty())
        throw ConfigError("per-epoch evaluation needs a test split");

    Rng rng(mix_seed(config_.seed, kModelInitTag));
    bundle_ =
        build_model(variant_, manifest_.feature_dim, manifest_.num_classes, config_, rng);

    disc_state_ = AdamState::for_shapes(shapes_of(collect_masked(bundle_, disc_mask(config_))),
                                        config_.learning_rate, config_.decay);
    main_state_ = AdamState::for_shapes(shapes_of(collect_masked(bundle_, main_mask(variant_))),
                                        config_.learning_rate, config_.decay);
    if (variant_.two_stage())
        stage2_state_ =
            AdamState::for_shapes(shapes_of(collect_masked(bundle_, kPartClassifier)),
                                  config_.learning_rate, config_.decay);
}

std::uint64_t Trainer::total_stages() const { return variant_.two_stage() ? 2 : 1; }

std::uint64_t Trainer::steps_per_epoch() const {
    const std::uint64_t n = manifest_.train_indices.size();
    const std::uint64_t b = config_.batch_size;
    return (n + b - 1) / b;
}

bool Trainer::finished() const { return progress_.stage >= total_stages(); }

const std::vector<std::size_t>& Trainer::epoch_order() {
    const std::uint64_t global_epoch = progress_.stage * config_.epochs + progress_.epoch;
    if (order_epoch_ != global_epoch) {
        order_ = manifest_.train_indices;
        Rng rng(mix_seed(config_.seed, kShuffleTagBase + global_epoch));
        rng.shuffle(order_);
        order_epoch_ = global_epoch;
    }
    return order_;
}

std::vector<std::size_t> Trainer::batch_indices() {
    const std::vector<std::size_t>& order = epoch_order();
    const std::size_t start = progress_.step_in_epoch * config_.batch_size;
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    return std::vector<std::size_t>(order.begin() + start, order.begin() + end);
}

void Trainer::check_finite(double value, const char* component) const {
    if (!std::isfinite(value))
        throw NumericError("training step " + std::to_string(progress_.global_step) +
                           ": non-finite " + component + " loss");
}

void Trainer::apply_updates(Graph& g, const ParamRegistry& registry, AdamState& state) {
    require_aligned(registry, state);
    std::vector<Tensor*> params;
    std::vector<const Tensor*> grads;
    params.reserve(registry.size());
    grads.reserve(registry.size());
    for (const auto& [tensor, var] : registry) {
        params.push_back(tensor);
        grads.push_back(&g.grad(var));
    }
    adam_step(state, params, grads);
}

void Trainer::discriminator_phase(const BatchData& batch, LossBreakdown& entry) {
    Graph g;
    ParamRegistry registry;
    StagedModel staged = stage_model(g, bundle_, disc_mask(config_), &registry);

    std::vector<Var> visual, temporal;
    if (variant_.use_visual) visual = stage_batch_steps(g, batch.observed_visual);
    if (variant_.use_temporal) temporal = stage_batch_steps(g, batch.observed_temporal);
    ContextPipeline ctx = build_context_pipeline(g, staged, bundle_, visual, temporal);
    const std::size_t horizon = batch.future_visual.size();

    Var loss;
    if (variant_.use_visual) {
        const std::vector<Var> real = stage_batch_steps(g, batch.future_visual);
        const std::vector<Var> fake =
            generator_unroll(g, *staged.generator_v, ctx.context_steps, horizon);
        const Var obj = discriminator_objective(
            g, discriminator_scores(g, *staged.discriminator_v, ctx.context_steps, real),
            discriminator_scores(g, *staged.discriminator_v, ctx.context_steps, fake));
        entry.visual_adversarial = g.value(obj)[0];
        check_finite(entry.visual_adversarial, "visual adversarial");
        loss = obj;
    }
    if (variant_.use_temporal) {
        const std::vector<Var> real = stage_batch_steps(g, batch.future_temporal);
        const std::vector<Var> fake =
            generator_unroll(g, *staged.generator_tp, ctx.context_steps, horizon);
        const Var obj = discriminator_objective(
            g, discriminator_scores(g, *staged.discriminator_tp, ctx.context_steps, real),
            discriminator_scores(g, *staged.discriminator_tp, ctx.context_steps, fake));
        entry.temporal_adversarial = g.value(obj)[0];
        check_finite(entry.temporal_adversarial, "temporal adversarial");
        loss = loss.valid() ? g.add(loss, obj) : obj;
    }

    g.backward(loss);
    apply_updates(g, registry, disc_state_);
    metrics_.clamp_events += g.clamp_events();
}

void Trainer::main_phase(const BatchData& batch, LossBreakdown& entry) {
    Graph g;
    ParamRegistry registry;
    StagedModel staged = stage_model(g, bundle_, main_mask(variant_), &registry);

    std::vector<Var> visual, temporal;
    if (variant_.use_visual) visual = stage_batch_steps(g, batch.observed_visual);
    if (variant_.use_temporal) temporal = stage_batch_steps(g, batch.observed_temporal);
    ContextPipeline ctx = build_context_pipeline(g, staged, bundle_, visual, temporal);
    const std::size_t horizon = batch.future_visual.size();

    struct Term {
        Var value;
        double weight;
    };
    std::vector<Term> terms;

    if (variant_.generators) {
        const bool need_real = !variant_.adversarial || variant_.regularizer;
        std::vector<Var> fake_v, fake_tp, real_v, real_tp;
        if (variant_.use_visual) {
            fake_v = generator_unroll(g, *staged.generator_v, ctx.context_steps, horizon);
            if (need_real) real_v = stage_batch_steps(g, batch.future_visual);
        }
        if (variant_.use_temporal) {
            fake_tp = generator_unroll(g, *staged.generator_tp, ctx.context_steps, horizon);
            if (need_real) real_tp = stage_batch_steps(g, batch.future_temporal);
        }

        if (variant_.adversarial) {
            if (variant_.use_visual) {
                const Var obj = generator_objective(
                    g, discriminator_scores(g, *staged.discriminator_v, ctx.context_steps, fake_v),
                    config_.non_saturating_generator);
                entry.visual_generator = g.value(obj)[0];
                check_finite(entry.visual_generator, "visual generator");
                terms.push_back({obj, config_.weights.visual});
            }
            if (variant_.use_temporal) {
                const Var obj = generator_objective(
                    g,
                    discriminator_scores(g, *staged.discriminator_tp, ctx.context_steps, fake_tp),
                    config_.non_saturating_generator);
                entry.temporal_generator = g.value(obj)[0];
                check_finite(entry.temporal_generator, "temporal generator");
                terms.push_back({obj, config_.weights.temporal});
            }
        } else {
            if (variant_.use_visual) {
                const Var obj = mse_objective(g, fake_v, real_v);
                entry.visual_adversarial = g.value(obj)[0];
                check_finite(entry.visual_adversarial, "visual synthesis");
                terms.push_back({obj, config_.weights.visual});
            }
            if (variant_.use_temporal) {
                const Var obj = mse_objective(g, fake_tp, real_tp);
                entry.temporal_adversarial = g.value(obj)[0];
                check_finite(entry.temporal_adversarial, "temporal synthesis");
                terms.push_back({obj, config_.weights.temporal});
            }
        }

        if (variant_.regularizer) {
            Var reg;
            if (variant_.use_visual)
                reg = regularization_objective(g, fake_v, real_v, config_.cosine_distance_literal);
            if (variant_.use_temporal) {
                const Var part = regularization_objective(g, fake_tp, real_tp,
                                                          config_.cosine_distance_literal);
                reg = reg.valid() ? g.add(reg, part) : part;
            }
            entry.regularization = g.value(reg)[0];
            check_finite(entry.regularization, "regularization");
            terms.push_back({reg, config_.weights.regularization});
        }
    }

    if (variant_.joint) {
        const std::vector<Var> logits =
            classifier_logits(g, staged.classifier, ctx.context_steps);
        const Var obj = classification_objective(g, logits, batch.labels);
        entry.classification = g.value(obj)[0];
        check_finite(entry.classification, "classification");
        terms.push_back({obj, config_.weights.classification});
    }

    Var loss;
    for (const Term& term : terms) {
        const Var weighted = g.affine(term.value, term.weight, 0.0);
        loss = loss.valid() ? g.add(loss, weighted) : weighted;
    }

    g.backward(loss);
    apply_updates(g, registry, main_state_);
    metrics_.clamp_events += g.clamp_events();
}

void Trainer::classifier_phase(const BatchData& batch, LossBreakdown& entry) {
    Graph g;
    ParamRegistry registry;
    StagedModel staged = stage_model(g, bundle_, kPartClassifier, &registry);

    std::vector<Var> visual, temporal;
    if (variant_.use_visual) visual = stage_batch_steps(g, batch.observed_visual);
    if (variant_.use_temporal) temporal = stage_batch_steps(g, batch.observed_temporal);
    ContextPipeline ctx = build_context_pipeline(g, staged, bundle_, visual, temporal);

    const std::vector<Var> input =
        classifier_input_steps(g, staged, bundle_, ctx, batch.future_visual.size());
    const Var obj =
        classification_objective(g, classifier_logits(g, staged.classifier, input), batch.labels);
    entry.classification = g.value(obj)[0];
    check_finite(entry.classification, "classification");

    g.backward(g.affine(obj, config_.weights.classification, 0.0));
    apply_updates(g, registry, stage2_state_);
    metrics_.clamp_events += g.clamp_events();
}

void Trainer::advance() {
    ++progress_.step_in_epoch;
    ++progress_.global_step;
    if (progress_.step_in_epoch < steps_per_epoch()) return;

    progress_.step_in_epoch = 0;
    if (config_.epoch_eval) {
        metrics_.epoch_train_accuracy.push_back(
            evaluate_subset(bundle_, manifest_, config_.split, manifest_.train_indices, "train")
                .accuracy);
        metrics_.epoch_test_accuracy.push_back(
            evaluate_subset(bundle_, manifest_, config_.split, manifest_.test_indices, "test")
                .accuracy);
    }
    ++progress_.epoch;
    if (progress_.epoch == config_.epochs) {
        progress_.epoch = 0;
        ++progress_.stage;
    }
}

void Trainer::step() {
    if (finished()) return;
    const BatchData batch = make_batch(manifest_, batch_indices(), config_.split);

    LossBreakdown entry;
    if (progress_.stage == 0) {
        if (variant_.adversarial) discriminator_phase(batch, entry);
        main_phase(batch, entry);
    } else {
        classifier_phase(batch, entry);
    }
    entry.total = total_loss(entry.visual_adversarial, entry.temporal_adversarial,
                             entry.classification, entry.regularization, config_.weights);
    check_finite(entry.total, "total");

    metrics_.history.push_back(entry);
    advance();
}

void Trainer::run() {
    while (!finished()) step();
}

void Trainer::save_checkpoint(const std::string& path) const {
    std::string out;
    out.append(kCheckpointMagic, 4);
    put_u32(out, kCheckpointVersion);
    const std::string json = train_config_to_json(config_);
    put_u64(out, config_hash(config_));
    put_u32(out, static_cast<std::uint32_t>(json.size()));
    out += json;
    put_u32(out, static_cast<std::uint32_t>(manifest_.feature_dim));
    put_u32(out, static_cast<std::uint32_t>(manifest_.num_classes));
    put_u64(out, progress_.stage);
    put_u64(out, progress_.epoch);
    put_u64(out, progress_.step_in_epoch);
    put_u64(out, progress_.global_step);
    put_u64(out, metrics_.clamp_events);
    put_adam(out, disc_state_);
    put_adam(out, main_state_);
    put_adam(out, stage2_state_);

    std::vector<const Tensor*> params;
    bundle_.collect(params);
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const Tensor* t : params) put_tensor(out, *t);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size())))
            throw IoError("cannot write checkpoint " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint " + path);
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Cursor in{blob, 0};
    in.need(4);
    if (std::memcmp(blob.data(), kCheckpointMagic, 4) != 0)
        throw IoError("checkpoint: bad magic, not a checkpoint file");
    in.pos = 4;
    const std::uint32_t version = in.u32();
    if (version != kCheckpointVersion)
        throw IoError("checkpoint: unsupported version " + std::to_string(version));

    CheckpointData data;
    const std::uint64_t stored_hash = in.u64();
    const std::uint32_t json_len = in.u32();
    in.need(json_len);
    const std::string json = blob.substr(in.pos, json_len);
    in.pos += json_len;
    try {
        data.config = train_config_from_json(json);
        validate(data.config);
    } catch (const ConfigError& e) {
        throw IoError(std::string("checkpoint: embedded configuration invalid: ") + e.what());
    }
    if (config_hash(data.config) != stored_hash)
        throw IoError("checkpoint: embedded configuration does not match its hash");

    data.feature_dim = in.u32();
    data.num_classes = in.u32();
    if (data.feature_dim == 0 || data.num_classes < 2)
        throw IoError("checkpoint: implausible dataset dimensions");
    data.progress.stage = in.u64();
    data.progress.epoch = in.u64();
    data.progress.step_in_epoch = in.u64();
    data.progress.global_step = in.u64();
    data.clamp_events = in.u64();
    data.disc_state = in.adam();
    data.main_state = in.adam();
    data.stage2_state = in.adam();

    const std::uint32_t param_count = in.u32();
    std::vector<Tensor> params;
    params.reserve(param_count);
    for (std::uint32_t i = 0; i < param_count; ++i) params.push_back(in.tensor());
    if (in.pos != blob.size()) throw IoError("checkpoint: trailing bytes after payload");

    const VariantSpec variant = variant_spec(data.config.variant);
    Rng rng(mix_seed(data.config.seed, kModelInitTag));
    data.bundle =
        build_model(variant, data.feature_dim, data.num_classes, data.config, rng);

    std::vector<Tensor*> slots;
    data.bundle.collect(slots);
    if (slots.size() != params.size())
        throw IoError("checkpoint: holds " + std::to_string(params.size()) +
                      " parameter tensors, model needs " + std::to_string(slots.size()));
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (params[i].shape() != slots[i]->shape())
            throw IoError("checkpoint: parameter shape mismatch at index " + std::to_string(i) +
                          ": " + params[i].shape_str() + " vs " + slots[i]->shape_str());
        *slots[i] = std::move(params[i]);
    }

    const double lr = data.config.learning_rate;
    const double decay = data.config.decay;
    check_adam_against(data.disc_state, collect_masked(data.bundle, disc_mask(data.config)),
                       "discriminator");
    check_adam_against(data.main_state, collect_masked(data.bundle, main_mask(variant)), "main");
    check_adam_against(data.stage2_state,
                       variant.two_stage() ? collect_masked(data.bundle, kPartClassifier)
                                           : std::vector<Tensor*>{},
                       "classifier-stage");
    data.disc_state.learning_rate = data.main_state.learning_rate = lr;
    data.stage2_state.learning_rate = lr;
    data.disc_state.decay = data.main_state.decay = data.stage2_state.decay = decay;
    return data;
}

void Trainer::load_checkpoint(const std::string& path) {
    CheckpointData data = load_checkpoint_file(path);
    if (config_hash(data.config) != config_hash(config_))
        throw ConfigError("checkpoint was written under a different configuration");
    if (data.feature_dim != manifest_.feature_dim || data.num_classes != manifest_.num_classes)
        throw ConfigError("checkpoint dataset dimensions do not match the loaded dataset");

    bundle_ = std::move(data.bundle);
    disc_state_ = std::move(data.disc_state);
    main_state_ = std::move(data.main_state);
    stage2_state_ = std::move(data.stage2_state);
    progress_ = data.progress;
    metrics_ = TrainMetrics{};
    metrics_.clamp_events = data.clamp_events;
    order_epoch_ = static_cast<std::uint64_t>(-1);
}

TrainResult train(const DatasetManifest& manifest, const TrainConfig& config) {
    Trainer trainer(manifest, config);
    trainer.run();
    return TrainResult{trainer.bundle(), trainer.metrics(), trainer.progress()};
}

void write_metrics_csv(const TrainMetrics& metrics, const std::string& path) {
    std::string out = "step,visual_adversarial,temporal_adversarial,classification,"
                      "regularization,visual_generator,temporal_generator,total\n";
    for (std::size_t i = 0; i < metrics.history.size(); ++i) {
        const LossBreakdown& b = metrics.history[i];
        out += std::to_string(i);
        for (double v : {b.visual_adversarial, b.temporal_adversarial, b.classification,
                         b.regularization, b.visual_generator, b.temporal_generator, b.total}) {
            out += ',';
            format_double(out, v);
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size())))
        throw IoError("cannot write metrics " + path);

    if (metrics.epoch_train_accuracy.empty()) return;
    std::string epochs = "epoch,train_accuracy,test_accuracy\n";
    for (std::size_t i = 0; i < metrics.epoch_train_accuracy.size(); ++i) {
        epochs += std::to_string(i);
        epochs += ',';
        format_double(epochs, metrics.epoch_train_accuracy[i]);
        epochs += ',';
        format_double(epochs, metrics.epoch_test_accuracy[i]);
        epochs += '\n';
    }
    const std::string epoch_path = path + ".epochs.csv";
    std::ofstream ef(epoch_path, std::ios::trunc);
    if (!ef || !ef.write(epochs.data(), static_cast<std::streamsize>(epochs.size())))
        throw IoError("cannot write metrics " + epoch_path);
}

} // namespace aagan
