#ifndef AAGAN_MODEL_HPP
#define AAGAN_MODEL_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "aagan/attention.hpp"
#include "aagan/config.hpp"
#include "aagan/data.hpp"
#include "aagan/graph.hpp"
#include "aagan/heads.hpp"
#include "aagan/lstm.hpp"
#include "aagan/rng.hpp"

namespace aagan {

// Structural description of one model variant. The full model enables
// everything; ablations strip streams, attention, synthesis, adversarial
// training, joint training, or the alignment regularizer.
struct VariantSpec {
    std::string id;
    bool use_visual = true;
    bool use_temporal = true;
    bool use_attention = true;
    bool generators = true;   // any future synthesis at all
    bool adversarial = true;  // judges + adversarial objectives (else MSE)
    bool joint = true;        // false: synthesis first, classifier second
    bool regularizer = true;  // exponential cosine alignment term

    bool single_stream() const { return use_visual != use_temporal; }
    bool two_stage() const { return generators && !joint; }
};

// Valid ids: "a".."o" and "full". Throws ConfigError otherwise.
VariantSpec variant_spec(const std::string& id);
const std::vector<std::string>& all_variant_ids();

std::size_t context_width(const VariantSpec& variant, std::size_t hidden_dim);
std::size_t classifier_input_width(const VariantSpec& variant, std::size_t hidden_dim,
                                   std::size_t feature_dim);

// Every parameter struct of one model instance. Absent parts reflect the
// variant. Parameter order for serialization and optimizer state is the
// declaration order below, skipping absent parts.
struct ModelBundle {
    VariantSpec variant;
    std::size_t feature_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t num_classes = 0;
    bool strict_attention = false;

    std::optional<LstmParams> encoder_v, encoder_tp;
    std::optional<AttentionParams> attention;
    std::optional<GeneratorParams> generator_v, generator_tp;
    std::optional<DiscriminatorParams> discriminator_v, discriminator_tp;
    ClassifierParams classifier;

    void collect(std::vector<Tensor*>& out);
    void collect(std::vector<const Tensor*>& out) const;
    std::size_t parameter_count() const;
};

ModelBundle build_model(const VariantSpec& variant, std::size_t feature_dim,
                        std::size_t num_classes, const TrainConfig& config, Rng& rng);

// Which parts a staging pass marks trainable.
enum PartMask : unsigned {
    kPartEncoders = 1u,
    kPartAttention = 2u,
    kPartGenerators = 4u,
    kPartDiscriminators = 8u,
    kPartClassifier = 16u,
    kPartAll = 31u,
    kPartNone = 0u,
};

struct StagedModel {
    std::optional<LstmVars> encoder_v, encoder_tp;
    std::optional<AttentionVars> attention;
    std::optional<GeneratorVars> generator_v, generator_tp;
    std::optional<DiscriminatorVars> discriminator_v, discriminator_tp;
    ClassifierVars classifier;
};

StagedModel stage_model(Graph& g, ModelBundle& bundle, unsigned trainable_mask,
                        ParamRegistry* registry);
StagedModel stage_model(Graph& g, const ModelBundle& bundle); // all constant

// One training batch as per-timestep blocks, samples stacked along rows.
struct BatchData {
    std::vector<Tensor> observed_visual, observed_temporal; // T blocks [B x D]
    std::vector<Tensor> future_visual, future_temporal;     // H blocks [B x D]
    std::vector<std::size_t> labels;
    std::size_t batch = 0;
};

BatchData make_batch(const DatasetManifest& manifest, const std::vector<std::size_t>& indices,
                     const SplitSpec& spec);

std::vector<Var> stage_batch_steps(Graph& g, const std::vector<Tensor>& blocks);

// Stream encoders plus the variant's combination rule, batched. Per-step
// context blocks are [B x context_width]; attention weights are emitted only
// when the variant fuses with attention.
struct ContextPipeline {
    std::vector<Var> context_steps;
    std::vector<Var> alpha_v, alpha_tp; // [B x 1] per step
};

ContextPipeline build_context_pipeline(Graph& g, const StagedModel& staged,
                                       const ModelBundle& bundle,
                                       const std::vector<Var>& visual_steps,
                                       const std::vector<Var>& temporal_steps);

// The classifier's per-step input blocks: context steps for joint variants,
// synthesized future embeddings for two-stage variants.
std::vector<Var> classifier_input_steps(Graph& g, const StagedModel& staged,
                                        const ModelBundle& bundle,
                                        const ContextPipeline& context, std::size_t horizon);

} // namespace aagan

#endif
