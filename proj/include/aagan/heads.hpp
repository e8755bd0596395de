#ifndef AAGAN_HEADS_HPP
#define AAGAN_HEADS_HPP

#include <cstddef>
#include <vector>

#include "aagan/attention.hpp"
#include "aagan/graph.hpp"
#include "aagan/lstm.hpp"
#include "aagan/rng.hpp"
#include "aagan/tensor.hpp"

namespace aagan {

// Future-embedding synthesizer: two stacked recurrent layers over the
// context sequence, then a per-timestep affine map to feature dimension D.
struct GeneratorParams {
    std::size_t context_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t feature_dim = 0;
    LstmParams layer1, layer2;
    Tensor w_out, b_out; // [H x D], [1 x D]

    static GeneratorParams init(std::size_t context_dim, std::size_t hidden_dim,
                                std::size_t feature_dim, Rng& rng);
    void collect(std::vector<Tensor*>& out);
    void collect(std::vector<const Tensor*>& out) const;
    std::size_t parameter_count() const;
};

struct GeneratorVars {
    LstmVars layer1, layer2;
    Var w_out, b_out;
};

GeneratorVars stage_generator(Graph& g, GeneratorParams& p, bool trainable,
                              ParamRegistry* registry = nullptr);
GeneratorVars stage_generator(Graph& g, const GeneratorParams& p);

// Batched unroll over context blocks [B x 2H]; emits `horizon` future
// feature blocks [B x D]. Horizons past the context length keep unrolling
// on zero input blocks.
std::vector<Var> generator_unroll(Graph& g, const GeneratorVars& vars,
                                  const std::vector<Var>& context_steps, std::size_t horizon);

// Single-sample form: context [T x 2H] -> predicted futures [horizon x D].
Tensor generator_forward(const Tensor& context, const GeneratorParams& params,
                         std::size_t horizon = 0); // 0: match context length

// Real/fake judge: one recurrent layer over the context, one over the
// candidate future sequence, final hidden states concatenated into a
// two-layer affine head ending in a sigmoid.
struct DiscriminatorParams {
    std::size_t context_dim = 0;
    std::size_t feature_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t head_hidden = 0;
    LstmParams context_lstm, candidate_lstm;
    Tensor w1, b1; // [2H x F], [1 x F]
    Tensor w2, b2; // [F x 1], [1 x 1]

    static DiscriminatorParams init(std::size_t context_dim, std::size_t feature_dim,
                                    std::size_t hidden_dim, std::size_t head_hidden, Rng& rng);
    void collect(std::vector<Tensor*>& out);
    void collect(std::vector<const Tensor*>& out) const;
    std::size_t parameter_count() const;
};

struct DiscriminatorVars {
    LstmVars context_lstm, candidate_lstm;
    Var w1, b1, w2, b2;
};

DiscriminatorVars stage_discriminator(Graph& g, DiscriminatorParams& p, bool trainable,
                                      ParamRegistry* registry = nullptr);
DiscriminatorVars stage_discriminator(Graph& g, const DiscriminatorParams& p);

// Per-step probabilities [B x 1] that the candidate prefix 1..j is a real
// future for this context. The context is fully consumed first; its final
// hidden state conditions every step of the candidate scan.
std::vector<Var> discriminator_scores(Graph& g, const DiscriminatorVars& vars,
                                      const std::vector<Var>& context_steps,
                                      const std::vector<Var>& candidate_steps);

// Single-sample judgment of the whole candidate sequence: the last per-step
// score.
double discriminator_forward(const Tensor& context, const Tensor& candidate,
                             const DiscriminatorParams& params);

// Action classifier: one recurrent layer over the input sequence plus an
// affine map to K class logits per timestep.
struct ClassifierParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t num_classes = 0;
    LstmParams lstm;
    Tensor w_out, b_out; // [H x K], [1 x K]

    static ClassifierParams init(std::size_t input_dim, std::size_t hidden_dim,
                                 std::size_t num_classes, Rng& rng);
    void collect(std::vector<Tensor*>& out);
    void collect(std::vector<const Tensor*>& out) const;
    std::size_t parameter_count() const;
};

struct ClassifierVars {
    LstmVars lstm;
    Var w_out, b_out;
};

ClassifierVars stage_classifier(Graph& g, ClassifierParams& p, bool trainable,
                                ParamRegistry* registry = nullptr);
ClassifierVars stage_classifier(Graph& g, const ClassifierParams& p);

// Per-step class logits [B x K] over input blocks.
std::vector<Var> classifier_logits(Graph& g, const ClassifierVars& vars,
                                   const std::vector<Var>& input_steps);

struct ClassifierOutput {
    Tensor step_distributions; // [T x K], each row sums to 1
    std::vector<double> final_distribution;
    std::size_t predicted = 0; // argmax of mean log-probabilities, low index wins ties
};

// Single-sample classification of a full sequence.
ClassifierOutput classifier_forward(const Tensor& input, const ClassifierParams& params);

// The sequence vote used everywhere a single prediction is needed:
// argmax over classes of the per-step mean log-probability; ties resolve to
// the lowest class index. Also emits the renormalized geometric-mean vote.
std::size_t vote_from_distributions(const Tensor& step_distributions,
                                    std::vector<double>* final_distribution = nullptr);

} // namespace aagan

#endif
