#ifndef AAGAN_ATTENTION_HPP
#define AAGAN_ATTENTION_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "aagan/graph.hpp"
#include "aagan/lstm.hpp"
#include "aagan/rng.hpp"
#include "aagan/tensor.hpp"

namespace aagan {

// Per-stream energy perceptron, H -> scalar. hidden_width 0 collapses it to
// a single affine map; otherwise one tanh hidden layer of that width.
struct EnergyMlpParams {
    Tensor w1, b1; // [H x E], [1 x E]; empty when linear
    Tensor w2, b2; // [H or E x 1], [1 x 1]
};

struct AttentionParams {
    std::size_t hidden_dim = 0;
    std::size_t energy_hidden = 0;
    EnergyMlpParams visual;
    EnergyMlpParams temporal;
    Tensor combiner_w; // [2 x 1], maps the energy pair to one pre-activation
    Tensor combiner_b; // [1 x 1]

    static AttentionParams init(std::size_t hidden_dim, std::size_t energy_hidden, Rng& rng);

    void collect(std::vector<Tensor*>& out);
    void collect(std::vector<const Tensor*>& out) const;
    std::size_t parameter_count() const;
};

struct EnergyMlpVars {
    Var w1, b1, w2, b2;
};

struct AttentionVars {
    EnergyMlpVars visual, temporal;
    Var combiner_w, combiner_b;
    bool has_hidden = false;
};

AttentionVars stage_attention(Graph& g, AttentionParams& p, bool trainable,
                              ParamRegistry* registry = nullptr);
AttentionVars stage_attention(Graph& g, const AttentionParams& p);

// tanh-bounded scalar energy per batch row: [B x H] -> [B x 1].
Var attention_energy(Graph& g, const EnergyMlpVars& mlp, bool has_hidden, Var h);

struct FusedStep {
    Var context;  // [B x 2H]
    Var alpha_v;  // [B x 1]
    Var alpha_tp; // [B x 1]
    Var e_v, e_tp;
};

// One fused timestep. Strict mode derives the temporal energy and the
// second context half from the visual hidden state as well, matching the
// original formulation to the letter.
FusedStep attention_fuse_step(Graph& g, const AttentionVars& vars, Var h_v, Var h_tp,
                              bool strict = false);

// Single-sample entry points mirroring the batched path bit for bit.
std::pair<double, double> attention_energies(const Tensor& h_v, const Tensor& h_tp,
                                             const AttentionParams& params,
                                             bool strict = false);
std::pair<double, double> attention_weights(double e_v, double e_tp,
                                            const AttentionParams& params);

struct ContextDescriptor {
    Tensor context; // [T x 2H]
    std::vector<double> alpha_v, alpha_tp;
};

ContextDescriptor fuse_context(const Tensor& h_v, const Tensor& h_tp,
                               const std::vector<double>& alpha_v,
                               const std::vector<double>& alpha_tp, bool strict = false);

// energies -> weights -> fusion for every timestep of one sample.
ContextDescriptor build_context(const Tensor& h_v, const Tensor& h_tp,
                                const AttentionParams& params, bool strict = false);

} // namespace aagan

#endif
