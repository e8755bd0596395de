#ifndef AAGAN_LSTM_HPP
#define AAGAN_LSTM_HPP

#include <cstddef>
#include <vector>

#include "aagan/graph.hpp"
#include "aagan/rng.hpp"
#include "aagan/tensor.hpp"

namespace aagan {

// Standard gated cell: forget gate, no peepholes, zero initial state.
// Gate order everywhere: input, forget, cell candidate, output.
struct LstmParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Tensor w[4]; // input-to-gate, [D_in x H]
    Tensor u[4]; // hidden-to-gate, [H x H]
    Tensor b[4]; // [1 x H]

    // Weights uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per matrix; biases zero.
    static LstmParams init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

    void collect(std::vector<Tensor*>& out);
    void collect(std::vector<const Tensor*>& out) const;
    std::size_t parameter_count() const;
};

// Tape handles for one cell's parameters, staged once per graph.
struct LstmVars {
    Var w[4], u[4], b[4];
};

// Trainable staging records (parameter, leaf) pairs so the caller can read
// gradients back and apply updates; constant staging never needs either.
using ParamRegistry = std::vector<std::pair<Tensor*, Var>>;

LstmVars stage_lstm(Graph& g, LstmParams& p, bool trainable, ParamRegistry* registry = nullptr);
LstmVars stage_lstm(Graph& g, const LstmParams& p);

struct LstmState {
    Var h, c; // [B x H] each
};

LstmState lstm_zero_state(Graph& g, std::size_t batch, std::size_t hidden);

// One step over a batch block x: [B x D_in] -> new state.
LstmState lstm_step(Graph& g, const LstmVars& vars, Var x, const LstmState& prev);

// Unrolls over per-timestep input blocks, returning every state.
std::vector<LstmState> lstm_unroll(Graph& g, const LstmVars& vars, const std::vector<Var>& xs);

// Splits a [T x D] sample into per-timestep [1 x D] constant blocks.
std::vector<Var> stage_sample_steps(Graph& g, const Tensor& sequence);

// Gathers per-step [1 x H] hidden states back into a [T x H] matrix.
Tensor gather_rows(const Graph& g, const std::vector<Var>& rows);

// Whole-sequence encoding of a single sample: [T x D_in] -> hidden states [T x H].
Tensor encode_stream(const Tensor& features, const LstmParams& params);

} // namespace aagan

#endif
