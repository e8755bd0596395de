#include "aagan/lstm.hpp"

#include <cmath>
#include <string>

#include "aagan/errors.hpp"

namespace aagan {

namespace {

Tensor uniform_init(Rng& rng, std::vector<std::size_t> shape, std::size_t fan_in) {
    Tensor t(std::move(shape));
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.values()) v = rng.uniform(-s, s);
    return t;
}

} // namespace

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0)
        throw ConfigError("lstm: dimensions must be positive, got input " +
                          std::to_string(input_dim) + ", hidden " + std::to_string(hidden_dim));
    LstmParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    for (int gate = 0; gate < 4; ++gate) {
        p.w[gate] = uniform_init(rng, {input_dim, hidden_dim}, input_dim);
        p.u[gate] = uniform_init(rng, {hidden_dim, hidden_dim}, hidden_dim);
        p.b[gate] = Tensor({1, hidden_dim});
    }
    return p;
}

void LstmParams::collect(std::vector<Tensor*>& out) {
    for (int gate = 0; gate < 4; ++gate) {
        out.push_back(&w[gate]);
        out.push_back(&u[gate]);
        out.push_back(&b[gate]);
    }
}

void LstmParams::collect(std::vector<const Tensor*>& out) const {
    for (int gate = 0; gate < 4; ++gate) {
        out.push_back(&w[gate]);
        out.push_back(&u[gate]);
        out.push_back(&b[gate]);
    }
}

std::size_t LstmParams::parameter_count() const {
    std::size_t n = 0;
    for (int gate = 0; gate < 4; ++gate) n += w[gate].size() + u[gate].size() + b[gate].size();
    return n;
}

LstmVars stage_lstm(Graph& g, LstmParams& p, bool trainable, ParamRegistry* registry) {
    LstmVars vars;
    for (int gate = 0; gate < 4; ++gate) {
        vars.w[gate] = g.leaf(p.w[gate], trainable);
        vars.u[gate] = g.leaf(p.u[gate], trainable);
        vars.b[gate] = g.leaf(p.b[gate], trainable);
        if (trainable && registry) {
            registry->emplace_back(&p.w[gate], vars.w[gate]);
            registry->emplace_back(&p.u[gate], vars.u[gate]);
            registry->emplace_back(&p.b[gate], vars.b[gate]);
        }
    }
    return vars;
}

LstmVars stage_lstm(Graph& g, const LstmParams& p) {
    LstmVars vars;
    for (int gate = 0; gate < 4; ++gate) {
        vars.w[gate] = g.constant(p.w[gate]);
        vars.u[gate] = g.constant(p.u[gate]);
        vars.b[gate] = g.constant(p.b[gate]);
    }
    return vars;
}

LstmState lstm_zero_state(Graph& g, std::size_t batch, std::size_t hidden) {
    LstmState s;
    s.h = g.constant(Tensor({batch, hidden}));
    s.c = g.constant(Tensor({batch, hidden}));
    return s;
}

LstmState lstm_step(Graph& g, const LstmVars& vars, Var x, const LstmState& prev) {
    auto gate_pre = [&](int gate) {
        return g.add_row(g.add(g.matmul(x, vars.w[gate]), g.matmul(prev.h, vars.u[gate])),
                         vars.b[gate]);
    };
    const Var in_gate = g.sigmoid(gate_pre(0));
    const Var forget_gate = g.sigmoid(gate_pre(1));
    const Var candidate = g.tanh(gate_pre(2));
    const Var out_gate = g.sigmoid(gate_pre(3));

    LstmState next;
    next.c = g.add(g.mul(forget_gate, prev.c), g.mul(in_gate, candidate));
    next.h = g.mul(out_gate, g.tanh(next.c));
    return next;
}

std::vector<LstmState> lstm_unroll(Graph& g, const LstmVars& vars, const std::vector<Var>& xs) {
    if (xs.empty()) throw ShapeError("lstm: cannot encode an empty sequence");
    const std::size_t batch = g.value(xs[0]).rows();
    const std::size_t hidden = g.value(vars.u[0]).rows();
    std::vector<LstmState> states;
    states.reserve(xs.size());
    LstmState state = lstm_zero_state(g, batch, hidden);
    for (Var x : xs) {
        state = lstm_step(g, vars, x, state);
        states.push_back(state);
    }
    return states;
}

std::vector<Var> stage_sample_steps(Graph& g, const Tensor& sequence) {
    const std::size_t t_len = sequence.rows(), dim = sequence.cols();
    if (sequence.size() == 0 || t_len == 0)
        throw ShapeError("cannot stage an empty sequence");
    std::vector<Var> steps;
    steps.reserve(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        Tensor row({1, dim});
        for (std::size_t j = 0; j < dim; ++j) row[j] = sequence.at(t, j);
        steps.push_back(g.constant(std::move(row)));
    }
    return steps;
}

Tensor gather_rows(const Graph& g, const std::vector<Var>& rows) {
    const std::size_t dim = g.value(rows[0]).size();
    Tensor out({rows.size(), dim});
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const Tensor& row = g.value(rows[t]);
        for (std::size_t j = 0; j < dim; ++j) out.at(t, j) = row[j];
    }
    return out;
}

Tensor encode_stream(const Tensor& features, const LstmParams& params) {
    if (features.rank() != 2 || features.cols() != params.input_dim)
        throw ShapeError("encode_stream: features " + features.shape_str() +
                         " do not match input dim " + std::to_string(params.input_dim));
    Graph g;
    const LstmVars vars = stage_lstm(g, params);
    const std::vector<Var> xs = stage_sample_steps(g, features);
    const std::vector<LstmState> states = lstm_unroll(g, vars, xs);
    std::vector<Var> hs;
    hs.reserve(states.size());
    for (const LstmState& s : states) hs.push_back(s.h);
    return gather_rows(g, hs);
}

} // namespace aagan
