#include "aagan/attention.hpp"

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

EnergyMlpParams init_energy(std::size_t hidden_dim, std::size_t energy_hidden, Rng& rng) {
    EnergyMlpParams m;
    if (energy_hidden > 0) {
        m.w1 = uniform_init(rng, {hidden_dim, energy_hidden}, hidden_dim);
        m.b1 = Tensor({1, energy_hidden});
        m.w2 = uniform_init(rng, {energy_hidden, 1}, energy_hidden);
    } else {
        m.w2 = uniform_init(rng, {hidden_dim, 1}, hidden_dim);
    }
    m.b2 = Tensor({1, 1});
    return m;
}

void collect_energy(EnergyMlpParams& m, std::vector<Tensor*>& out) {
    if (!m.w1.empty()) {
        out.push_back(&m.w1);
        out.push_back(&m.b1);
    }
    out.push_back(&m.w2);
    out.push_back(&m.b2);
}

void collect_energy(const EnergyMlpParams& m, std::vector<const Tensor*>& out) {
    if (!m.w1.empty()) {
        out.push_back(&m.w1);
        out.push_back(&m.b1);
    }
    out.push_back(&m.w2);
    out.push_back(&m.b2);
}

EnergyMlpVars stage_energy(Graph& g, EnergyMlpParams& m, bool trainable,
                           ParamRegistry* registry) {
    EnergyMlpVars vars;
    auto put = [&](Tensor& t) {
        const Var v = g.leaf(t, trainable);
        if (trainable && registry) registry->emplace_back(&t, v);
        return v;
    };
    if (!m.w1.empty()) {
        vars.w1 = put(m.w1);
        vars.b1 = put(m.b1);
    }
    vars.w2 = put(m.w2);
    vars.b2 = put(m.b2);
    return vars;
}

EnergyMlpVars stage_energy(Graph& g, const EnergyMlpParams& m) {
    EnergyMlpVars vars;
    if (!m.w1.empty()) {
        vars.w1 = g.constant(m.w1);
        vars.b1 = g.constant(m.b1);
    }
    vars.w2 = g.constant(m.w2);
    vars.b2 = g.constant(m.b2);
    return vars;
}

} // namespace

AttentionParams AttentionParams::init(std::size_t hidden_dim, std::size_t energy_hidden,
                                      Rng& rng) {
    if (hidden_dim == 0) throw ConfigError("attention: hidden dim must be positive");
    AttentionParams p;
    p.hidden_dim = hidden_dim;
    p.energy_hidden = energy_hidden;
    p.visual = init_energy(hidden_dim, energy_hidden, rng);
    p.temporal = init_energy(hidden_dim, energy_hidden, rng);
    p.combiner_w = uniform_init(rng, {2, 1}, 2);
    p.combiner_b = Tensor({1, 1});
    return p;
}

void AttentionParams::collect(std::vector<Tensor*>& out) {
    collect_energy(visual, out);
    collect_energy(temporal, out);
    out.push_back(&combiner_w);
    out.push_back(&combiner_b);
}

void AttentionParams::collect(std::vector<const Tensor*>& out) const {
    collect_energy(visual, out);
    collect_energy(temporal, out);
    out.push_back(&combiner_w);
    out.push_back(&combiner_b);
}

std::size_t AttentionParams::parameter_count() const {
    std::vector<const Tensor*> all;
    collect(all);
    std::size_t n = 0;
    for (const Tensor* t : all) n += t->size();
    return n;
}

AttentionVars stage_attention(Graph& g, AttentionParams& p, bool trainable,
                              ParamRegistry* registry) {
    AttentionVars vars;
    vars.visual = stage_energy(g, p.visual, trainable, registry);
    vars.temporal = stage_energy(g, p.temporal, trainable, registry);
    vars.combiner_w = g.leaf(p.combiner_w, trainable);
    vars.combiner_b = g.leaf(p.combiner_b, trainable);
    if (trainable && registry) {
        registry->emplace_back(&p.combiner_w, vars.combiner_w);
        registry->emplace_back(&p.combiner_b, vars.combiner_b);
    }
    vars.has_hidden = p.energy_hidden > 0;
    return vars;
}

AttentionVars stage_attention(Graph& g, const AttentionParams& p) {
    AttentionVars vars;
    vars.visual = stage_energy(g, p.visual);
    vars.temporal = stage_energy(g, p.temporal);
    vars.combiner_w = g.constant(p.combiner_w);
    vars.combiner_b = g.constant(p.combiner_b);
    vars.has_hidden = p.energy_hidden > 0;
    return vars;
}

Var attention_energy(Graph& g, const EnergyMlpVars& mlp, bool has_hidden, Var h) {
    Var z = h;
    if (has_hidden) z = g.tanh(g.add_row(g.matmul(z, mlp.w1), mlp.b1));
    return g.tanh(g.add_row(g.matmul(z, mlp.w2), mlp.b2));
}

FusedStep attention_fuse_step(Graph& g, const AttentionVars& vars, Var h_v, Var h_tp,
                              bool strict) {
    FusedStep step;
    step.e_v = attention_energy(g, vars.visual, vars.has_hidden, h_v);
    step.e_tp = attention_energy(g, vars.temporal, vars.has_hidden, strict ? h_v : h_tp);

    const Var pair = g.concat_cols(step.e_v, step.e_tp);
    step.alpha_v = g.sigmoid(g.add_row(g.matmul(pair, vars.combiner_w), vars.combiner_b));
    step.alpha_tp = g.affine(step.alpha_v, -1.0, 1.0);

    const Var second = strict ? h_v : h_tp;
    step.context = g.concat_cols(g.scale_rows(h_v, step.alpha_v),
                                 g.scale_rows(second, step.alpha_tp));
    return step;
}

std::pair<double, double> attention_energies(const Tensor& h_v, const Tensor& h_tp,
                                             const AttentionParams& params, bool strict) {
    if (h_v.size() != params.hidden_dim || h_tp.size() != params.hidden_dim)
        throw ShapeError("attention energies: hidden states " + h_v.shape_str() + " and " +
                         h_tp.shape_str() + " do not match H=" +
                         std::to_string(params.hidden_dim));
    Graph g;
    const AttentionVars vars = stage_attention(g, params);
    const Var hv = g.constant(Tensor({1, params.hidden_dim}, h_v.values()));
    const Var htp = g.constant(Tensor({1, params.hidden_dim}, h_tp.values()));
    const Var ev = attention_energy(g, vars.visual, vars.has_hidden, hv);
    const Var etp = attention_energy(g, vars.temporal, vars.has_hidden, strict ? hv : htp);
    return {g.value(ev)[0], g.value(etp)[0]};
}

std::pair<double, double> attention_weights(double e_v, double e_tp,
                                            const AttentionParams& params) {
    Graph g;
    const Var pair = g.constant(Tensor({1, 2}, {e_v, e_tp}));
    const Var pre = g.add_row(g.matmul(pair, g.constant(params.combiner_w)),
                              g.constant(params.combiner_b));
    const double alpha_v = g.value(g.sigmoid(pre))[0];
    return {alpha_v, 1.0 - alpha_v};
}

ContextDescriptor fuse_context(const Tensor& h_v, const Tensor& h_tp,
                               const std::vector<double>& alpha_v,
                               const std::vector<double>& alpha_tp, bool strict) {
    require_same_shape(h_v, h_tp, "fuse_context");
    const std::size_t t_len = h_v.rows(), hidden = h_v.cols();
    if (alpha_v.size() != t_len || alpha_tp.size() != t_len)
        throw ShapeError("fuse_context: " + std::to_string(alpha_v.size()) + " weights for " +
                         std::to_string(t_len) + " timesteps");

    ContextDescriptor out;
    out.context = Tensor({t_len, 2 * hidden});
    out.alpha_v = alpha_v;
    out.alpha_tp = alpha_tp;
    const Tensor& second = strict ? h_v : h_tp;
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t j = 0; j < hidden; ++j) {
            out.context.at(t, j) = alpha_v[t] * h_v.at(t, j);
            out.context.at(t, hidden + j) = alpha_tp[t] * second.at(t, j);
        }
    return out;
}

ContextDescriptor build_context(const Tensor& h_v, const Tensor& h_tp,
                                const AttentionParams& params, bool strict) {
    require_same_shape(h_v, h_tp, "build_context");
    const std::size_t t_len = h_v.rows(), hidden = h_v.cols();
    std::vector<double> av(t_len), atp(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        Tensor hv({hidden});
        Tensor htp({hidden});
        for (std::size_t j = 0; j < hidden; ++j) {
            hv[j] = h_v.at(t, j);
            htp[j] = h_tp.at(t, j);
        }
        const auto [ev, etp] = attention_energies(hv, htp, params, strict);
        const auto [a_v, a_tp] = attention_weights(ev, etp, params);
        av[t] = a_v;
        atp[t] = a_tp;
    }
    return fuse_context(h_v, h_tp, av, atp, strict);
}

} // namespace aagan
