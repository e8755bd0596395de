#include "aagan/heads.hpp"

#include <algorithm>
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

Var stage_param(Graph& g, Tensor& t, bool trainable, ParamRegistry* registry) {
    const Var v = g.leaf(t, trainable);
    if (trainable && registry) registry->emplace_back(&t, v);
    return v;
}

} // namespace

GeneratorParams GeneratorParams::init(std::size_t context_dim, std::size_t hidden_dim,
                                      std::size_t feature_dim, Rng& rng) {
    GeneratorParams p;
    p.context_dim = context_dim;
    p.hidden_dim = hidden_dim;
    p.feature_dim = feature_dim;
    p.layer1 = LstmParams::init(context_dim, hidden_dim, rng);
    p.layer2 = LstmParams::init(hidden_dim, hidden_dim, rng);
    p.w_out = uniform_init(rng, {hidden_dim, feature_dim}, hidden_dim);
    p.b_out = Tensor({1, feature_dim});
    return p;
}

void GeneratorParams::collect(std::vector<Tensor*>& out) {
    layer1.collect(out);
    layer2.collect(out);
    out.push_back(&w_out);
    out.push_back(&b_out);
}

void GeneratorParams::collect(std::vector<const Tensor*>& out) const {
    layer1.collect(out);
    layer2.collect(out);
    out.push_back(&w_out);
    out.push_back(&b_out);
}

std::size_t GeneratorParams::parameter_count() const {
    return layer1.parameter_count() + layer2.parameter_count() + w_out.size() + b_out.size();
}

GeneratorVars stage_generator(Graph& g, GeneratorParams& p, bool trainable,
                              ParamRegistry* registry) {
    GeneratorVars vars;
    vars.layer1 = stage_lstm(g, p.layer1, trainable, registry);
    vars.layer2 = stage_lstm(g, p.layer2, trainable, registry);
    vars.w_out = stage_param(g, p.w_out, trainable, registry);
    vars.b_out = stage_param(g, p.b_out, trainable, registry);
    return vars;
}

GeneratorVars stage_generator(Graph& g, const GeneratorParams& p) {
    GeneratorVars vars;
    vars.layer1 = stage_lstm(g, p.layer1);
    vars.layer2 = stage_lstm(g, p.layer2);
    vars.w_out = g.constant(p.w_out);
    vars.b_out = g.constant(p.b_out);
    return vars;
}

std::vector<Var> generator_unroll(Graph& g, const GeneratorVars& vars,
                                  const std::vector<Var>& context_steps, std::size_t horizon) {
    if (context_steps.empty()) throw ShapeError("generator: empty context sequence");
    if (horizon == 0) horizon = context_steps.size();

    const std::size_t batch = g.value(context_steps[0]).rows();
    const std::size_t context_dim = g.value(context_steps[0]).cols();
    const std::size_t hidden = g.value(vars.layer1.u[0]).rows();

    LstmState s1 = lstm_zero_state(g, batch, hidden);
    LstmState s2 = lstm_zero_state(g, batch, hidden);
    Var zero_block;
    std::vector<Var> outputs;
    outputs.reserve(horizon);
    for (std::size_t j = 0; j < horizon; ++j) {
        Var x;
        if (j < context_steps.size()) {
            x = context_steps[j];
        } else {
            if (!zero_block.valid()) zero_block = g.constant(Tensor({batch, context_dim}));
            x = zero_block;
        }
        s1 = lstm_step(g, vars.layer1, x, s1);
        s2 = lstm_step(g, vars.layer2, s1.h, s2);
        outputs.push_back(g.add_row(g.matmul(s2.h, vars.w_out), vars.b_out));
    }
    return outputs;
}

Tensor generator_forward(const Tensor& context, const GeneratorParams& params,
                         std::size_t horizon) {
    if (context.rank() != 2 || context.cols() != params.context_dim)
        throw ShapeError("generator: context " + context.shape_str() +
                         " does not match context dim " + std::to_string(params.context_dim));
    Graph g;
    const GeneratorVars vars = stage_generator(g, params);
    const std::vector<Var> steps = stage_sample_steps(g, context);
    return gather_rows(g, generator_unroll(g, vars, steps, horizon));
}

DiscriminatorParams DiscriminatorParams::init(std::size_t context_dim, std::size_t feature_dim,
                                              std::size_t hidden_dim, std::size_t head_hidden,
                                              Rng& rng) {
    DiscriminatorParams p;
    p.context_dim = context_dim;
    p.feature_dim = feature_dim;
    p.hidden_dim = hidden_dim;
    p.head_hidden = head_hidden == 0 ? hidden_dim : head_hidden;
    p.context_lstm = LstmParams::init(context_dim, hidden_dim, rng);
    p.candidate_lstm = LstmParams::init(feature_dim, hidden_dim, rng);
    p.w1 = uniform_init(rng, {2 * hidden_dim, p.head_hidden}, 2 * hidden_dim);
    p.b1 = Tensor({1, p.head_hidden});
    p.w2 = uniform_init(rng, {p.head_hidden, 1}, p.head_hidden);
    p.b2 = Tensor({1, 1});
    return p;
}

void DiscriminatorParams::collect(std::vector<Tensor*>& out) {
    context_lstm.collect(out);
    candidate_lstm.collect(out);
    out.push_back(&w1);
    out.push_back(&b1);
    out.push_back(&w2);
    out.push_back(&b2);
}

void DiscriminatorParams::collect(std::vector<const Tensor*>& out) const {
    context_lstm.collect(out);
    candidate_lstm.collect(out);
    out.push_back(&w1);
    out.push_back(&b1);
    out.push_back(&w2);
    out.push_back(&b2);
}

std::size_t DiscriminatorParams::parameter_count() const {
    return context_lstm.parameter_count() + candidate_lstm.parameter_count() + w1.size() +
           b1.size() + w2.size() + b2.size();
}

DiscriminatorVars stage_discriminator(Graph& g, DiscriminatorParams& p, bool trainable,
                                      ParamRegistry* registry) {
    DiscriminatorVars vars;
    vars.context_lstm = stage_lstm(g, p.context_lstm, trainable, registry);
    vars.candidate_lstm = stage_lstm(g, p.candidate_lstm, trainable, registry);
    vars.w1 = stage_param(g, p.w1, trainable, registry);
    vars.b1 = stage_param(g, p.b1, trainable, registry);
    vars.w2 = stage_param(g, p.w2, trainable, registry);
    vars.b2 = stage_param(g, p.b2, trainable, registry);
    return vars;
}

DiscriminatorVars stage_discriminator(Graph& g, const DiscriminatorParams& p) {
    DiscriminatorVars vars;
    vars.context_lstm = stage_lstm(g, p.context_lstm);
    vars.candidate_lstm = stage_lstm(g, p.candidate_lstm);
    vars.w1 = g.constant(p.w1);
    vars.b1 = g.constant(p.b1);
    vars.w2 = g.constant(p.w2);
    vars.b2 = g.constant(p.b2);
    return vars;
}

std::vector<Var> discriminator_scores(Graph& g, const DiscriminatorVars& vars,
                                      const std::vector<Var>& context_steps,
                                      const std::vector<Var>& candidate_steps) {
    if (context_steps.empty() || candidate_steps.empty())
        throw ShapeError("discriminator: empty context or candidate sequence");

    const std::vector<LstmState> ctx = lstm_unroll(g, vars.context_lstm, context_steps);
    const Var ctx_final = ctx.back().h;

    const std::vector<LstmState> cand = lstm_unroll(g, vars.candidate_lstm, candidate_steps);
    std::vector<Var> scores;
    scores.reserve(cand.size());
    for (const LstmState& s : cand) {
        const Var merged = g.concat_cols(ctx_final, s.h);
        const Var hidden = g.tanh(g.add_row(g.matmul(merged, vars.w1), vars.b1));
        scores.push_back(g.sigmoid(g.add_row(g.matmul(hidden, vars.w2), vars.b2)));
    }
    return scores;
}

double discriminator_forward(const Tensor& context, const Tensor& candidate,
                             const DiscriminatorParams& params) {
    if (context.rank() != 2 || context.cols() != params.context_dim)
        throw ShapeError("discriminator: context " + context.shape_str() +
                         " does not match context dim " + std::to_string(params.context_dim));
    if (candidate.rank() != 2 || candidate.cols() != params.feature_dim)
        throw ShapeError("discriminator: candidate " + candidate.shape_str() +
                         " does not match feature dim " + std::to_string(params.feature_dim));
    Graph g;
    const DiscriminatorVars vars = stage_discriminator(g, params);
    const std::vector<Var> scores = discriminator_scores(
        g, vars, stage_sample_steps(g, context), stage_sample_steps(g, candidate));
    return g.value(scores.back())[0];
}

ClassifierParams ClassifierParams::init(std::size_t input_dim, std::size_t hidden_dim,
                                        std::size_t num_classes, Rng& rng) {
    if (num_classes < 2)
        throw ConfigError("classifier: needs at least 2 classes, got " +
                          std::to_string(num_classes));
    ClassifierParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.num_classes = num_classes;
    p.lstm = LstmParams::init(input_dim, hidden_dim, rng);
    p.w_out = uniform_init(rng, {hidden_dim, num_classes}, hidden_dim);
    p.b_out = Tensor({1, num_classes});
    return p;
}

void ClassifierParams::collect(std::vector<Tensor*>& out) {
    lstm.collect(out);
    out.push_back(&w_out);
    out.push_back(&b_out);
}

void ClassifierParams::collect(std::vector<const Tensor*>& out) const {
    lstm.collect(out);
    out.push_back(&w_out);
    out.push_back(&b_out);
}

std::size_t ClassifierParams::parameter_count() const {
    return lstm.parameter_count() + w_out.size() + b_out.size();
}

ClassifierVars stage_classifier(Graph& g, ClassifierParams& p, bool trainable,
                                ParamRegistry* registry) {
    ClassifierVars vars;
    vars.lstm = stage_lstm(g, p.lstm, trainable, registry);
    vars.w_out = stage_param(g, p.w_out, trainable, registry);
    vars.b_out = stage_param(g, p.b_out, trainable, registry);
    return vars;
}

ClassifierVars stage_classifier(Graph& g, const ClassifierParams& p) {
    ClassifierVars vars;
    vars.lstm = stage_lstm(g, p.lstm);
    vars.w_out = g.constant(p.w_out);
    vars.b_out = g.constant(p.b_out);
    return vars;
}

std::vector<Var> classifier_logits(Graph& g, const ClassifierVars& vars,
                                   const std::vector<Var>& input_steps) {
    const std::vector<LstmState> states = lstm_unroll(g, vars.lstm, input_steps);
    std::vector<Var> logits;
    logits.reserve(states.size());
    for (const LstmState& s : states)
        logits.push_back(g.add_row(g.matmul(s.h, vars.w_out), vars.b_out));
    return logits;
}

std::size_t vote_from_distributions(const Tensor& step_distributions,
                                    std::vector<double>* final_distribution) {
    const std::size_t t_len = step_distributions.rows();
    const std::size_t k = step_distributions.cols();
    std::vector<double> mean_log(k, 0.0);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t c = 0; c < k; ++c)
            mean_log[c] += std::log(step_distributions.at(t, c)) / static_cast<double>(t_len);

    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c)
        if (mean_log[c] > mean_log[best]) best = c;

    if (final_distribution) {
        // Renormalized geometric mean of the per-step distributions.
        const double mx = *std::max_element(mean_log.begin(), mean_log.end());
        double denom = 0.0;
        final_distribution->assign(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            (*final_distribution)[c] = std::exp(mean_log[c] - mx);
            denom += (*final_distribution)[c];
        }
        for (double& v : *final_distribution) v /= denom;
    }
    return best;
}

ClassifierOutput classifier_forward(const Tensor& input, const ClassifierParams& params) {
    if (input.rank() != 2 || input.cols() != params.input_dim)
        throw ShapeError("classifier: input " + input.shape_str() + " does not match input dim " +
                         std::to_string(params.input_dim));
    Graph g;
    const ClassifierVars vars = stage_classifier(g, params);
    const std::vector<Var> logits = classifier_logits(g, vars, stage_sample_steps(g, input));

    ClassifierOutput out;
    out.step_distributions = Tensor({logits.size(), params.num_classes});
    for (std::size_t t = 0; t < logits.size(); ++t) {
        const Tensor probs = g.value(g.softmax_rows(logits[t]));
        for (std::size_t c = 0; c < params.num_classes; ++c)
            out.step_distributions.at(t, c) = probs[c];
    }
    out.predicted = vote_from_distributions(out.step_distributions, &out.final_distribution);
    return out;
}

} // namespace aagan
