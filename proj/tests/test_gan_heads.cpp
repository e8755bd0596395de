#include <cmath>
#include <vector>

#include <doctest.h>

#include "aagan/errors.hpp"
#include "aagan/heads.hpp"
#include "aagan/rng.hpp"
#include "gradcheck.hpp"
#include "reference_cells.hpp"

using namespace aagan;
using aagan::testing::check_gradients;
using aagan::testing::random_tensor;
using aagan::testing::randomize_lstm;
using aagan::testing::reference_cell;

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

LstmVars lstm_vars_from(const std::vector<Var>& in, std::size_t offset) {
    LstmVars vars;
    for (int gate = 0; gate < 4; ++gate) {
        vars.w[gate] = in[offset + 3 * gate];
        vars.u[gate] = in[offset + 3 * gate + 1];
        vars.b[gate] = in[offset + 3 * gate + 2];
    }
    return vars;
}

void append_lstm_tensors(const LstmParams& p, std::vector<Tensor>& out) {
    std::vector<const Tensor*> ptrs;
    p.collect(ptrs);
    for (const Tensor* t : ptrs) out.push_back(*t);
}

void zero_all(GeneratorParams& p) {
    std::vector<Tensor*> ptrs;
    p.collect(ptrs);
    for (Tensor* t : ptrs) t->fill(0.0);
}

// Scalar-loop twin of the stacked synthesizer, any horizon.
Tensor oracle_generate(const GeneratorParams& p, const Tensor& context, std::size_t horizon) {
    const std::size_t t_ctx = context.rows();
    if (horizon == 0) horizon = t_ctx;
    std::vector<double> h1(p.hidden_dim, 0.0), c1(p.hidden_dim, 0.0);
    std::vector<double> h2(p.hidden_dim, 0.0), c2(p.hidden_dim, 0.0);
    Tensor out({horizon, p.feature_dim});
    for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<double> x(p.context_dim, 0.0);
        if (t < t_ctx)
            for (std::size_t j = 0; j < p.context_dim; ++j) x[j] = context.at(t, j);
        reference_cell(p.layer1, x, h1, c1);
        reference_cell(p.layer2, h1, h2, c2);
        for (std::size_t d = 0; d < p.feature_dim; ++d) {
            double acc = p.b_out.at(0, d);
            for (std::size_t j = 0; j < p.hidden_dim; ++j) acc += h2[j] * p.w_out.at(j, d);
            out.at(t, d) = acc;
        }
    }
    return out;
}

// Scalar-loop twin of the per-step judge.
std::vector<double> oracle_scores(const DiscriminatorParams& p, const Tensor& context,
                                  const Tensor& candidate) {
    std::vector<double> hc(p.hidden_dim, 0.0), cc(p.hidden_dim, 0.0);
    for (std::size_t t = 0; t < context.rows(); ++t) {
        std::vector<double> x(p.context_dim);
        for (std::size_t j = 0; j < p.context_dim; ++j) x[j] = context.at(t, j);
        reference_cell(p.context_lstm, x, hc, cc);
    }
    std::vector<double> h(p.hidden_dim, 0.0), c(p.hidden_dim, 0.0);
    std::vector<double> scores;
    for (std::size_t t = 0; t < candidate.rows(); ++t) {
        std::vector<double> x(p.feature_dim);
        for (std::size_t j = 0; j < p.feature_dim; ++j) x[j] = candidate.at(t, j);
        reference_cell(p.candidate_lstm, x, h, c);

        std::vector<double> joint(2 * p.hidden_dim);
        for (std::size_t j = 0; j < p.hidden_dim; ++j) {
            joint[j] = hc[j];
            joint[p.hidden_dim + j] = h[j];
        }
        std::vector<double> mid(p.head_hidden);
        for (std::size_t f = 0; f < p.head_hidden; ++f) {
            double acc = p.b1.at(0, f);
            for (std::size_t j = 0; j < joint.size(); ++j) acc += joint[j] * p.w1.at(j, f);
            mid[f] = std::tanh(acc);
        }
        double z = p.b2.at(0, 0);
        for (std::size_t f = 0; f < p.head_hidden; ++f) z += mid[f] * p.w2.at(f, 0);
        scores.push_back(logistic(z));
    }
    return scores;
}

} // namespace

TEST_CASE("synthesizer with all-zero parameters emits all-zero futures") {
    Rng rng(21);
    GeneratorParams p = GeneratorParams::init(4, 3, 2, rng);
    zero_all(p);
    const Tensor out = generator_forward(random_tensor(rng, {5, 4}), p, 7);
    REQUIRE(out.rows() == 7);
    REQUIRE(out.cols() == 2);
    for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("synthesizer output shapes follow the requested horizon") {
    Rng rng(22);
    GeneratorParams p = GeneratorParams::init(3, 2, 4, rng);
    const Tensor context = random_tensor(rng, {5, 3});
    CHECK(generator_forward(context, p, 0).rows() == 5);
    CHECK(generator_forward(context, p, 2).rows() == 2);
    CHECK(generator_forward(context, p, 9).rows() == 9);
    CHECK(generator_forward(context, p, 9).cols() == 4);
    CHECK_THROWS_AS(generator_forward(random_tensor(rng, {5, 2}), p, 0), ShapeError);
}

TEST_CASE("synthesizer matches the scalar oracle within and past the context") {
    Rng rng(23);
    GeneratorParams p = GeneratorParams::init(3, 2, 2, rng);
    randomize_lstm(p.layer1, rng);
    randomize_lstm(p.layer2, rng);
    for (double& v : p.w_out.values()) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.b_out.values()) v = rng.uniform(-0.5, 0.5);

    const Tensor context = random_tensor(rng, {3, 3});
    for (std::size_t horizon : {std::size_t{0}, std::size_t{2}, std::size_t{6}}) {
        const Tensor got = generator_forward(context, p, horizon);
        const Tensor want = oracle_generate(p, context, horizon);
        REQUIRE(got.same_shape(want));
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("synthesizer gradients match finite differences") {
    Rng rng(24);
    GeneratorParams p = GeneratorParams::init(2, 2, 2, rng);
    randomize_lstm(p.layer1, rng);
    randomize_lstm(p.layer2, rng);
    for (double& v : p.w_out.values()) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.b_out.values()) v = rng.uniform(-0.5, 0.5);

    std::vector<Tensor> inputs;
    append_lstm_tensors(p.layer1, inputs);
    append_lstm_tensors(p.layer2, inputs);
    inputs.push_back(p.w_out);
    inputs.push_back(p.b_out);
    inputs.push_back(random_tensor(rng, {2, 2})); // context
    const Tensor probe = random_tensor(rng, {1, 2});
    const std::size_t horizon = 3;

    check_gradients(
        [&](Graph& g, const std::vector<Var>& in) {
            GeneratorVars vars;
            vars.layer1 = lstm_vars_from(in, 0);
            vars.layer2 = lstm_vars_from(in, 12);
            vars.w_out = in[24];
            vars.b_out = in[25];
            std::vector<Var> ctx;
            for (std::size_t t = 0; t < 2; ++t) {
                std::vector<double> sel(2, 0.0);
                sel[t] = 1.0;
                ctx.push_back(g.matmul(g.constant(Tensor::matrix(1, 2, sel)), in[26]));
            }
            const std::vector<Var> steps = generator_unroll(g, vars, ctx, horizon);
            Var acc = g.sum(g.mul(steps[0], g.constant(probe)));
            for (std::size_t t = 1; t < steps.size(); ++t)
                acc = g.add(acc, g.sum(g.mul(steps[t], g.constant(probe))));
            return acc;
        },
        inputs, 1e-6, 2e-4);
}

TEST_CASE("judge with a zeroed output layer scores exactly one half everywhere") {
    Rng rng(25);
    DiscriminatorParams p = DiscriminatorParams::init(3, 2, 4, 0, rng);
    CHECK(p.head_hidden == 4);
    p.w2.fill(0.0);
    p.b2.fill(0.0);
    const Tensor context = random_tensor(rng, {4, 3});
    const Tensor candidate = random_tensor(rng, {3, 2});
    CHECK(discriminator_forward(context, candidate, p) == 0.5);
}

TEST_CASE("judge scores stay strictly inside (0,1) under extreme parameters") {
    Rng rng(26);
    DiscriminatorParams p = DiscriminatorParams::init(2, 2, 3, 3, rng);
    randomize_lstm(p.context_lstm, rng, 2.0);
    randomize_lstm(p.candidate_lstm, rng, 2.0);
    for (double& v : p.w1.values()) v = rng.uniform(-30.0, 30.0);
    for (double& v : p.w2.values()) v = rng.uniform(-400.0, 400.0);
    for (double& v : p.b2.values()) v = rng.uniform(-400.0, 400.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double s = discriminator_forward(random_tensor(rng, {3, 2}, -4.0, 4.0),
                                               random_tensor(rng, {3, 2}, -4.0, 4.0), p);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
}

TEST_CASE("judge matches the scalar oracle, one score per candidate step") {
    Rng rng(27);
    DiscriminatorParams p = DiscriminatorParams::init(3, 2, 2, 3, rng);
    randomize_lstm(p.context_lstm, rng);
    randomize_lstm(p.candidate_lstm, rng);
    for (double& v : p.w1.values()) v = rng.uniform(-0.7, 0.7);
    for (double& v : p.b1.values()) v = rng.uniform(-0.7, 0.7);
    for (double& v : p.w2.values()) v = rng.uniform(-0.7, 0.7);
    for (double& v : p.b2.values()) v = rng.uniform(-0.7, 0.7);

    const Tensor context = random_tensor(rng, {4, 3});
    const Tensor candidate = random_tensor(rng, {3, 2});
    const std::vector<double> want = oracle_scores(p, context, candidate);

    Graph g;
    const DiscriminatorVars vars = stage_discriminator(g, p);
    const std::vector<Var> scores =
        discriminator_scores(g, vars, stage_sample_steps(g, context),
                             stage_sample_steps(g, candidate));
    REQUIRE(scores.size() == 3);
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const double got = g.value(scores[t])[0];
        CHECK(got == doctest::Approx(want[t]).epsilon(1e-12));
        CHECK(got > 0.0);
        CHECK(got < 1.0);
    }

    // The whole-sequence judgment is the final per-step score.
    CHECK(discriminator_forward(context, candidate, p) == g.value(scores.back())[0]);
}

TEST_CASE("judge conditions every step on the context") {
    Rng rng(28);
    DiscriminatorParams p = DiscriminatorParams::init(2, 2, 3, 2, rng);
    randomize_lstm(p.context_lstm, rng);
    randomize_lstm(p.candidate_lstm, rng);
    for (double& v : p.w1.values()) v = rng.uniform(-0.7, 0.7);
    for (double& v : p.w2.values()) v = rng.uniform(-0.7, 0.7);

    const Tensor candidate = random_tensor(rng, {2, 2});
    const double a = discriminator_forward(random_tensor(rng, {3, 2}), candidate, p);
    const double b = discriminator_forward(random_tensor(rng, {3, 2}), candidate, p);
    CHECK(a != b);
}

TEST_CASE("judge gradients match finite differences") {
    Rng rng(29);
    DiscriminatorParams p = DiscriminatorParams::init(2, 2, 2, 2, rng);
    randomize_lstm(p.context_lstm, rng);
    randomize_lstm(p.candidate_lstm, rng);
    for (double& v : p.w1.values()) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.b1.values()) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.w2.values()) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.b2.values()) v = rng.uniform(-0.5, 0.5);

    std::vector<Tensor> inputs;
    append_lstm_tensors(p.context_lstm, inputs);
    append_lstm_tensors(p.candidate_lstm, inputs);
    inputs.push_back(p.w1);
    inputs.push_back(p.b1);
    inputs.push_back(p.w2);
    inputs.push_back(p.b2);
    inputs.push_back(random_tensor(rng, {2, 2})); // context
    inputs.push_back(random_tensor(rng, {2, 2})); // candidate

    check_gradients(
        [&](Graph& g, const std::vector<Var>& in) {
            DiscriminatorVars vars;
            vars.context_lstm = lstm_vars_from(in, 0);
            vars.candidate_lstm = lstm_vars_from(in, 12);
            vars.w1 = in[24];
            vars.b1 = in[25];
            vars.w2 = in[26];
            vars.b2 = in[27];
            std::vector<Var> ctx, cand;
            for (std::size_t t = 0; t < 2; ++t) {
                std::vector<double> sel(2, 0.0);
                sel[t] = 1.0;
                const Var row = g.constant(Tensor::matrix(1, 2, sel));
                ctx.push_back(g.matmul(row, in[28]));
                cand.push_back(g.matmul(row, in[29]));
            }
            const std::vector<Var> scores = discriminator_scores(g, vars, ctx, cand);
            Var acc = scores[0];
            for (std::size_t t = 1; t < scores.size(); ++t) acc = g.add(acc, scores[t]);
            return g.sum(acc);
        },
        inputs, 1e-6, 2e-4);
}

TEST_CASE("classifier rejects degenerate class counts and mismatched widths") {
    Rng rng(30);
    CHECK_THROWS_AS(ClassifierParams::init(3, 2, 1, rng), ConfigError);
    ClassifierParams p = ClassifierParams::init(3, 2, 4, rng);
    CHECK_THROWS_AS(classifier_forward(random_tensor(rng, {3, 2}), p), ShapeError);
}

TEST_CASE("classifier with zero parameters predicts the uniform distribution") {
    Rng rng(31);
    ClassifierParams p = ClassifierParams::init(2, 3, 4, rng);
    std::vector<Tensor*> ptrs;
    p.collect(ptrs);
    for (Tensor* t : ptrs) t->fill(0.0);

    const ClassifierOutput out = classifier_forward(random_tensor(rng, {3, 2}), p);
    REQUIRE(out.step_distributions.rows() == 3);
    REQUIRE(out.step_distributions.cols() == 4);
    for (double v : out.step_distributions.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(out.predicted == 0);
    for (double v : out.final_distribution) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("classifier step distributions are valid and match a scalar softmax oracle") {
    Rng rng(32);
    ClassifierParams p = ClassifierParams::init(2, 2, 3, rng);
    randomize_lstm(p.lstm, rng);
    for (double& v : p.w_out.values()) v = rng.uniform(-0.8, 0.8);
    for (double& v : p.b_out.values()) v = rng.uniform(-0.8, 0.8);

    const Tensor input = random_tensor(rng, {2, 2});
    const ClassifierOutput out = classifier_forward(input, p);

    const Tensor hidden = aagan::testing::reference_encode(p.lstm, input);
    for (std::size_t t = 0; t < 2; ++t) {
        double z[3], mx = -1e300;
        for (std::size_t c = 0; c < 3; ++c) {
            z[c] = p.b_out.at(0, c);
            for (std::size_t j = 0; j < 2; ++j) z[c] += hidden.at(t, j) * p.w_out.at(j, c);
            mx = std::max(mx, z[c]);
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < 3; ++c) denom += std::exp(z[c] - mx);
        double row_sum = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double want = std::exp(z[c] - mx) / denom;
            CHECK(out.step_distributions.at(t, c) == doctest::Approx(want).epsilon(1e-12));
            row_sum += out.step_distributions.at(t, c);
        }
        CHECK(std::abs(row_sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("sequence vote is the argmax of mean log-probability") {
    const Tensor dist = Tensor::matrix(2, 3,
                                       {0.6, 0.3, 0.1,
                                        0.2, 0.5, 0.3});
    std::vector<double> final_dist;
    CHECK(vote_from_distributions(dist, &final_dist) == 1);

    // Direct recount.
    double best = -1e300;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        const double m = (std::log(dist.at(0, c)) + std::log(dist.at(1, c))) / 2.0;
        if (m > best) {
            best = m;
            best_c = c;
        }
    }
    CHECK(best_c == 1);

    // Geometric-mean vote distribution sums to one and ranks identically.
    double sum = 0.0;
    for (double v : final_dist) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(final_dist[1] > final_dist[0]);
    CHECK(final_dist[1] > final_dist[2]);
}

TEST_CASE("sequence vote breaks exact ties toward the lowest class index") {
    CHECK(vote_from_distributions(Tensor::matrix(2, 3,
                                                 {1.0 / 3, 1.0 / 3, 1.0 / 3,
                                                  1.0 / 3, 1.0 / 3, 1.0 / 3})) == 0);
    CHECK(vote_from_distributions(Tensor::matrix(2, 3,
                                                 {0.2, 0.4, 0.4,
                                                  0.2, 0.4, 0.4})) == 1);
}

TEST_CASE("sequence vote tolerates an exactly-zero step probability") {
    CHECK(vote_from_distributions(Tensor::matrix(2, 3,
                                                 {0.0, 0.5, 0.5,
                                                  0.1, 0.8, 0.1})) == 1);
}

TEST_CASE("a vanishing class probability dominates the vote against a single good step") {
    // One strong step cannot rescue a class judged impossible elsewhere.
    const Tensor dist = Tensor::matrix(2, 2,
                                       {1e-30, 1.0 - 1e-30,
                                        0.9, 0.1});
    CHECK(vote_from_distributions(dist) == 1);
}

TEST_CASE("classifier gradients match finite differences through the logits") {
    Rng rng(33);
    ClassifierParams p = ClassifierParams::init(2, 2, 3, rng);
    randomize_lstm(p.lstm, rng);
    for (double& v : p.w_out.values()) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.b_out.values()) v = rng.uniform(-0.5, 0.5);

    std::vector<Tensor> inputs;
    append_lstm_tensors(p.lstm, inputs);
    inputs.push_back(p.w_out);
    inputs.push_back(p.b_out);
    inputs.push_back(random_tensor(rng, {2, 2})); // input stream
    const Tensor probe = random_tensor(rng, {1, 3});

    check_gradients(
        [&](Graph& g, const std::vector<Var>& in) {
            ClassifierVars vars;
            vars.lstm = lstm_vars_from(in, 0);
            vars.w_out = in[12];
            vars.b_out = in[13];
            std::vector<Var> xs;
            for (std::size_t t = 0; t < 2; ++t) {
                std::vector<double> sel(2, 0.0);
                sel[t] = 1.0;
                xs.push_back(g.matmul(g.constant(Tensor::matrix(1, 2, sel)), in[14]));
            }
            const std::vector<Var> logits = classifier_logits(g, vars, xs);
            Var acc = g.sum(g.mul(logits[0], g.constant(probe)));
            for (std::size_t t = 1; t < logits.size(); ++t)
                acc = g.add(acc, g.sum(g.mul(logits[t], g.constant(probe))));
            return acc;
        },
        inputs, 1e-6, 2e-4);
}

TEST_CASE("parameter counts agree with the collected tensors") {
    Rng rng(34);
    GeneratorParams gen = GeneratorParams::init(4, 3, 2, rng);
    DiscriminatorParams disc = DiscriminatorParams::init(4, 2, 3, 0, rng);
    ClassifierParams cls = ClassifierParams::init(2, 3, 4, rng);

    const auto counted = [](const auto& p) {
        std::vector<const Tensor*> ptrs;
        p.collect(ptrs);
        std::size_t n = 0;
        for (const Tensor* t : ptrs) n += t->size();
        return n;
    };
    CHECK(gen.parameter_count() == counted(gen));
    CHECK(disc.parameter_count() == counted(disc));
    CHECK(cls.parameter_count() == counted(cls));
}
