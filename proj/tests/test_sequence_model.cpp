#include <cmath>
#include <cstring>

#include <doctest.h>

#include "aagan/attention.hpp"
#include "aagan/errors.hpp"
#include "aagan/lstm.hpp"
#include "aagan/rng.hpp"
#include "gradcheck.hpp"
#include "reference_cells.hpp"

using namespace aagan;
using aagan::testing::check_gradients;
using aagan::testing::random_tensor;
using aagan::testing::randomize_lstm;
using aagan::testing::reference_cell;
using aagan::testing::reference_encode;

namespace {

// Assembles cell parameter handles from a flat leaf list (w0,u0,b0,...).
LstmVars lstm_vars_from(const std::vector<Var>& in, std::size_t offset) {
    LstmVars vars;
    for (int gate = 0; gate < 4; ++gate) {
        vars.w[gate] = in[offset + 3 * gate];
        vars.u[gate] = in[offset + 3 * gate + 1];
        vars.b[gate] = in[offset + 3 * gate + 2];
    }
    return vars;
}

std::vector<Tensor> lstm_tensors(const LstmParams& p) {
    std::vector<const Tensor*> ptrs;
    p.collect(ptrs);
    std::vector<Tensor> out;
    for (const Tensor* t : ptrs) out.push_back(*t);
    return out;
}

} // namespace

TEST_CASE("all-zero cell maps any input to zero state") {
    Rng rng(1);
    LstmParams p = LstmParams::init(3, 2, rng);
    for (int gate = 0; gate < 4; ++gate) {
        p.w[gate].fill(0.0);
        p.u[gate].fill(0.0);
    }
    const Tensor h = encode_stream(random_tensor(rng, {4, 3}), p);
    for (double v : h.values()) CHECK(v == 0.0);
}

TEST_CASE("cell step matches the scalar reference oracle") {
    Rng rng(2);
    LstmParams p = LstmParams::init(3, 2, rng);
    randomize_lstm(p, rng);

    const Tensor features = random_tensor(rng, {5, 3});
    const Tensor got = encode_stream(features, p);
    const Tensor want = reference_encode(p, features);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("cell hidden output stays inside (-1,1)") {
    Rng rng(3);
    LstmParams p = LstmParams::init(2, 3, rng);
    randomize_lstm(p, rng, 3.0);
    const Tensor h = encode_stream(random_tensor(rng, {8, 2}, -5.0, 5.0), p);
    for (double v : h.values()) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("cell gradients match finite differences") {
    Rng rng(4);
    LstmParams p = LstmParams::init(3, 2, rng);
    randomize_lstm(p, rng);

    std::vector<Tensor> inputs = lstm_tensors(p);
    inputs.push_back(random_tensor(rng, {1, 3}));  // x
    inputs.push_back(random_tensor(rng, {1, 2}));  // h0
    inputs.push_back(random_tensor(rng, {1, 2}));  // c0

    check_gradients(
        [](Graph& g, const std::vector<Var>& in) {
            const LstmVars vars = lstm_vars_from(in, 0);
            LstmState prev{in[13], in[14]};
            const LstmState next = lstm_step(g, vars, in[12], prev);
            return g.sum(next.h);
        },
        inputs);
}

TEST_CASE("encoding validates input and rejects empty sequences") {
    Rng rng(5);
    LstmParams p = LstmParams::init(3, 2, rng);
    CHECK_THROWS_AS(encode_stream(Tensor({2, 4}), p), ShapeError);

    Graph g;
    const LstmVars vars = stage_lstm(g, p);
    CHECK_THROWS_AS(lstm_unroll(g, vars, {}), ShapeError);
}

TEST_CASE("T=1 encoding equals one cell step from zero state") {
    Rng rng(6);
    LstmParams p = LstmParams::init(4, 3, rng);
    randomize_lstm(p, rng);
    const Tensor features = random_tensor(rng, {1, 4});

    const Tensor enc = encode_stream(features, p);

    Graph g;
    const LstmVars vars = stage_lstm(g, p);
    const LstmState s =
        lstm_step(g, vars, g.constant(features), lstm_zero_state(g, 1, 3));
    const Tensor& h = g.value(s.h);
    REQUIRE(enc.size() == h.size());
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(enc[i] == h[i]);
}

TEST_CASE("encoding is causal: perturbing step k leaves earlier states bitwise unchanged") {
    Rng rng(7);
    LstmParams p = LstmParams::init(3, 4, rng);
    randomize_lstm(p, rng);
    const Tensor features = random_tensor(rng, {6, 3});

    const Tensor base = encode_stream(features, p);
    Tensor poked = features;
    const std::size_t k = 3;
    poked.at(k, 1) += 0.7;
    const Tensor after = encode_stream(poked, p);

    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t j = 0; j < 4; ++j) {
            const double a = base.at(t, j), b = after.at(t, j);
            CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
        }
    // The perturbed step itself must move.
    double delta = 0.0;
    for (std::size_t j = 0; j < 4; ++j) delta += std::abs(base.at(k, j) - after.at(k, j));
    CHECK(delta > 0.0);
}

TEST_CASE("attention energies: zero MLP, codomain, hand-set perceptron oracle") {
    Rng rng(8);
    AttentionParams p = AttentionParams::init(2, 0, rng);
    p.visual.w2.fill(0.0);
    p.visual.b2.fill(0.0);
    const Tensor h_v({2}, {0.3, -0.4});
    const Tensor h_tp({2}, {0.1, 0.2});
    const auto [e0v, e0tp] = attention_energies(h_v, h_tp, p);
    CHECK(e0v == 0.0);

    // Hand-set 2-input perceptron: e = tanh(w . h + b).
    p.visual.w2 = Tensor::matrix(2, 1, {0.7, -0.3});
    p.visual.b2 = Tensor::matrix(1, 1, {0.2});
    const auto [ev, etp] = attention_energies(h_v, h_tp, p);
    CHECK(ev == doctest::Approx(std::tanh(0.7 * 0.3 - 0.3 * -0.4 + 0.2)).epsilon(1e-14));

    for (int trial = 0; trial < 50; ++trial) {
        AttentionParams q = AttentionParams::init(4, 3, rng);
        const Tensor a = random_tensor(rng, {4}, -3.0, 3.0);
        const Tensor b = random_tensor(rng, {4}, -3.0, 3.0);
        const auto [qa, qb] = attention_energies(a, b, q);
        CHECK(qa > -1.0);
        CHECK(qa < 1.0);
        CHECK(qb > -1.0);
        CHECK(qb < 1.0);
    }
    (void)e0tp;
    (void)etp;
}

TEST_CASE("attention weights: exact complement, symmetry point, direct-formula oracle") {
    Rng rng(9);
    AttentionParams p = AttentionParams::init(3, 0, rng);

    p.combiner_w.fill(0.0);
    p.combiner_b.fill(0.0);
    const auto [half_v, half_tp] = attention_weights(0.9, -0.2, p);
    CHECK(half_v == 0.5);
    CHECK(half_tp == 0.5);

    p.combiner_w = Tensor::matrix(2, 1, {1.0, -1.0});
    const auto [av, atp] = attention_weights(0.5, -0.5, p);
    CHECK(av == doctest::Approx(0.731059).epsilon(1e-5));
    CHECK(av + atp == 1.0);

    for (int trial = 0; trial < 1000; ++trial) {
        AttentionParams q = AttentionParams::init(2, 0, rng);
        const auto [a, b] =
            attention_weights(rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), q);
        CHECK(a + b == 1.0);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
        CHECK(b > 0.0);
        CHECK(b < 1.0);
    }
}

TEST_CASE("fuse_context limits, symmetry, and scale-concat oracle") {
    Rng rng(10);
    const Tensor h_v = random_tensor(rng, {2, 3});
    const Tensor h_tp = random_tensor(rng, {2, 3});

    const ContextDescriptor limit = fuse_context(h_v, h_tp, {1.0, 1.0}, {0.0, 0.0});
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(limit.context.at(t, j) == h_v.at(t, j));
            CHECK(limit.context.at(t, 3 + j) == 0.0);
        }

    const ContextDescriptor even = fuse_context(h_v, h_tp, {0.5, 0.5}, {0.5, 0.5});
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(even.context.at(t, j) == 0.5 * h_v.at(t, j));
            CHECK(even.context.at(t, 3 + j) == 0.5 * h_tp.at(t, j));
        }

    const std::vector<double> av{0.3, 0.8}, atp{0.7, 0.2};
    const ContextDescriptor got = fuse_context(h_v, h_tp, av, atp);
    REQUIRE(got.context.rows() == 2);
    REQUIRE(got.context.cols() == 6);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(got.context.at(t, j) == av[t] * h_v.at(t, j));
            CHECK(got.context.at(t, 3 + j) == atp[t] * h_tp.at(t, j));
        }

    CHECK_THROWS_AS(fuse_context(h_v, Tensor({3, 3}), av, atp), ShapeError);
    CHECK_THROWS_AS(fuse_context(h_v, h_tp, {0.5}, {0.5}), ShapeError);
}

TEST_CASE("build_context invariants over random passes") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        AttentionParams p = AttentionParams::init(3, trial % 2 ? 2 : 0, rng);
        const Tensor h_v = random_tensor(rng, {4, 3}, -2.0, 2.0);
        const Tensor h_tp = random_tensor(rng, {4, 3}, -2.0, 2.0);
        const ContextDescriptor ctx = build_context(h_v, h_tp, p);
        REQUIRE(ctx.context.cols() == 6);
        for (std::size_t t = 0; t < 4; ++t) {
            CHECK(ctx.alpha_v[t] + ctx.alpha_tp[t] == 1.0);
            CHECK(ctx.alpha_v[t] > 0.0);
            CHECK(ctx.alpha_v[t] < 1.0);
        }
    }
}

TEST_CASE("strict compatibility mode reads both temporal inputs from the visual stream") {
    Rng rng(12);
    AttentionParams p = AttentionParams::init(3, 0, rng);
    const Tensor h_v = random_tensor(rng, {2, 3});
    const Tensor h_tp = random_tensor(rng, {2, 3});

    // Temporal energy must ignore h_tp entirely in strict mode.
    const Tensor other = random_tensor(rng, {2, 3});
    const Tensor h_v0({3}, {h_v.at(0, 0), h_v.at(0, 1), h_v.at(0, 2)});
    const Tensor h_tp0({3}, {h_tp.at(0, 0), h_tp.at(0, 1), h_tp.at(0, 2)});
    const Tensor other0({3}, {other.at(0, 0), other.at(0, 1), other.at(0, 2)});
    const auto [e1v, e1tp] = attention_energies(h_v0, h_tp0, p, true);
    const auto [e2v, e2tp] = attention_energies(h_v0, other0, p, true);
    CHECK(e1tp == e2tp);
    CHECK(e1v == e2v);

    const ContextDescriptor strict = build_context(h_v, h_tp, p, true);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(strict.context.at(t, 3 + j) ==
                  doctest::Approx(strict.alpha_tp[t] * h_v.at(t, j)).epsilon(1e-15));
}

TEST_CASE("context construction is differentiable end to end") {
    Rng rng(13);
    const std::size_t hid = 4, t_len = 3, dim = 3;
    LstmParams enc_v = LstmParams::init(dim, hid, rng);
    LstmParams enc_tp = LstmParams::init(dim, hid, rng);
    randomize_lstm(enc_v, rng);
    randomize_lstm(enc_tp, rng);
    AttentionParams att = AttentionParams::init(hid, 0, rng);

    std::vector<Tensor> inputs = lstm_tensors(enc_v);
    for (const Tensor& t : lstm_tensors(enc_tp)) inputs.push_back(t);
    inputs.push_back(att.visual.w2);
    inputs.push_back(att.visual.b2);
    inputs.push_back(att.temporal.w2);
    inputs.push_back(att.temporal.b2);
    inputs.push_back(att.combiner_w);
    inputs.push_back(att.combiner_b);
    inputs.push_back(random_tensor(rng, {t_len, dim})); // visual features
    inputs.push_back(random_tensor(rng, {t_len, dim})); // temporal features
    const Tensor probe = random_tensor(rng, {1, 2 * hid});

    check_gradients(
        [&](Graph& g, const std::vector<Var>& in) {
            const LstmVars vv = lstm_vars_from(in, 0);
            const LstmVars vt = lstm_vars_from(in, 12);
            AttentionVars att_vars;
            att_vars.visual = {Var{}, Var{}, in[24], in[25]};
            att_vars.temporal = {Var{}, Var{}, in[26], in[27]};
            att_vars.combiner_w = in[28];
            att_vars.combiner_b = in[29];
            att_vars.has_hidden = false;

            std::vector<Var> xs_v, xs_tp;
            for (std::size_t t = 0; t < t_len; ++t) {
                // Row views of the feature leaves keep them differentiable.
                Tensor mask_t({t_len, 1});
                mask_t.at(t, 0) = 1.0;
                const Var sel = g.constant(Tensor::matrix(1, t_len, mask_t.values()));
                xs_v.push_back(g.matmul(sel, in[30]));
                xs_tp.push_back(g.matmul(sel, in[31]));
            }
            const std::vector<LstmState> sv = lstm_unroll(g, vv, xs_v);
            const std::vector<LstmState> st = lstm_unroll(g, vt, xs_tp);
            const FusedStep last =
                attention_fuse_step(g, att_vars, sv.back().h, st.back().h, false);
            return g.sum(g.mul(last.context, g.constant(probe)));
        },
        inputs, 1e-6, 2e-4);
}
