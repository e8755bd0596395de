#ifndef AAGAN_TESTS_GRADCHECK_HPP
#define AAGAN_TESTS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <doctest.h>

#include "aagan/graph.hpp"
#include "aagan/rng.hpp"

namespace aagan::testing {

using BuildLoss = std::function<Var(Graph&, const std::vector<Var>&)>;

// Checks every analytic gradient entry of a scalar loss against central
// finite differences computed by rebuilding the graph at perturbed inputs.
inline void check_gradients(const BuildLoss& build, std::vector<Tensor> inputs, double h = 1e-6,
                            double tol = 1e-4) {
    Graph g;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (auto& t : inputs) vars.push_back(g.leaf(t, true));
    const Var loss = build(g, vars);
    REQUIRE(g.value(loss).size() == 1);
    g.backward(loss);

    std::vector<Tensor> analytic;
    analytic.reserve(vars.size());
    for (Var v : vars) analytic.push_back(g.grad(v));

    auto eval = [&](const std::vector<Tensor>& pts) {
        Graph fresh;
        std::vector<Var> vv;
        vv.reserve(pts.size());
        for (const auto& t : pts) vv.push_back(fresh.leaf(t, true));
        return fresh.value(build(fresh, vv))[0];
    };

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            std::vector<Tensor> plus = inputs;
            std::vector<Tensor> minus = inputs;
            plus[i][j] += h;
            minus[i][j] -= h;
            const double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
            const double a = analytic[i][j];
            const double err =
                std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            INFO("input " << i << " entry " << j << ": analytic " << a << " vs numeric "
                          << numeric);
            CHECK(err <= tol);
        }
    }
}

inline Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

} // namespace aagan::testing

#endif
