#include "aagan/adam.hpp"

#include <cmath>
#include <string>

#include "aagan/errors.hpp"

namespace aagan {

AdamState AdamState::for_shapes(const std::vector<std::vector<std::size_t>>& shapes,
                                double learning_rate, double decay) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.decay = decay;
    s.m.reserve(shapes.size());
    s.v.reserve(shapes.size());
    for (const auto& shape : shapes) {
        s.m.push_back(Tensor::zeros(shape));
        s.v.push_back(Tensor::zeros(shape));
    }
    return s;
}

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeError("adam_step: group sizes disagree: " + std::to_string(params.size()) +
                         " params, " + std::to_string(grads.size()) + " grads, " +
                         std::to_string(state.m.size()) + " accumulators");

    const double lr_sched =
        state.learning_rate / (1.0 + state.decay * static_cast<double>(state.step));
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double lr_t = lr_sched * std::sqrt(1.0 - std::pow(state.beta2, t)) /
                        (1.0 - std::pow(state.beta1, t));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        require_same_shape(p, m, "adam_step: param vs accumulator");
        require_same_shape(p, g, "adam_step: param vs grad");
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            p[j] -= lr_t * m[j] / (std::sqrt(v[j]) + state.epsilon);
        }
    }
}

} // namespace aagan
