#ifndef AAGAN_ADAM_HPP
#define AAGAN_ADAM_HPP

#include <cstdint>
#include <vector>

#include "aagan/tensor.hpp"

namespace aagan {

// Adam with bias correction and an inverse-time learning-rate schedule:
// the update after k prior updates runs at lr0 / (1 + decay * k).
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t step = 0;

    double learning_rate = 2e-4;
    double decay = 8e-9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_shapes(const std::vector<std::vector<std::size_t>>& shapes,
                                double learning_rate, double decay);
};

// One optimizer step over a parameter group. params and grads must align
// with the state's accumulators pairwise in shape.
void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads);

} // namespace aagan

#endif
