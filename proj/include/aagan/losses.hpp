#ifndef AAGAN_LOSSES_HPP
#define AAGAN_LOSSES_HPP

#include <cstddef>
#include <vector>

#include "aagan/graph.hpp"
#include "aagan/tensor.hpp"

namespace aagan {

// Adversarial probabilities are pulled into [eps, 1-eps] before any log;
// each pulled value is counted and surfaced as a training-health metric.
inline constexpr double kProbabilityEpsilon = 1e-7;

struct LossWeights {
    double visual = 25.0;
    double temporal = 20.0;
    double classification = 43.0;
    double regularization = 15.0;
};

struct LossBreakdown {
    double visual_adversarial = 0.0;    // discriminator objective, visual stream
    double temporal_adversarial = 0.0;  // discriminator objective, temporal stream
    double classification = 0.0;
    double regularization = 0.0;
    double visual_generator = 0.0;      // generator-side adversarial objectives
    double temporal_generator = 0.0;
    double total = 0.0;                 // weighted sum of the first four
};

struct AdversarialPair {
    double discriminator_loss = 0.0;
    double generator_loss = 0.0;
    std::size_t clamp_events = 0;
};

// Per-step judged probabilities for one sample. The discriminator loss is
// -sum_t [log d_real_t + log(1 - d_fake_t)]; the generator loss defaults to
// the non-saturating -sum_t log d_fake_t, with the literal minimized
// sum_t log(1 - d_fake_t) behind the flag.
AdversarialPair adversarial_losses(const std::vector<double>& d_real,
                                   const std::vector<double>& d_fake,
                                   bool non_saturating = true);

// Sum over timesteps of cross-entropy between each row of step_distributions
// and the constant sequence label.
double classification_loss(const Tensor& step_distributions, std::size_t label);

// Mean squared error between predicted and true future embeddings, averaged
// over coordinates and summed over timesteps. The non-adversarial stand-in
// for a stream's synthesis loss.
double mse_loss(const Tensor& pred, const Tensor& truth);

// Exponentially weighted alignment of predicted vs true future embeddings,
// summed over both streams: sum_t -e^t * sim(pred_t, true_t), t from 1.
// literal_distance swaps sim for the cosine distance 1 - sim.
double regularization_loss(const Tensor& pred_v, const Tensor& true_v, const Tensor& pred_tp,
                           const Tensor& true_tp, bool literal_distance = false);

double total_loss(double l_v, double l_tp, double l_c, double l_r, const LossWeights& weights);

// Graph-side builders over per-step probability/logit blocks [B x 1] or
// [B x K]; every objective is the batch mean of the per-sample loss above.
Var discriminator_objective(Graph& g, const std::vector<Var>& d_real_steps,
                            const std::vector<Var>& d_fake_steps);
Var generator_objective(Graph& g, const std::vector<Var>& d_fake_steps, bool non_saturating);
Var classification_objective(Graph& g, const std::vector<Var>& logit_steps,
                             const std::vector<std::size_t>& labels);
// One stream's regularizer share; add the streams' values for the full term.
Var regularization_objective(Graph& g, const std::vector<Var>& pred_steps,
                             const std::vector<Var>& true_steps, bool literal_distance);
Var mse_objective(Graph& g, const std::vector<Var>& pred_steps,
                  const std::vector<Var>& true_steps);

} // namespace aagan

#endif
