#include "aagan/losses.hpp"

#include <cmath>
#include <string>

#include "aagan/errors.hpp"

namespace aagan {

namespace {

double clamp_prob(double p, std::size_t& events) {
    if (p < kProbabilityEpsilon) {
        ++events;
        return kProbabilityEpsilon;
    }
    if (p > 1.0 - kProbabilityEpsilon) {
        ++events;
        return 1.0 - kProbabilityEpsilon;
    }
    return p;
}

double row_cosine(const Tensor& a, const Tensor& b, std::size_t row, const char* what) {
    const std::size_t d = a.cols();
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        dot += a.at(row, j) * b.at(row, j);
        na += a.at(row, j) * a.at(row, j);
        nb += b.at(row, j) * b.at(row, j);
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na == 0.0 || nb == 0.0)
        throw DegenerateError(std::string(what) + ": zero-norm embedding at future step " +
                              std::to_string(row + 1));
    return dot / (na * nb);
}

} // namespace

AdversarialPair adversarial_losses(const std::vector<double>& d_real,
                                   const std::vector<double>& d_fake, bool non_saturating) {
    if (d_real.size() != d_fake.size())
        throw ShapeError("adversarial losses: " + std::to_string(d_real.size()) +
                         " real vs " + std::to_string(d_fake.size()) + " fake probabilities");
    if (d_real.empty()) throw ShapeError("adversarial losses: empty probability sequences");

    AdversarialPair out;
    double disc = 0.0, gen = 0.0;
    for (std::size_t t = 0; t < d_real.size(); ++t) {
        const double r = clamp_prob(d_real[t], out.clamp_events);
        const double f = clamp_prob(d_fake[t], out.clamp_events);
        disc += std::log(r) + std::log(1.0 - f);
        gen += non_saturating ? std::log(f) : std::log(1.0 - f);
    }
    out.discriminator_loss = -disc;
    out.generator_loss = non_saturating ? -gen : gen;
    return out;
}

double classification_loss(const Tensor& step_distributions, std::size_t label) {
    const std::size_t k = step_distributions.cols();
    if (label >= k)
        throw ShapeError("classification loss: label " + std::to_string(label) +
                         " out of range for K=" + std::to_string(k));
    double loss = 0.0;
    for (std::size_t t = 0; t < step_distributions.rows(); ++t)
        loss -= std::log(step_distributions.at(t, label));
    return loss;
}

double regularization_loss(const Tensor& pred_v, const Tensor& true_v, const Tensor& pred_tp,
                           const Tensor& true_tp, bool literal_distance) {
    require_same_shape(pred_v, true_v, "regularization loss (visual)");
    require_same_shape(pred_tp, true_tp, "regularization loss (temporal)");
    if (pred_v.rows() != pred_tp.rows())
        throw ShapeError("regularization loss: stream horizons disagree: " +
                         pred_v.shape_str() + " vs " + pred_tp.shape_str());

    double loss = 0.0;
    for (std::size_t t = 0; t < pred_v.rows(); ++t) {
        const double weight = std::exp(static_cast<double>(t + 1));
        double sim_v = row_cosine(pred_v, true_v, t, "regularization loss (visual)");
        double sim_tp = row_cosine(pred_tp, true_tp, t, "regularization loss (temporal)");
        if (literal_distance) {
            sim_v = 1.0 - sim_v;
            sim_tp = 1.0 - sim_tp;
        }
        loss -= weight * (sim_v + sim_tp);
    }
    return loss;
}

double mse_loss(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "mse loss");
    if (pred.empty()) throw ShapeError("mse loss: empty embeddings");
    const double dim = static_cast<double>(pred.cols());
    double loss = 0.0;
    for (std::size_t t = 0; t < pred.rows(); ++t) {
        double step = 0.0;
        for (std::size_t j = 0; j < pred.cols(); ++j) {
            const double d = pred.at(t, j) - truth.at(t, j);
            step += d * d;
        }
        loss += step / dim;
    }
    return loss;
}

double total_loss(double l_v, double l_tp, double l_c, double l_r, const LossWeights& weights) {
    return weights.visual * l_v + weights.temporal * l_tp + weights.classification * l_c +
           weights.regularization * l_r;
}

Var discriminator_objective(Graph& g, const std::vector<Var>& d_real_steps,
                            const std::vector<Var>& d_fake_steps) {
    if (d_real_steps.size() != d_fake_steps.size() || d_real_steps.empty())
        throw ShapeError("discriminator objective: per-step sequences disagree or are empty");
    const std::size_t batch = g.value(d_real_steps[0]).rows();
    Var acc;
    for (std::size_t t = 0; t < d_real_steps.size(); ++t) {
        const Var r = g.clamp(d_real_steps[t], kProbabilityEpsilon, 1.0 - kProbabilityEpsilon,
                              true);
        const Var f = g.clamp(d_fake_steps[t], kProbabilityEpsilon, 1.0 - kProbabilityEpsilon,
                              true);
        const Var term = g.add(g.log(r), g.log(g.affine(f, -1.0, 1.0)));
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return g.affine(g.sum(acc), -1.0 / static_cast<double>(batch), 0.0);
}

Var generator_objective(Graph& g, const std::vector<Var>& d_fake_steps, bool non_saturating) {
    if (d_fake_steps.empty()) throw ShapeError("generator objective: empty per-step sequence");
    const std::size_t batch = g.value(d_fake_steps[0]).rows();
    Var acc;
    for (const Var step : d_fake_steps) {
        const Var f = g.clamp(step, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon, true);
        const Var term = non_saturating ? g.log(f) : g.log(g.affine(f, -1.0, 1.0));
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    const double sign = non_saturating ? -1.0 : 1.0;
    return g.affine(g.sum(acc), sign / static_cast<double>(batch), 0.0);
}

Var classification_objective(Graph& g, const std::vector<Var>& logit_steps,
                             const std::vector<std::size_t>& labels) {
    if (logit_steps.empty()) throw ShapeError("classification objective: empty logit sequence");
    Var acc;
    for (const Var step : logit_steps) {
        const Var ce = g.softmax_cross_entropy_rows(step, labels);
        acc = acc.valid() ? g.add(acc, ce) : ce;
    }
    return g.affine(g.sum(acc), 1.0 / static_cast<double>(labels.size()), 0.0);
}

Var regularization_objective(Graph& g, const std::vector<Var>& pred_steps,
                             const std::vector<Var>& true_steps, bool literal_distance) {
    if (pred_steps.size() != true_steps.size() || pred_steps.empty())
        throw ShapeError("regularization objective: per-step sequences disagree or are empty");
    const std::size_t batch = g.value(pred_steps[0]).rows();
    Var acc;
    for (std::size_t t = 0; t < pred_steps.size(); ++t) {
        const double weight = std::exp(static_cast<double>(t + 1));
        const Var sim = g.rows_cosine(pred_steps[t], true_steps[t]);
        const Var term = literal_distance ? g.affine(sim, weight, -weight)
                                          : g.affine(sim, -weight, 0.0);
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return g.affine(g.sum(acc), 1.0 / static_cast<double>(batch), 0.0);
}

Var mse_objective(Graph& g, const std::vector<Var>& pred_steps,
                  const std::vector<Var>& true_steps) {
    if (pred_steps.size() != true_steps.size() || pred_steps.empty())
        throw ShapeError("mse objective: per-step sequences disagree or are empty");
    const std::size_t batch = g.value(pred_steps[0]).rows();
    const std::size_t dim = g.value(pred_steps[0]).cols();
    Var acc;
    for (std::size_t t = 0; t < pred_steps.size(); ++t) {
        const Var diff = g.sub(pred_steps[t], true_steps[t]);
        const Var sq = g.mul(diff, diff);
        acc = acc.valid() ? g.add(acc, sq) : sq;
    }
    return g.affine(g.sum(acc), 1.0 / static_cast<double>(batch * dim), 0.0);
}

} // namespace aagan
