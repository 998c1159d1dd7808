#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynimg/errors.hpp"
#include "dynimg/pooling.hpp"
#include "dynimg/tensor.hpp"

namespace dynimg {

struct SolverConfig {
    double lambda = 1.0;      // quadratic regularizer weight
    double step_size = 1e-3;  // base gradient step; halved on objective increase
    std::size_t max_iters = 300;
    double rel_tol = 1e-6;    // stop when the relative objective decrease falls below
};

/// Learned ranking parameters plus solver diagnostics.
struct RankModel {
    Tensor params;
    double lambda;
    double objective;
    std::size_t iterations;
    bool converged;
};

/// Ranking score of each timestep: the inner product of the parameters
/// with the running mean up to t.
inline std::vector<double> score(const Tensor& params, const RunningMeanSequence& means) {
    if (!params.same_shape(means.mean(1))) {
        throw std::invalid_argument("parameter shape does not match the running means");
    }
    std::vector<double> scores(means.length());
    for (std::size_t t = 1; t <= means.length(); ++t) {
        scores[t - 1] = dot(params, means.mean(t));
    }
    return scores;
}

namespace detail {

inline std::vector<double> scores_of(const std::vector<double>& params,
                                     const RunningMeanSequence& means) {
    std::vector<double> scores(means.length());
    for (std::size_t t = 0; t < means.length(); ++t) {
        const std::vector<double>& v = means.means()[t].data();
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s += params[i] * v[i];
        }
        scores[t] = s;
    }
    return scores;
}

/// Pairwise hinge objective from precomputed scores. The pair sum runs in
/// fixed (t ascending, q ascending) order; the hinge total is divided by
/// the pair count at the end, so the all-zero model scores exactly 1.
inline double objective_of(const std::vector<double>& params,
                           const std::vector<double>& scores, double lambda) {
    const std::size_t t_total = scores.size();
    double sq_norm = 0.0;
    for (double p : params) {
        sq_norm += p * p;
    }
    double hinge_sum = 0.0;
    for (std::size_t t = 0; t + 1 < t_total; ++t) {
        for (std::size_t q = t + 1; q < t_total; ++q) {
            const double margin = 1.0 - scores[q] + scores[t];
            if (margin > 0.0) {
                hinge_sum += margin;
            }
        }
    }
    const double pairs2 = static_cast<double>(t_total) * static_cast<double>(t_total - 1);
    return 0.5 * lambda * sq_norm + 2.0 * hinge_sum / pairs2;
}

/// Subgradient of the objective: lambda d plus the scaled sum of
/// (V_t - V_q) over the violated pairs, a pair counting as violated iff
/// its hinge argument is strictly positive. Aggregated per timestep
/// (each mean enters with an exact integer count) for determinism.
inline std::vector<double> gradient_of(const std::vector<double>& params,
                                       const RunningMeanSequence& means,
                                       const std::vector<double>& scores, double lambda) {
    const std::size_t t_total = scores.size();
    const std::size_t n = params.size();
    std::vector<double> pair_coef(t_total, 0.0);
    for (std::size_t t = 0; t + 1 < t_total; ++t) {
        for (std::size_t q = t + 1; q < t_total; ++q) {
            if (1.0 - scores[q] + scores[t] > 0.0) {
                pair_coef[t] += 1.0;
                pair_coef[q] -= 1.0;
            }
        }
    }
    const double pair_scale =
        2.0 / (static_cast<double>(t_total) * static_cast<double>(t_total - 1));
    std::vector<double> grad(n, 0.0);
    for (std::size_t t = 0; t < t_total; ++t) {
        if (pair_coef[t] == 0.0) {
            continue;
        }
        const std::vector<double>& v = means.means()[t].data();
        const double c = pair_coef[t];
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] += c * v[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        grad[i] = lambda * params[i] + pair_scale * grad[i];
    }
    return grad;
}

} // namespace detail

/// Ranking objective: lambda/2 ||d||^2 plus the mean hinge violation over
/// all ordered frame pairs, scores taken over running means. Exactly 1 at
/// d = 0 (every pair violates by the unit margin).
inline double rank_objective(const Tensor& params, const FrameSequence& seq, double lambda) {
    if (seq.length() < 2) {
        throw std::invalid_argument("ranking objective needs at least two frames");
    }
    if (params.dims() != seq.frame_dims()) {
        throw std::invalid_argument("parameter shape does not match the frames");
    }
    const RunningMeanSequence means = running_means(seq);
    return detail::objective_of(params.data(), detail::scores_of(params.data(), means), lambda);
}

/// Subgradient of rank_objective at the given parameters. Away from hinge
/// kinks this is the gradient and matches finite differences.
inline Tensor rank_objective_gradient(const Tensor& params, const FrameSequence& seq,
                                      double lambda) {
    if (seq.length() < 2) {
        throw std::invalid_argument("ranking objective needs at least two frames");
    }
    if (params.dims() != seq.frame_dims()) {
        throw std::invalid_argument("parameter shape does not match the frames");
    }
    const RunningMeanSequence means = running_means(seq);
    return Tensor(params.dims(),
                  detail::gradient_of(params.data(), means,
                                      detail::scores_of(params.data(), means), lambda));
}

struct RankPoolResult {
    DynamicImage image;
    RankModel model;
};

/// Exact rank pooling: deterministic subgradient descent on the pairwise
/// ranking objective from d = 0. A pair counts as violated iff its hinge
/// argument is strictly positive. If a step would increase the objective
/// the step size is halved and the step retried, at most 20 times; the
/// step size stays reduced afterwards. Stops at max_iters or when the
/// relative objective decrease drops below rel_tol.
inline RankPoolResult rank_pool_exact(const FrameSequence& seq, const SolverConfig& cfg = {}) {
    if (seq.length() < 2) {
        throw std::invalid_argument("rank pooling needs at least two frames");
    }
    if (!(cfg.lambda > 0.0) || !(cfg.step_size > 0.0) || !(cfg.rel_tol > 0.0) ||
        cfg.max_iters < 1) {
        throw std::invalid_argument("solver configuration values must be positive");
    }
    const std::size_t t_total = seq.length();
    const std::size_t n = seq.frame_size();
    const RunningMeanSequence means = running_means(seq);

    std::vector<double> params(n, 0.0);
    std::vector<double> trial(n);

    double eta = cfg.step_size;
    double objective = detail::objective_of(params, detail::scores_of(params, means), cfg.lambda);
    std::size_t iterations = 0;
    bool converged = false;

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const std::vector<double> grad =
            detail::gradient_of(params, means, detail::scores_of(params, means), cfg.lambda);

        bool accepted = false;
        double trial_objective = objective;
        for (int halvings = 0; halvings <= 20; ++halvings) {
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = params[i] - eta * grad[i];
            }
            trial_objective =
                detail::objective_of(trial, detail::scores_of(trial, means), cfg.lambda);
            if (!std::isfinite(trial_objective)) {
                throw NumericError("ranking objective became non-finite during descent");
            }
            if (trial_objective <= objective + 1e-12) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            break;
        }
        params.swap(trial);
        iterations = iter;
        const double decrease = objective - trial_objective;
        const bool stalled = decrease < cfg.rel_tol * objective;
        objective = trial_objective;
        if (stalled) {
            converged = true;
            break;
        }
    }

    Tensor d(seq.frame_dims(), std::move(params));
    return RankPoolResult{
        DynamicImage{d, PoolKind::rank_exact, {1, t_total}},
        RankModel{d, cfg.lambda, objective, iterations, converged}};
}

} // namespace dynimg
