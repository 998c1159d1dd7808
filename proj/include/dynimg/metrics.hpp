#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynimg/rank_solver.hpp"
#include "dynimg/rng.hpp"
#include "dynimg/segmentation.hpp"
#include "dynimg/tensor.hpp"

namespace dynimg {

/// Fraction of ordered frame pairs ranked correctly by a parameter vector.
struct RankingReport {
    double accuracy;
    std::size_t pairs_total;
    std::size_t pairs_correct;
};

/// Count the pairs q > t whose running-mean scores satisfy S(q) > S(t)
/// strictly. Ties count as incorrect, so the all-zero model scores 0.
inline RankingReport ranking_accuracy(const Tensor& params, const FrameSequence& seq) {
    if (seq.length() < 2) {
        throw std::invalid_argument("ranking accuracy needs at least two frames");
    }
    const std::vector<double> scores = score(params, running_means(seq));
    const std::size_t t_total = scores.size();
    std::size_t correct = 0;
    for (std::size_t t = 0; t + 1 < t_total; ++t) {
        for (std::size_t q = t + 1; q < t_total; ++q) {
            if (scores[q] > scores[t]) {
                ++correct;
            }
        }
    }
    const std::size_t total = t_total * (t_total - 1) / 2;
    return RankingReport{static_cast<double>(correct) / static_cast<double>(total), total,
                         correct};
}

/// Smooth synthetic sequence: frame t is t times a fixed unit direction
/// plus Gaussian noise scaled so the mean signal-to-noise ratio over the
/// frames is `snr`.
inline FrameSequence synthetic_smooth_sequence(const std::vector<std::size_t>& dims,
                                               std::size_t frames, SplitMix64& rng,
                                               double snr = 5.0) {
    const std::size_t n = detail::checked_volume(dims);
    std::vector<double> direction(n);
    double norm = 0.0;
    for (double& v : direction) {
        v = rng.gaussian();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : direction) {
        v /= norm;
    }
    const double mean_signal = (static_cast<double>(frames) + 1.0) / 2.0;
    const double sigma = mean_signal / (snr * std::sqrt(static_cast<double>(n)));
    std::vector<Tensor> out;
    out.reserve(frames);
    for (std::size_t t = 1; t <= frames; ++t) {
        std::vector<double> frame(n);
        for (std::size_t i = 0; i < n; ++i) {
            frame[i] = static_cast<double>(t) * direction[i] + sigma * rng.gaussian();
        }
        out.emplace_back(dims, std::move(frame));
    }
    return FrameSequence(std::move(out), Modality::feature);
}

struct BenchReport {
    std::string method;
    double frames_per_second;
    double wall_seconds;  // median over trials
    std::size_t sequences;
};

/// Time each method over the same seeded synthetic sequences; report the
/// median wall time of `trials` runs. Methods run one after another so
/// they never perturb each other's timing.
inline std::vector<BenchReport> bench(const std::vector<PoolingMethod>& methods,
                                      std::size_t frames, std::size_t trials,
                                      std::size_t sequences,
                                      const std::vector<std::size_t>& frame_dims,
                                      std::uint64_t seed) {
    if (frames < 2) {
        throw std::invalid_argument("benchmark sequences need at least two frames");
    }
    if (trials < 3) {
        throw std::invalid_argument("at least three trials are required");
    }
    if (sequences == 0) {
        throw std::invalid_argument("at least one sequence is required");
    }
    SplitMix64 rng(seed);
    std::vector<FrameSequence> inputs;
    inputs.reserve(sequences);
    for (std::size_t s = 0; s < sequences; ++s) {
        inputs.push_back(synthetic_smooth_sequence(frame_dims, frames, rng));
    }

    using clock = std::chrono::steady_clock;
    std::vector<BenchReport> reports;
    reports.reserve(methods.size());
    for (const PoolingMethod& method : methods) {
        std::vector<double> walls(trials);
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const auto begin = clock::now();
            for (const FrameSequence& seq : inputs) {
                pool(seq, method);
            }
            const auto end = clock::now();
            walls[trial] = std::chrono::duration<double>(end - begin).count();
        }
        std::sort(walls.begin(), walls.end());
        double median = (trials % 2 == 1)
                            ? walls[trials / 2]
                            : 0.5 * (walls[trials / 2 - 1] + walls[trials / 2]);
        median = std::max(median, 1e-9); // clock granularity floor
        reports.push_back(BenchReport{to_string(method.kind),
                                      static_cast<double>(sequences * frames) / median, median,
                                      sequences});
    }
    return reports;
}

/// Late fusion: average the per-stream class scores, optionally with
/// nonnegative per-stream weights (normalized by their sum).
inline std::vector<double> fuse_scores(const std::vector<std::vector<double>>& streams,
                                       const std::vector<double>& weights = {}) {
    if (streams.empty()) {
        throw std::invalid_argument("at least one score stream is required");
    }
    const std::size_t classes = streams.front().size();
    if (classes == 0) {
        throw std::invalid_argument("score streams must be nonempty");
    }
    for (const auto& row : streams) {
        if (row.size() != classes) {
            throw std::invalid_argument("score streams must have the same class count");
        }
    }
    std::vector<double> w = weights;
    if (w.empty()) {
        w.assign(streams.size(), 1.0);
    } else if (w.size() != streams.size()) {
        throw std::invalid_argument("weight count does not match stream count");
    }
    double w_sum = 0.0;
    for (double v : w) {
        if (v < 0.0) {
            throw std::invalid_argument("stream weights must be nonnegative");
        }
        w_sum += v;
    }
    if (w_sum == 0.0) {
        throw std::invalid_argument("stream weights must not all be zero");
    }
    std::vector<double> fused(classes, 0.0);
    for (std::size_t s = 0; s < streams.size(); ++s) {
        for (std::size_t c = 0; c < classes; ++c) {
            fused[c] += w[s] * streams[s][c];
        }
    }
    for (double& v : fused) {
        v /= w_sum;
    }
    return fused;
}

} // namespace dynimg
