#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dynimg/coefficients.hpp"
#include "dynimg/rng.hpp"
#include "dynimg/tensor.hpp"

namespace dynimg {

/// Temporal pooling layer whose forward pass is the closed-form weighted
/// frame sum and whose backward pass scales the upstream gradient by the
/// per-frame weight. The weights depend only on the sequence length, so
/// the backward pass is exact, not approximate.
///
/// An instance carries the length of its pending forward pass; a backward
/// call with a different length is a wiring error and throws. Distinct
/// instances are independent.
class RankPoolLayer {
public:
    explicit RankPoolLayer(Variant variant = Variant::avg) : variant_(variant) {}

    Variant variant() const { return variant_; }

    /// Pool a stack of feature tensors over the temporal axis.
    Tensor forward(const FrameSequence& inputs) {
        const std::size_t frames = inputs.length();
        const std::vector<double>& w = weights_for(frames);
        forward_frames_ = frames;
        return weighted_sum(inputs, w);
    }

    /// Per-frame input gradients: weight_t times the upstream gradient.
    /// `frames` must match the preceding forward call.
    std::vector<Tensor> backward(const Tensor& upstream, std::size_t frames) const {
        if (!forward_frames_ || *forward_frames_ != frames) {
            throw std::logic_error("backward length does not match the preceding forward");
        }
        const std::vector<double>& w = cache_.at(frames).values;
        std::vector<Tensor> grads;
        grads.reserve(frames);
        for (std::size_t t = 0; t < frames; ++t) {
            std::vector<double> g(upstream.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] = w[t] * upstream[i];
            }
            grads.emplace_back(upstream.dims(), std::move(g));
        }
        return grads;
    }

private:
    const std::vector<double>& weights_for(std::size_t frames) {
        auto it = cache_.find(frames);
        if (it == cache_.end()) {
            it = cache_.emplace(frames, frame_weights(frames, variant_)).first;
        }
        return it->second.values;
    }

    Variant variant_;
    std::unordered_map<std::size_t, CoefficientVector> cache_;
    std::optional<std::size_t> forward_frames_;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    bool pass = true;
};

namespace detail {

inline double relative_gap(double a, double b) {
    const double m = std::max(std::abs(a), std::abs(b));
    return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

} // namespace detail

/// Compare a layer's analytic backward pass against central finite
/// differences of the scalar loss L = sum of forward outputs, on random
/// inputs drawn from the seeded generator. Passes iff the worst relative
/// error stays below 1e-5. Works for any layer exposing
/// forward(FrameSequence) -> Tensor and backward(Tensor, size_t).
template <typename Layer>
GradCheckReport gradcheck(Layer& layer, const std::vector<std::size_t>& shape,
                          std::size_t frames, double epsilon, std::uint64_t seed) {
    if (!(epsilon > 0.0) || epsilon > 1e-2) {
        throw std::invalid_argument("epsilon must lie in (0, 1e-2]");
    }
    if (frames == 0) {
        throw std::invalid_argument("at least one frame is required");
    }
    const std::size_t n = detail::checked_volume(shape);

    SplitMix64 rng(seed);
    std::vector<std::vector<double>> inputs(frames, std::vector<double>(n));
    for (auto& frame : inputs) {
        for (double& v : frame) {
            v = rng.uniform();
        }
    }

    const auto loss = [&](const std::vector<std::vector<double>>& data) {
        std::vector<Tensor> stack;
        stack.reserve(frames);
        for (const auto& frame : data) {
            stack.emplace_back(shape, frame);
        }
        const Tensor out = layer.forward(FrameSequence(std::move(stack)));
        double total = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            total += out[i];
        }
        return total;
    };

    loss(inputs); // prime the layer so backward sees the right length
    const std::vector<Tensor> analytic =
        layer.backward(Tensor::full(shape, 1.0), frames);

    GradCheckReport report;
    std::vector<std::vector<double>> probe = inputs;
    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double saved = probe[t][i];
            probe[t][i] = saved + epsilon;
            const double hi = loss(probe);
            probe[t][i] = saved - epsilon;
            const double lo = loss(probe);
            probe[t][i] = saved;
            const double numeric = (hi - lo) / (2.0 * epsilon);
            const double gap = detail::relative_gap(analytic[t][i], numeric);
            report.max_rel_error = std::max(report.max_rel_error, gap);
        }
    }
    report.pass = report.max_rel_error < 1e-5;
    return report;
}

} // namespace dynimg
