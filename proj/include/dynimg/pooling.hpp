#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynimg/coefficients.hpp"
#include "dynimg/tensor.hpp"

namespace dynimg {

enum class PoolKind { arp_avg, arp_direct, rank_exact, mean, max, mhi, mei };

inline std::string to_string(PoolKind k) {
    switch (k) {
        case PoolKind::arp_avg: return "arp_avg";
        case PoolKind::arp_direct: return "arp_direct";
        case PoolKind::rank_exact: return "rank_exact";
        case PoolKind::mean: return "mean";
        case PoolKind::max: return "max";
        case PoolKind::mhi: return "mhi";
        case PoolKind::mei: return "mei";
    }
    return "?";
}

/// A pooled summary of a frame range: one tensor of frame shape, plus the
/// method that produced it and the 1-based inclusive source frame range.
struct DynamicImage {
    Tensor tensor;
    PoolKind method;
    std::pair<std::size_t, std::size_t> source_range;
};

/// Approximate rank pooling: the weighted frame sum with closed-form
/// coefficients for the chosen variant. Zero on constant sequences up to
/// roundoff; order-sensitive, unlike mean/max.
inline DynamicImage arp(const FrameSequence& seq, Variant variant) {
    const CoefficientVector w = frame_weights(seq.length(), variant);
    Tensor out = weighted_sum(seq, w.values);
    return DynamicImage{std::move(out),
                        variant == Variant::avg ? PoolKind::arp_avg : PoolKind::arp_direct,
                        {1, seq.length()}};
}

/// Elementwise temporal mean.
inline DynamicImage mean_pool(const FrameSequence& seq) {
    const std::size_t n = seq.frame_size();
    const double t_total = static_cast<double>(seq.length());
    std::vector<double> out(n, 0.0);
    for (const Tensor& f : seq.frames()) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += f[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] /= t_total;
    }
    return DynamicImage{Tensor(seq.frame_dims(), std::move(out)), PoolKind::mean,
                        {1, seq.length()}};
}

/// Elementwise temporal max.
inline DynamicImage max_pool(const FrameSequence& seq) {
    const std::size_t n = seq.frame_size();
    std::vector<double> out = seq.frame(1).data();
    for (std::size_t t = 2; t <= seq.length(); ++t) {
        const std::vector<double>& f = seq.frame(t).data();
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = std::max(out[i], f[i]);
        }
    }
    return DynamicImage{Tensor(seq.frame_dims(), std::move(out)), PoolKind::max,
                        {1, seq.length()}};
}

namespace detail {

/// Reduce (C,H,W) frames to one channel: BT.601 luminance for 3 channels,
/// channel mean otherwise. Frames already single-channel pass through.
inline FrameSequence to_single_channel(const FrameSequence& seq) {
    const std::vector<std::size_t>& d = seq.frame_dims();
    if (d.size() != 3 || d[0] == 1) {
        return seq;
    }
    const std::size_t channels = d[0];
    const std::size_t plane = d[1] * d[2];
    std::vector<double> weights;
    if (channels == 3) {
        weights = {0.299, 0.587, 0.114};
    } else {
        weights.assign(channels, 1.0 / static_cast<double>(channels));
    }
    std::vector<Tensor> frames;
    frames.reserve(seq.length());
    for (const Tensor& f : seq.frames()) {
        std::vector<double> out(plane, 0.0);
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t i = 0; i < plane; ++i) {
                out[i] += weights[c] * f[c * plane + i];
            }
        }
        frames.emplace_back(std::vector<std::size_t>{1, d[1], d[2]}, std::move(out));
    }
    return FrameSequence(std::move(frames), Modality::gray);
}

} // namespace detail

/// Motion history image. Pixels that moved (frame difference above the
/// threshold) are set to `duration`; quiet pixels decay linearly by
/// duration/(T-1) per step, clamped at zero. Brighter output means more
/// recent motion. Values lie in [0, duration].
inline DynamicImage mhi(const FrameSequence& input, double threshold = 0.05,
                        double duration = 1.0) {
    if (input.length() < 2) {
        throw std::invalid_argument("motion history needs at least two frames");
    }
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("motion threshold must be positive");
    }
    if (!(duration > 0.0)) {
        throw std::invalid_argument("motion duration must be positive");
    }
    const FrameSequence seq = detail::to_single_channel(input);
    const std::size_t n = seq.frame_size();
    const double decay = duration / static_cast<double>(seq.length() - 1);
    std::vector<double> history(n, 0.0);
    for (std::size_t t = 2; t <= seq.length(); ++t) {
        const std::vector<double>& cur = seq.frame(t).data();
        const std::vector<double>& prev = seq.frame(t - 1).data();
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(cur[i] - prev[i]) > threshold) {
                history[i] = duration;
            } else {
                history[i] = std::max(0.0, history[i] - decay);
            }
        }
    }
    return DynamicImage{Tensor(seq.frame_dims(), std::move(history)), PoolKind::mhi,
                        {1, seq.length()}};
}

/// Motion energy image: 1 where any step moved, 0 elsewhere.
inline DynamicImage mei(const FrameSequence& input, double threshold = 0.05) {
    if (input.length() < 2) {
        throw std::invalid_argument("motion energy needs at least two frames");
    }
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("motion threshold must be positive");
    }
    const FrameSequence seq = detail::to_single_channel(input);
    const std::size_t n = seq.frame_size();
    std::vector<double> energy(n, 0.0);
    for (std::size_t t = 2; t <= seq.length(); ++t) {
        const std::vector<double>& cur = seq.frame(t).data();
        const std::vector<double>& prev = seq.frame(t - 1).data();
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(cur[i] - prev[i]) > threshold) {
                energy[i] = 1.0;
            }
        }
    }
    return DynamicImage{Tensor(seq.frame_dims(), std::move(energy)), PoolKind::mei,
                        {1, seq.length()}};
}

/// Elementwise square root of every frame, the pixel nonlinearity applied
/// before pooling. Input must be nonnegative (pixels in [0,1] after load).
inline FrameSequence di_preprocess(const FrameSequence& seq) {
    std::vector<Tensor> frames;
    frames.reserve(seq.length());
    for (const Tensor& f : seq.frames()) {
        std::vector<double> out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (f[i] < 0.0) {
                throw std::domain_error("square-root preprocessing requires nonnegative values");
            }
            out[i] = std::sqrt(f[i]);
        }
        frames.emplace_back(f.dims(), std::move(out));
    }
    return FrameSequence(std::move(frames), seq.modality());
}

/// Rescale a dynamic image to 8-bit range with a joint min-max over all
/// channels: round(255 (v - min) / (max - min)), half away from zero.
/// Degenerate images (max == min) map to all 128.
inline ByteTensor di_export(const DynamicImage& di) {
    const Tensor& t = di.tensor;
    const auto [lo_it, hi_it] = std::minmax_element(t.data().begin(), t.data().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<std::uint8_t> bytes(t.size());
    if (hi == lo) {
        std::fill(bytes.begin(), bytes.end(), std::uint8_t{128});
    } else {
        const double span = hi - lo;
        for (std::size_t i = 0; i < t.size(); ++i) {
            bytes[i] = static_cast<std::uint8_t>(std::round(255.0 * (t[i] - lo) / span));
        }
    }
    return ByteTensor(t.dims(), std::move(bytes));
}

} // namespace dynimg
