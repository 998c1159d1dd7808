#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynimg/pooling.hpp"
#include "dynimg/rank_solver.hpp"
#include "dynimg/tensor.hpp"

namespace dynimg {

enum class Merge { none, max, mean, arp_avg, arp_direct };

inline std::string to_string(Merge m) {
    switch (m) {
        case Merge::none: return "none";
        case Merge::max: return "max";
        case Merge::mean: return "mean";
        case Merge::arp_avg: return "arp_avg";
        case Merge::arp_direct: return "arp_direct";
    }
    return "?";
}

/// How a sequence is cut into partially overlapping windows and how the
/// per-window outputs are combined. A disengaged window means the whole
/// sequence (one window). Defaults are window 10, stride 6, max merge.
struct WindowSpec {
    std::optional<std::size_t> window = 10;
    std::size_t stride = 6;
    Merge merge = Merge::max;
};

/// Pooling method selector with its method-specific options.
struct PoolingMethod {
    PoolKind kind = PoolKind::arp_avg;
    double mhi_threshold = 0.05;
    double mhi_duration = 1.0;
    SolverConfig solver{};
};

/// Apply one pooling method to a whole sequence.
inline DynamicImage pool(const FrameSequence& seq, const PoolingMethod& method) {
    switch (method.kind) {
        case PoolKind::arp_avg: return arp(seq, Variant::avg);
        case PoolKind::arp_direct: return arp(seq, Variant::direct);
        case PoolKind::rank_exact: return rank_pool_exact(seq, method.solver).image;
        case PoolKind::mean: return mean_pool(seq);
        case PoolKind::max: return max_pool(seq);
        case PoolKind::mhi: return mhi(seq, method.mhi_threshold, method.mhi_duration);
        case PoolKind::mei: return mei(seq, method.mhi_threshold);
    }
    throw std::logic_error("unhandled pooling kind");
}

/// 1-based inclusive frame ranges of the windows over a length-T sequence.
/// Window k starts at 1 + k*stride and spans the window length, clipped at
/// T; windows are emitted while their start stays within the sequence. A
/// clipped trailing window is kept only if at least 2 frames remain.
inline std::vector<std::pair<std::size_t, std::size_t>> window_ranges(std::size_t frames,
                                                                      const WindowSpec& spec) {
    if (spec.stride == 0) {
        throw std::invalid_argument("stride must be positive");
    }
    if (!spec.window) {
        return {{1, frames}};
    }
    const std::size_t window = *spec.window;
    if (window == 0) {
        throw std::invalid_argument("window length must be positive");
    }
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t start = 1; start <= frames;) {
        const std::size_t end = (window - 1 < frames - start) ? start + window - 1 : frames;
        const std::size_t length = end - start + 1;
        if (length == window || length >= 2) {
            ranges.emplace_back(start, end);
        }
        if (spec.stride > frames - start) {
            break;
        }
        start += spec.stride;
    }
    return ranges;
}

/// Materialize the windows as sub-sequences, in window order.
inline std::vector<FrameSequence> windows(const FrameSequence& seq, const WindowSpec& spec) {
    std::vector<FrameSequence> out;
    for (const auto& [start, end] : window_ranges(seq.length(), spec)) {
        std::vector<Tensor> frames(seq.frames().begin() + static_cast<std::ptrdiff_t>(start - 1),
                                   seq.frames().begin() + static_cast<std::ptrdiff_t>(end));
        out.emplace_back(std::move(frames), seq.modality());
    }
    return out;
}

struct MdiResult {
    std::vector<DynamicImage> images;        // one per window, in window order
    std::optional<DynamicImage> merged;      // engaged when spec.merge != none
};

/// Pool every window with the chosen method; when a merge is requested,
/// additionally stack the per-window outputs in window order and reduce
/// them with the merge pooler. Pooling weights always use each window's
/// own length.
inline MdiResult mdi(const FrameSequence& seq, const WindowSpec& spec,
                     const PoolingMethod& method) {
    const auto ranges = window_ranges(seq.length(), spec);
    if (ranges.empty()) {
        throw std::invalid_argument("window spec yields no windows for this sequence");
    }
    MdiResult result;
    result.images.reserve(ranges.size());
    for (const auto& [start, end] : ranges) {
        std::vector<Tensor> frames(seq.frames().begin() + static_cast<std::ptrdiff_t>(start - 1),
                                   seq.frames().begin() + static_cast<std::ptrdiff_t>(end));
        DynamicImage di = pool(FrameSequence(std::move(frames), seq.modality()), method);
        di.source_range = {start, end};
        result.images.push_back(std::move(di));
    }
    if (spec.merge != Merge::none) {
        std::vector<Tensor> stack;
        stack.reserve(result.images.size());
        for (const DynamicImage& di : result.images) {
            stack.push_back(di.tensor);
        }
        const FrameSequence stacked(std::move(stack), Modality::feature);
        DynamicImage merged = [&] {
            switch (spec.merge) {
                case Merge::max: return max_pool(stacked);
                case Merge::mean: return mean_pool(stacked);
                case Merge::arp_avg: return arp(stacked, Variant::avg);
                case Merge::arp_direct: return arp(stacked, Variant::direct);
                case Merge::none: break;
            }
            throw std::logic_error("unhandled merge kind");
        }();
        merged.source_range = {ranges.front().first, ranges.back().second};
        result.merged = std::move(merged);
    }
    return result;
}

} // namespace dynimg
