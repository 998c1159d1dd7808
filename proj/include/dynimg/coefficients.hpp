#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynimg {

/// Which inputs the closed-form pooling weights apply to.
///   avg    — weights for raw frames, derived through the running means;
///            involves harmonic numbers and sums to zero.
///   direct — weights for raw frames used as-is; linear in t (2t - T - 1).
enum class Variant { avg, direct };

inline std::string to_string(Variant v) {
    return v == Variant::avg ? "avg" : "direct";
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "avg") return Variant::avg;
    if (s == "direct") return Variant::direct;
    throw std::invalid_argument("unknown variant '" + s + "' (expected avg or direct)");
}

/// Per-timestep weights for one pooling flavor over a length-T sequence.
/// Frame-weight kinds (avg, direct) sum to zero; running_mean and direct
/// weights are the integers 2t - T - 1, antisymmetric under reversal.
struct CoefficientVector {
    enum class Kind { avg, direct, running_mean };

    Kind kind;
    std::vector<double> values;

    std::size_t length() const { return values.size(); }
    double operator[](std::size_t t) const { return values.at(t - 1); } // t in 1..T
};

/// n-th harmonic number: sum of 1/i for i = 1..n, by direct ascending
/// summation. harmonic(0) = 0.
inline double harmonic(std::size_t n) {
    double h = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        h += 1.0 / static_cast<double>(i);
    }
    return h;
}

/// Weights applied to the running means: value at t is 2t - T - 1
/// (exact integers). Each later mean is pushed up and each earlier one
/// pushed down by how many ordered pairs it appears in.
inline CoefficientVector running_mean_weights(std::size_t frames) {
    if (frames == 0) {
        throw std::invalid_argument("sequence length must be positive");
    }
    std::vector<double> values(frames);
    const double t_total = static_cast<double>(frames);
    for (std::size_t t = 1; t <= frames; ++t) {
        values[t - 1] = 2.0 * static_cast<double>(t) - t_total - 1.0;
    }
    return CoefficientVector{CoefficientVector::Kind::running_mean, std::move(values)};
}

/// Weights applied to the raw frames.
///
/// avg: value at t is 2(T - t + 1) - (T + 1)(H_T - H_{t-1}), i.e. the
/// running-mean weights folded through the 1/t averaging. Equals the
/// suffix sum over i >= t of (2i - T - 1)/i.
/// direct: value at t is 2t - T - 1.
inline CoefficientVector frame_weights(std::size_t frames, Variant variant) {
    if (frames == 0) {
        throw std::invalid_argument("sequence length must be positive");
    }
    std::vector<double> values(frames);
    const double t_total = static_cast<double>(frames);
    if (variant == Variant::direct) {
        for (std::size_t t = 1; t <= frames; ++t) {
            values[t - 1] = 2.0 * static_cast<double>(t) - t_total - 1.0;
        }
        return CoefficientVector{CoefficientVector::Kind::direct, std::move(values)};
    }
    // Harmonic prefix table: h[i] = H_i, h[0] = 0.
    std::vector<double> h(frames + 1);
    h[0] = 0.0;
    for (std::size_t i = 1; i <= frames; ++i) {
        h[i] = h[i - 1] + 1.0 / static_cast<double>(i);
    }
    for (std::size_t t = 1; t <= frames; ++t) {
        values[t - 1] = 2.0 * (t_total - static_cast<double>(t) + 1.0) -
                        (t_total + 1.0) * (h[frames] - h[t - 1]);
    }
    return CoefficientVector{CoefficientVector::Kind::avg, std::move(values)};
}

} // namespace dynimg
