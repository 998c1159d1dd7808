#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "dynimg/dynimg.hpp"

namespace testutil {

using namespace dynimg;

/// Random tensor with values k/256, k in 0..255. Dyadic values keep sums
/// with small integer weights exact, so order-of-summation assertions can
/// be bitwise.
inline Tensor random_dyadic_tensor(const std::vector<std::size_t>& dims, SplitMix64& rng) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    std::vector<double> data(n);
    for (double& v : data) {
        v = static_cast<double>(rng.below(256)) / 256.0;
    }
    return Tensor(dims, std::move(data));
}

inline Tensor random_real_tensor(const std::vector<std::size_t>& dims, SplitMix64& rng) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    std::vector<double> data(n);
    for (double& v : data) {
        v = rng.uniform();
    }
    return Tensor(dims, std::move(data));
}

inline FrameSequence random_dyadic_sequence(const std::vector<std::size_t>& dims,
                                            std::size_t frames, SplitMix64& rng) {
    std::vector<Tensor> out;
    for (std::size_t t = 0; t < frames; ++t) {
        out.push_back(random_dyadic_tensor(dims, rng));
    }
    return FrameSequence(std::move(out));
}

inline FrameSequence random_real_sequence(const std::vector<std::size_t>& dims,
                                          std::size_t frames, SplitMix64& rng) {
    std::vector<Tensor> out;
    for (std::size_t t = 0; t < frames; ++t) {
        out.push_back(random_real_tensor(dims, rng));
    }
    return FrameSequence(std::move(out));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

/// Worst elementwise relative gap, with an absolute floor for entries
/// that are numerically zero on both sides.
inline double max_rel_diff(const Tensor& a, const Tensor& b, double floor = 1e-12) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.dims() != b.dims()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

inline double l2_distance(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

inline double cosine(const Tensor& a, const Tensor& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

/// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        std::string tmpl = (std::filesystem::temp_directory_path() / (tag + ".XXXXXX")).string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (::mkdtemp(buf.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

} // namespace testutil
