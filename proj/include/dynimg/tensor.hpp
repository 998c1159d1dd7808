#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dynimg {

namespace detail {

inline std::size_t checked_volume(const std::vector<std::size_t>& dims) {
    if (dims.empty()) {
        throw std::invalid_argument("tensor must have at least one dimension");
    }
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) {
            throw std::invalid_argument("tensor dimensions must be positive");
        }
        n *= d;
    }
    return n;
}

} // namespace detail

/// Dense tensor of 64-bit reals, row-major flat layout. Image-like tensors
/// use the dimension order (channels, height, width). Immutable after
/// construction; every element is finite.
class Tensor {
public:
    Tensor(std::vector<std::size_t> dims, std::vector<double> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (detail::checked_volume(dims_) != data_.size()) {
            throw std::invalid_argument("tensor data length does not match dimensions");
        }
        for (double v : data_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("tensor elements must be finite");
            }
        }
    }

    static Tensor zeros(std::vector<std::size_t> dims) {
        std::size_t n = detail::checked_volume(dims);
        return Tensor(std::move(dims), std::vector<double>(n, 0.0));
    }

    static Tensor full(std::vector<std::size_t> dims, double value) {
        std::size_t n = detail::checked_volume(dims);
        return Tensor(std::move(dims), std::vector<double>(n, value));
    }

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    const std::vector<double>& data() const { return data_; }
    double operator[](std::size_t i) const { return data_[i]; }

    bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

/// Dense tensor of 8-bit values, same layout conventions as Tensor.
/// Export form of dynamic images and storage form of quantized flow.
class ByteTensor {
public:
    ByteTensor(std::vector<std::size_t> dims, std::vector<std::uint8_t> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (detail::checked_volume(dims_) != data_.size()) {
            throw std::invalid_argument("tensor data length does not match dimensions");
        }
    }

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    const std::vector<std::uint8_t>& data() const { return data_; }
    std::uint8_t operator[](std::size_t i) const { return data_[i]; }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::uint8_t> data_;
};

enum class Modality { rgb, gray, flow, feature };

inline std::string to_string(Modality m) {
    switch (m) {
        case Modality::rgb: return "rgb";
        case Modality::gray: return "gray";
        case Modality::flow: return "flow";
        case Modality::feature: return "feature";
    }
    return "feature";
}

/// Ordered stack of equally-shaped frames (images or feature maps).
/// The position t in 1..T is the temporal order used by every pooler.
class FrameSequence {
public:
    explicit FrameSequence(std::vector<Tensor> frames, Modality modality = Modality::feature)
        : frames_(std::move(frames)), modality_(modality) {
        if (frames_.empty()) {
            throw std::invalid_argument("frame sequence must contain at least one frame");
        }
        for (const Tensor& f : frames_) {
            if (!f.same_shape(frames_.front())) {
                throw std::invalid_argument("all frames must share the same shape");
            }
        }
    }

    std::size_t length() const { return frames_.size(); }
    const std::vector<std::size_t>& frame_dims() const { return frames_.front().dims(); }
    std::size_t frame_size() const { return frames_.front().size(); }
    Modality modality() const { return modality_; }

    /// Frame at temporal index t in 1..T.
    const Tensor& frame(std::size_t t) const {
        if (t < 1 || t > frames_.size()) {
            throw std::out_of_range("frame index out of range");
        }
        return frames_[t - 1];
    }

    const std::vector<Tensor>& frames() const { return frames_; }

private:
    std::vector<Tensor> frames_;
    Modality modality_;
};

/// Per-timestep averages of the frames up to each t. means(1) equals
/// frame 1 bitwise; a constant sequence yields the constant back bitwise.
class RunningMeanSequence {
public:
    explicit RunningMeanSequence(std::vector<Tensor> means) : means_(std::move(means)) {
        if (means_.empty()) {
            throw std::invalid_argument("running mean sequence must be nonempty");
        }
    }

    std::size_t length() const { return means_.size(); }

    const Tensor& mean(std::size_t t) const {
        if (t < 1 || t > means_.size()) {
            throw std::out_of_range("mean index out of range");
        }
        return means_[t - 1];
    }

    const std::vector<Tensor>& means() const { return means_; }

private:
    std::vector<Tensor> means_;
};

/// Time averages of the frames up to each t, accumulated in ascending t.
/// Uses the incremental update m += (x - m)/t, which leaves constant
/// inputs bitwise unchanged.
inline RunningMeanSequence running_means(const FrameSequence& seq) {
    const std::size_t n = seq.frame_size();
    std::vector<Tensor> means;
    means.reserve(seq.length());
    std::vector<double> acc = seq.frame(1).data();
    means.push_back(seq.frame(1));
    for (std::size_t t = 2; t <= seq.length(); ++t) {
        const std::vector<double>& x = seq.frame(t).data();
        const double inv_t = 1.0 / static_cast<double>(t);
        for (std::size_t i = 0; i < n; ++i) {
            acc[i] += (x[i] - acc[i]) * inv_t;
        }
        means.emplace_back(seq.frame_dims(), acc);
    }
    return RunningMeanSequence(std::move(means));
}

/// Weighted sum over the temporal axis: out = sum_t w[t] * frame_t,
/// accumulated in ascending t for bit-reproducibility.
inline Tensor weighted_sum(const FrameSequence& seq, const std::vector<double>& weights) {
    if (weights.size() != seq.length()) {
        throw std::invalid_argument("weight count " + std::to_string(weights.size()) +
                                    " does not match sequence length " +
                                    std::to_string(seq.length()));
    }
    const std::size_t n = seq.frame_size();
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < weights.size(); ++t) {
        const std::vector<double>& f = seq.frames()[t].data();
        const double w = weights[t];
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += w * f[i];
        }
    }
    return Tensor(seq.frame_dims(), std::move(out));
}

/// Same frames in reverse temporal order.
inline FrameSequence reversed(const FrameSequence& seq) {
    std::vector<Tensor> frames(seq.frames().rbegin(), seq.frames().rend());
    return FrameSequence(std::move(frames), seq.modality());
}

/// Euclidean inner product of two equally-shaped tensors.
inline double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("dot product requires matching shapes");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace dynimg
