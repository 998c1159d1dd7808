#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "dynimg/errors.hpp"
#include "dynimg/tensor.hpp"

namespace dynimg {

/// Quantization convention for optical-flow values: displacements are
/// clipped to [-clip, +clip] pixels and rescaled to bytes 0..255.
struct FlowEncoding {
    double clip = 20.0;
};

/// Quantize a (2,H,W) flow tensor to bytes: clamp to +-clip, then map
/// linearly so -clip -> 0 and +clip -> 255, rounding half away from zero.
/// Zero flow lands on byte 128.
inline ByteTensor flow_encode(const Tensor& flow, const FlowEncoding& enc = {}) {
    if (!(enc.clip > 0.0)) {
        throw std::invalid_argument("flow clip must be positive");
    }
    if (flow.dims().size() != 3 || flow.dims()[0] != 2) {
        throw std::invalid_argument("flow tensors must have shape (2, height, width)");
    }
    std::vector<std::uint8_t> bytes(flow.size());
    const double clip = enc.clip;
    for (std::size_t i = 0; i < flow.size(); ++i) {
        const double v = std::clamp(flow[i], -clip, clip);
        bytes[i] = static_cast<std::uint8_t>(std::round(255.0 * (v + clip) / (2.0 * clip)));
    }
    return ByteTensor(flow.dims(), std::move(bytes));
}

/// Inverse of flow_encode up to quantization: byte b maps back to
/// (b/255) * 2 clip - clip.
inline Tensor flow_decode(const ByteTensor& bytes, const FlowEncoding& enc = {}) {
    if (!(enc.clip > 0.0)) {
        throw std::invalid_argument("flow clip must be positive");
    }
    if (bytes.dims().size() != 3 || bytes.dims()[0] != 2) {
        throw FormatError("quantized flow must have shape (2, height, width)");
    }
    std::vector<double> values(bytes.size());
    const double clip = enc.clip;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        values[i] = (static_cast<double>(bytes[i]) / 255.0) * 2.0 * clip - clip;
    }
    return Tensor(bytes.dims(), std::move(values));
}

// ---------------------------------------------------------------------------
// Raw tensor container ("DYNT"): magic, u32 version = 1, u32 ndim,
// ndim x u64 dims, u32 dtype (1 = f32, 2 = f64, 3 = u8), row-major
// little-endian payload.
// ---------------------------------------------------------------------------

enum class TensorDtype : std::uint32_t { f32 = 1, f64 = 2, u8 = 3 };

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    }
    return v;
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return v;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed to write " + path.string());
    }
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("failed to read " + path.string());
    }
    return bytes;
}

inline std::vector<std::uint8_t> tensor_file_header(const std::vector<std::size_t>& dims,
                                                    TensorDtype dtype) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'D', 'Y', 'N', 'T'});
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) {
        put_u64(out, static_cast<std::uint64_t>(d));
    }
    put_u32(out, static_cast<std::uint32_t>(dtype));
    return out;
}

} // namespace detail

inline void write_tensor_file(const Tensor& tensor, const std::filesystem::path& path) {
    std::vector<std::uint8_t> out = detail::tensor_file_header(tensor.dims(), TensorDtype::f64);
    out.reserve(out.size() + tensor.size() * 8);
    for (double v : tensor.data()) {
        detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    detail::write_file_bytes(path, out);
}

inline void write_tensor_file(const ByteTensor& tensor, const std::filesystem::path& path) {
    std::vector<std::uint8_t> out = detail::tensor_file_header(tensor.dims(), TensorDtype::u8);
    out.insert(out.end(), tensor.data().begin(), tensor.data().end());
    detail::write_file_bytes(path, out);
}

/// Read a "DYNT" container; f32 payloads are promoted to 64-bit reals.
inline std::variant<Tensor, ByteTensor> read_tensor_file(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "DYNT", 4) != 0) {
        throw FormatError(path.string() + " is not a tensor container");
    }
    if (detail::get_u32(bytes.data() + 4) != 1) {
        throw FormatError(path.string() + ": unsupported tensor container version");
    }
    const std::uint32_t ndim = detail::get_u32(bytes.data() + 8);
    if (ndim == 0 || bytes.size() < 16 + 8 * static_cast<std::size_t>(ndim)) {
        throw FormatError(path.string() + ": truncated tensor header");
    }
    std::vector<std::size_t> dims(ndim);
    std::size_t volume = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        dims[i] = static_cast<std::size_t>(detail::get_u64(bytes.data() + 12 + 8 * i));
        if (dims[i] == 0 || dims[i] > bytes.size()) {
            throw FormatError(path.string() + ": implausible dimension in tensor header");
        }
        volume *= dims[i];
        if (volume > bytes.size()) {
            throw FormatError(path.string() + ": payload length mismatch");
        }
    }
    const std::size_t payload_at = 16 + 8 * static_cast<std::size_t>(ndim);
    const std::uint32_t dtype = detail::get_u32(bytes.data() + payload_at - 4);
    const std::uint8_t* payload = bytes.data() + payload_at;
    const std::size_t payload_len = bytes.size() - payload_at;

    switch (static_cast<TensorDtype>(dtype)) {
        case TensorDtype::u8: {
            if (payload_len != volume) {
                throw FormatError(path.string() + ": payload length mismatch");
            }
            return ByteTensor(std::move(dims),
                              std::vector<std::uint8_t>(payload, payload + volume));
        }
        case TensorDtype::f32: {
            if (payload_len != volume * 4) {
                throw FormatError(path.string() + ": payload length mismatch");
            }
            std::vector<double> values(volume);
            for (std::size_t i = 0; i < volume; ++i) {
                values[i] = static_cast<double>(
                    std::bit_cast<float>(detail::get_u32(payload + 4 * i)));
            }
            return Tensor(std::move(dims), std::move(values));
        }
        case TensorDtype::f64: {
            if (payload_len != volume * 8) {
                throw FormatError(path.string() + ": payload length mismatch");
            }
            std::vector<double> values(volume);
            for (std::size_t i = 0; i < volume; ++i) {
                values[i] = std::bit_cast<double>(detail::get_u64(payload + 8 * i));
            }
            return Tensor(std::move(dims), std::move(values));
        }
    }
    throw FormatError(path.string() + ": unknown tensor dtype code");
}

// ---------------------------------------------------------------------------
// Image codecs. Decoded images are planar (channels, height, width) bytes.
// ---------------------------------------------------------------------------

namespace detail {

inline ByteTensor planar_from_interleaved(const std::vector<std::uint8_t>& buf,
                                          std::size_t channels, std::size_t height,
                                          std::size_t width) {
    std::vector<std::uint8_t> planar(channels * height * width);
    const std::size_t plane = height * width;
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < channels; ++c) {
            planar[c * plane + p] = buf[p * channels + c];
        }
    }
    return ByteTensor({channels, height, width}, std::move(planar));
}

inline std::vector<std::uint8_t> interleaved_from_planar(const ByteTensor& t) {
    const std::size_t channels = t.dims()[0];
    const std::size_t plane = t.dims()[1] * t.dims()[2];
    std::vector<std::uint8_t> buf(t.size());
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < channels; ++c) {
            buf[p * channels + c] = t.data()[c * plane + p];
        }
    }
    return buf;
}

inline ByteTensor decode_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw FormatError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    std::size_t channels = 1;
    if (image.format & PNG_FORMAT_FLAG_COLOR) {
        image.format = PNG_FORMAT_RGB;
        channels = 3;
    } else if (image.format & PNG_FORMAT_FLAG_ALPHA) {
        image.format = PNG_FORMAT_GA;
        channels = 2;
    } else {
        image.format = PNG_FORMAT_GRAY;
    }
    const std::size_t height = image.height;
    const std::size_t width = image.width;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        throw FormatError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    return planar_from_interleaved(buf, channels, height, width);
}

inline void encode_png(const ByteTensor& t, const std::filesystem::path& path) {
    const std::size_t channels = t.dims()[0];
    std::vector<std::uint8_t> buf = interleaved_from_planar(t);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(t.dims()[2]);
    image.height = static_cast<png_uint_32>(t.dims()[1]);
    image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

struct JpegErrorHook {
    jpeg_error_mgr pub;
    std::jmp_buf env;
};

inline ByteTensor decode_jpeg(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(
        std::fopen(path.string().c_str(), "rb"), &std::fclose);
    if (!file) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    jpeg_decompress_struct cinfo;
    JpegErrorHook hook;
    cinfo.err = jpeg_std_error(&hook.pub);
    hook.pub.error_exit = [](j_common_ptr ci) {
        std::longjmp(reinterpret_cast<JpegErrorHook*>(ci->err)->env, 1);
    };
    std::vector<std::uint8_t> buf;
    if (setjmp(hook.env)) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("cannot decode JPEG " + path.string());
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);
    const std::size_t channels = static_cast<std::size_t>(cinfo.output_components);
    const std::size_t height = cinfo.output_height;
    const std::size_t width = cinfo.output_width;
    buf.resize(channels * height * width);
    while (cinfo.output_scanline < cinfo.output_height) {
        std::uint8_t* row = buf.data() + cinfo.output_scanline * width * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return planar_from_interleaved(buf, channels, height, width);
}

/// Portable anymap parser: P2/P5 grayscale and P3/P6 color, 8-bit depth.
inline ByteTensor decode_pnm(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    std::size_t pos = 0;
    const auto fail = [&](const std::string& why) -> FormatError {
        return FormatError("cannot decode " + path.string() + ": " + why);
    };
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto next_int = [&]() -> std::size_t {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
            throw fail("malformed header");
        }
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            ++pos;
        }
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P') {
        throw fail("not a portable anymap");
    }
    const char kind = static_cast<char>(bytes[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
        throw fail("unsupported anymap type");
    }
    pos = 2;
    const std::size_t width = next_int();
    const std::size_t height = next_int();
    const std::size_t maxval = next_int();
    if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
        throw fail("unsupported anymap geometry or depth");
    }
    const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;
    const std::size_t count = channels * height * width;
    std::vector<std::uint8_t> buf(count);
    if (kind == '5' || kind == '6') {
        ++pos; // single whitespace after maxval
        if (pos >= bytes.size() || bytes.size() - pos < count) {
            throw fail("truncated pixel data");
        }
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), count, buf.begin());
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t v = next_int();
            if (v > maxval) {
                throw fail("sample exceeds maxval");
            }
            buf[i] = static_cast<std::uint8_t>(v);
        }
    }
    if (maxval != 255) {
        for (std::uint8_t& b : buf) {
            b = static_cast<std::uint8_t>(
                std::round(255.0 * static_cast<double>(b) / static_cast<double>(maxval)));
        }
    }
    return planar_from_interleaved(buf, channels, height, width);
}

/// Decode by magic bytes, independent of the file extension.
inline ByteTensor decode_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::uint8_t magic[4] = {0, 0, 0, 0};
    probe.read(reinterpret_cast<char*>(magic), 4);
    probe.close();
    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
        return decode_png(path);
    }
    if (magic[0] == 0xff && magic[1] == 0xd8) {
        return decode_jpeg(path);
    }
    if (magic[0] == 'P' &&
        (magic[1] == '2' || magic[1] == '3' || magic[1] == '5' || magic[1] == '6')) {
        return decode_pnm(path);
    }
    throw FormatError(path.string() + " is not a recognized image format");
}

} // namespace detail

/// Write an 8-bit tensor: PNG for 1- and 3-channel images, the raw tensor
/// container otherwise (2-channel flow has no native PNG layout). Bytes
/// are deterministic for identical inputs.
inline void write_image(const ByteTensor& image, const std::filesystem::path& path) {
    if (image.dims().size() == 3 && (image.dims()[0] == 1 || image.dims()[0] == 3)) {
        detail::encode_png(image, path);
    } else {
        write_tensor_file(image, path);
    }
}

/// Store a frame sequence as one f64 tensor container with a leading
/// temporal dimension: (T, frame dims...).
inline void write_sequence(const FrameSequence& seq, const std::filesystem::path& path) {
    std::vector<std::size_t> dims;
    dims.push_back(seq.length());
    dims.insert(dims.end(), seq.frame_dims().begin(), seq.frame_dims().end());
    std::vector<std::uint8_t> out = detail::tensor_file_header(dims, TensorDtype::f64);
    out.reserve(out.size() + seq.length() * seq.frame_size() * 8);
    for (const Tensor& frame : seq.frames()) {
        for (double v : frame.data()) {
            detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    detail::write_file_bytes(path, out);
}

/// Load a sequence from a directory of image frames or from a tensor
/// container with a leading temporal dimension.
///
/// Directory frames are ordered by byte-wise lexicographic filename
/// comparison. 8-bit pixels are normalized to [0,1]; with the flow
/// modality, 8-bit data is instead dequantized through flow_decode.
/// Real-valued container payloads are used as-is.
inline FrameSequence load_sequence(const std::filesystem::path& path,
                                   Modality modality = Modality::feature,
                                   const FlowEncoding& enc = {}) {
    const auto promote = [&](const ByteTensor& img) -> Tensor {
        if (modality == Modality::flow) {
            return flow_decode(img, enc);
        }
        std::vector<double> values(img.size());
        for (std::size_t i = 0; i < img.size(); ++i) {
            values[i] = static_cast<double>(img[i]) / 255.0;
        }
        return Tensor(img.dims(), std::move(values));
    };

    std::vector<Tensor> frames;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        if (files.empty()) {
            throw IoError("no frames found in " + path.string());
        }
        std::sort(files.begin(), files.end(),
                  [](const std::filesystem::path& a, const std::filesystem::path& b) {
                      return a.filename().string() < b.filename().string();
                  });
        frames.reserve(files.size());
        for (const auto& file : files) {
            frames.push_back(promote(detail::decode_image(file)));
        }
    } else if (std::filesystem::exists(path)) {
        const auto stored = read_tensor_file(path);
        const std::vector<std::size_t>& dims = std::holds_alternative<Tensor>(stored)
                                                   ? std::get<Tensor>(stored).dims()
                                                   : std::get<ByteTensor>(stored).dims();
        if (dims.size() < 2) {
            throw FormatError(path.string() +
                              ": sequence containers need a leading temporal dimension");
        }
        const std::size_t t_total = dims[0];
        const std::vector<std::size_t> frame_dims(dims.begin() + 1, dims.end());
        const std::size_t frame_size = detail::checked_volume(frame_dims);
        frames.reserve(t_total);
        if (std::holds_alternative<Tensor>(stored)) {
            const std::vector<double>& all = std::get<Tensor>(stored).data();
            for (std::size_t t = 0; t < t_total; ++t) {
                frames.emplace_back(frame_dims,
                                    std::vector<double>(all.begin() + t * frame_size,
                                                        all.begin() + (t + 1) * frame_size));
            }
        } else {
            const std::vector<std::uint8_t>& all = std::get<ByteTensor>(stored).data();
            for (std::size_t t = 0; t < t_total; ++t) {
                frames.push_back(promote(ByteTensor(
                    frame_dims, std::vector<std::uint8_t>(all.begin() + t * frame_size,
                                                          all.begin() + (t + 1) * frame_size))));
            }
        }
    } else {
        throw IoError(path.string() + " does not exist");
    }

    try {
        return FrameSequence(std::move(frames), modality);
    } catch (const std::invalid_argument& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace dynimg
