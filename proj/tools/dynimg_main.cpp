// Command-line frontend: batch pooling, coefficient inspection, ranking
// evaluation, gradient checks, benchmarks, flow quantization and late
// fusion. Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical
// failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynimg/dynimg.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dynimg;

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        parts.push_back(item);
    }
    return parts;
}

std::vector<std::size_t> parse_shape(const std::string& s) {
    std::vector<std::size_t> dims;
    for (const std::string& part : split(s, 'x')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(part, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad shape '" + s + "' (expected e.g. 3x32x32)");
        }
        if (pos != part.size() || v == 0) {
            throw std::invalid_argument("bad shape '" + s + "' (expected e.g. 3x32x32)");
        }
        dims.push_back(static_cast<std::size_t>(v));
    }
    if (dims.empty()) {
        throw std::invalid_argument("shape must not be empty");
    }
    return dims;
}

Modality parse_modality(const std::string& s) {
    if (s == "auto" || s == "feature") return Modality::feature;
    if (s == "rgb") return Modality::rgb;
    if (s == "gray") return Modality::gray;
    if (s == "flow") return Modality::flow;
    throw std::invalid_argument("unknown modality '" + s + "'");
}

Merge parse_merge(const std::string& s) {
    if (s == "none") return Merge::none;
    if (s == "max") return Merge::max;
    if (s == "mean") return Merge::mean;
    if (s == "arp_avg") return Merge::arp_avg;
    if (s == "arp_direct") return Merge::arp_direct;
    throw std::invalid_argument("unknown temporal pooling '" + s + "'");
}

PoolKind parse_method(const std::string& s, Variant variant) {
    if (s == "arp") return variant == Variant::avg ? PoolKind::arp_avg : PoolKind::arp_direct;
    if (s == "arp_avg") return PoolKind::arp_avg;
    if (s == "arp_direct") return PoolKind::arp_direct;
    if (s == "rp" || s == "rank_exact") return PoolKind::rank_exact;
    if (s == "mean") return PoolKind::mean;
    if (s == "max") return PoolKind::max;
    if (s == "mhi") return PoolKind::mhi;
    if (s == "mei") return PoolKind::mei;
    throw std::invalid_argument("unknown method '" + s + "'");
}

std::optional<std::size_t> parse_window(const std::string& s) {
    if (s == "full") {
        return std::nullopt;
    }
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad window '" + s + "' (expected a count or 'full')");
    }
    if (pos != s.size() || v == 0) {
        throw std::invalid_argument("bad window '" + s + "' (expected a count or 'full')");
    }
    return static_cast<std::size_t>(v);
}

fs::path numbered_path(const fs::path& base, std::size_t index) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03zu", index);
    fs::path out = base;
    out.replace_filename(base.stem().string() + suffix + base.extension().string());
    return out;
}

struct PoolOptions {
    std::string input;
    std::string output;
    std::string method = "arp";
    std::string variant = "avg";
    std::string window = "10";
    std::size_t stride = 6;
    std::string temp_pool = "max";
    bool sqrt_pixels = false;
    std::string modality = "auto";
    double clip = 20.0;
    double lambda = 1.0;
    double step_size = 1e-3;
    std::size_t max_iters = 300;
    double rel_tol = 1e-6;
    double mhi_threshold = 0.05;
    double mhi_duration = 1.0;
};

int cmd_pool(const PoolOptions& opt) {
    const Variant variant = variant_from_string(opt.variant);
    PoolingMethod method;
    method.kind = parse_method(opt.method, variant);
    method.mhi_threshold = opt.mhi_threshold;
    method.mhi_duration = opt.mhi_duration;
    method.solver = SolverConfig{opt.lambda, opt.step_size, opt.max_iters, opt.rel_tol};

    WindowSpec spec;
    spec.window = parse_window(opt.window);
    spec.stride = opt.stride;
    spec.merge = parse_merge(opt.temp_pool);

    FrameSequence seq =
        load_sequence(opt.input, parse_modality(opt.modality), FlowEncoding{opt.clip});
    if (opt.sqrt_pixels) {
        seq = di_preprocess(seq);
    }
    const MdiResult result = mdi(seq, spec, method);

    const auto emit = [&](const DynamicImage& di, const fs::path& path) {
        write_image(di_export(di), path);
        std::cout << "wrote " << path.string() << " method=" << to_string(di.method)
                  << " frames=" << di.source_range.first << ".." << di.source_range.second
                  << "\n";
    };
    if (result.merged) {
        emit(*result.merged, opt.output);
    } else if (result.images.size() == 1) {
        emit(result.images.front(), opt.output);
    } else {
        for (std::size_t k = 0; k < result.images.size(); ++k) {
            emit(result.images[k], numbered_path(opt.output, k));
        }
    }
    return 0;
}

struct CoeffOptions {
    std::size_t length = 0;
    std::string variant = "avg";
};

int cmd_coeffs(const CoeffOptions& opt) {
    const CoefficientVector cv = opt.variant == "beta"
                                     ? running_mean_weights(opt.length)
                                     : frame_weights(opt.length, variant_from_string(opt.variant));
    for (std::size_t t = 1; t <= cv.length(); ++t) {
        std::cout << t << "," << fmt_real(cv[t]) << "\n";
    }
    return 0;
}

struct RankAccOptions {
    std::string input;
    std::string method = "arp";
    std::string variant = "avg";
    std::string modality = "auto";
    double clip = 20.0;
    bool sqrt_pixels = false;
    double lambda = 1.0;
    double step_size = 1e-3;
    std::size_t max_iters = 300;
    double rel_tol = 1e-6;
};

int cmd_rank_acc(const RankAccOptions& opt) {
    FrameSequence seq =
        load_sequence(opt.input, parse_modality(opt.modality), FlowEncoding{opt.clip});
    if (opt.sqrt_pixels) {
        seq = di_preprocess(seq);
    }
    const Variant variant = variant_from_string(opt.variant);
    Tensor params = [&] {
        if (opt.method == "arp") {
            return arp(seq, variant).tensor;
        }
        if (opt.method == "rp") {
            return rank_pool_exact(seq,
                                   SolverConfig{opt.lambda, opt.step_size, opt.max_iters,
                                                opt.rel_tol})
                .image.tensor;
        }
        throw std::invalid_argument("unknown method '" + opt.method + "' (expected arp or rp)");
    }();
    const RankingReport report = ranking_accuracy(params, seq);
    std::cout << "accuracy,pairs_correct,pairs_total\n"
              << fmt_real(report.accuracy) << "," << report.pairs_correct << ","
              << report.pairs_total << "\n";
    return 0;
}

struct GradCheckOptions {
    std::string shape = "3x4x4";
    std::size_t frames = 7;
    std::string variant = "avg";
    double epsilon = 1e-5;
};

int cmd_gradcheck(const GradCheckOptions& opt, std::uint64_t seed) {
    RankPoolLayer layer(variant_from_string(opt.variant));
    const GradCheckReport report =
        gradcheck(layer, parse_shape(opt.shape), opt.frames, opt.epsilon, seed);
    std::cout << (report.pass ? "pass" : "fail")
              << " max_rel_error=" << fmt_real(report.max_rel_error) << "\n";
    return report.pass ? 0 : 3;
}

struct BenchOptions {
    std::size_t frames = 150;
    std::size_t trials = 5;
    std::size_t sequences = 4;
    std::string shape = "3x32x32";
    std::string methods = "arp,rp";
    double lambda = 1.0;
    double step_size = 1e-3;
    std::size_t max_iters = 300;
    double rel_tol = 1e-6;
};

int cmd_bench(const BenchOptions& opt, std::uint64_t seed) {
    std::vector<PoolingMethod> methods;
    for (const std::string& name : split(opt.methods, ',')) {
        PoolingMethod m;
        m.kind = parse_method(name, Variant::avg);
        m.solver = SolverConfig{opt.lambda, opt.step_size, opt.max_iters, opt.rel_tol};
        methods.push_back(m);
    }
    const auto reports =
        bench(methods, opt.frames, opt.trials, opt.sequences, parse_shape(opt.shape), seed);
    std::cout << "method,frames_per_second,wall_seconds,sequences\n";
    for (const BenchReport& r : reports) {
        std::cout << r.method << "," << fmt_real(r.frames_per_second) << ","
                  << fmt_real(r.wall_seconds) << "," << r.sequences << "\n";
    }
    return 0;
}

struct FlowEncodeOptions {
    std::string input;
    std::string output;
    double clip = 20.0;
};

int cmd_flow_encode(const FlowEncodeOptions& opt) {
    const auto stored = read_tensor_file(opt.input);
    if (!std::holds_alternative<Tensor>(stored)) {
        throw FormatError(opt.input + ": flow encoding expects real-valued input");
    }
    const Tensor& flow = std::get<Tensor>(stored);
    const FlowEncoding enc{opt.clip};
    if (flow.dims().size() == 3) {
        write_tensor_file(flow_encode(flow, enc), opt.output);
    } else if (flow.dims().size() == 4 && flow.dims()[1] == 2) {
        const std::vector<std::size_t> frame_dims(flow.dims().begin() + 1, flow.dims().end());
        const std::size_t frame_size = detail::checked_volume(frame_dims);
        std::vector<std::uint8_t> bytes;
        bytes.reserve(flow.size());
        for (std::size_t t = 0; t < flow.dims()[0]; ++t) {
            const auto begin = flow.data().begin() + static_cast<std::ptrdiff_t>(t * frame_size);
            const ByteTensor frame = flow_encode(
                Tensor(frame_dims, std::vector<double>(begin, begin + frame_size)), enc);
            bytes.insert(bytes.end(), frame.data().begin(), frame.data().end());
        }
        write_tensor_file(ByteTensor(flow.dims(), std::move(bytes)), opt.output);
    } else {
        throw std::invalid_argument(
            "flow input must have shape (2,H,W) or (T,2,H,W), got rank " +
            std::to_string(flow.dims().size()));
    }
    std::cout << "wrote " << opt.output << " clip=" << fmt_real(opt.clip) << "\n";
    return 0;
}

struct FuseOptions {
    std::string input;
    std::string output;
    std::string weights;
};

int cmd_fuse(const FuseOptions& opt) {
    std::ifstream in(opt.input);
    if (!in) {
        throw IoError("cannot open " + opt.input + " for reading");
    }
    std::vector<std::vector<double>> streams;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        bool numeric = true;
        for (const std::string& tok : split(line, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) {
                    numeric = false;
                }
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {
                first = false; // header row
                continue;
            }
            throw FormatError(opt.input + ": non-numeric score row '" + line + "'");
        }
        first = false;
        streams.push_back(std::move(row));
    }
    if (streams.empty()) {
        throw FormatError(opt.input + ": no score rows");
    }

    std::vector<double> weights;
    if (!opt.weights.empty()) {
        for (const std::string& tok : split(opt.weights, ',')) {
            weights.push_back(std::stod(tok));
        }
    }
    const std::vector<double> fused = fuse_scores(streams, weights);

    std::ostringstream out;
    for (std::size_t c = 0; c < fused.size(); ++c) {
        out << (c ? "," : "") << "c" << c;
    }
    out << "\n";
    for (std::size_t c = 0; c < fused.size(); ++c) {
        out << (c ? "," : "") << fmt_real(fused[c]);
    }
    out << "\n";
    if (opt.output.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream file(opt.output, std::ios::trunc);
        if (!file) {
            throw IoError("cannot open " + opt.output + " for writing");
        }
        file << out.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynimg: summarize ordered frame sequences into single images"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "seed for randomized operations")->capture_default_str();

    PoolOptions pool_opt;
    CLI::App* pool_cmd = app.add_subcommand("pool", "pool a frame sequence into dynamic images");
    pool_cmd->add_option("-i,--input", pool_opt.input, "frame directory or tensor container")
        ->required();
    pool_cmd->add_option("-o,--output", pool_opt.output, "output image path")->required();
    pool_cmd->add_option("--method", pool_opt.method, "arp|rp|mean|max|mhi|mei")
        ->capture_default_str();
    pool_cmd->add_option("--variant", pool_opt.variant, "arp variant: avg|direct")
        ->capture_default_str();
    pool_cmd->add_option("--window", pool_opt.window, "window length or 'full'")
        ->capture_default_str();
    pool_cmd->add_option("--stride", pool_opt.stride, "window stride")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--temp-pool", pool_opt.temp_pool,
                         "merge windows: none|max|mean|arp_avg|arp_direct")
        ->capture_default_str();
    pool_cmd->add_flag("--sqrt", pool_opt.sqrt_pixels, "square-root pixel values before pooling");
    pool_cmd->add_option("--modality", pool_opt.modality, "auto|rgb|gray|flow|feature")
        ->capture_default_str();
    pool_cmd->add_option("--clip", pool_opt.clip, "flow clipping displacement")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--lambda", pool_opt.lambda, "rp regularizer weight")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--step-size", pool_opt.step_size, "rp gradient step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--max-iters", pool_opt.max_iters, "rp iteration budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--rel-tol", pool_opt.rel_tol, "rp relative stopping tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--mhi-threshold", pool_opt.mhi_threshold, "motion threshold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pool_cmd->add_option("--mhi-duration", pool_opt.mhi_duration, "motion history duration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CoeffOptions coeff_opt;
    CLI::App* coeffs_cmd =
        app.add_subcommand("coeffs", "print pooling coefficients as CSV (t,value)");
    coeffs_cmd->add_option("--length", coeff_opt.length, "sequence length")
        ->required()
        ->check(CLI::PositiveNumber);
    coeffs_cmd->add_option("--variant", coeff_opt.variant, "avg|direct|beta")
        ->capture_default_str();

    RankAccOptions acc_opt;
    CLI::App* acc_cmd =
        app.add_subcommand("rank-acc", "pairwise ranking accuracy of a pooled model");
    acc_cmd->add_option("-i,--input", acc_opt.input, "frame directory or tensor container")
        ->required();
    acc_cmd->add_option("--method", acc_opt.method, "arp|rp")->capture_default_str();
    acc_cmd->add_option("--variant", acc_opt.variant, "arp variant: avg|direct")
        ->capture_default_str();
    acc_cmd->add_option("--modality", acc_opt.modality, "auto|rgb|gray|flow|feature")
        ->capture_default_str();
    acc_cmd->add_option("--clip", acc_opt.clip, "flow clipping displacement")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    acc_cmd->add_flag("--sqrt", acc_opt.sqrt_pixels, "square-root pixel values first");
    acc_cmd->add_option("--lambda", acc_opt.lambda, "rp regularizer weight")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    acc_cmd->add_option("--step-size", acc_opt.step_size, "rp gradient step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    acc_cmd->add_option("--max-iters", acc_opt.max_iters, "rp iteration budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    acc_cmd->add_option("--rel-tol", acc_opt.rel_tol, "rp relative stopping tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    GradCheckOptions grad_opt;
    CLI::App* grad_cmd =
        app.add_subcommand("gradcheck", "finite-difference check of the pooling layer gradient");
    grad_cmd->add_option("--shape", grad_opt.shape, "feature shape, e.g. 3x4x4")
        ->capture_default_str();
    grad_cmd->add_option("--frames", grad_opt.frames, "stack length")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    grad_cmd->add_option("--variant", grad_opt.variant, "avg|direct")->capture_default_str();
    grad_cmd->add_option("--epsilon", grad_opt.epsilon, "finite-difference step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    BenchOptions bench_opt;
    CLI::App* bench_cmd = app.add_subcommand("bench", "time pooling methods on synthetic videos");
    bench_cmd->add_option("--frames", bench_opt.frames, "frames per sequence")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--trials", bench_opt.trials, "timing repetitions (median reported)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--sequences", bench_opt.sequences, "sequences per trial")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--shape", bench_opt.shape, "frame shape")->capture_default_str();
    bench_cmd->add_option("--methods", bench_opt.methods, "comma list of methods")
        ->capture_default_str();
    bench_cmd->add_option("--lambda", bench_opt.lambda, "rp regularizer weight")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--step-size", bench_opt.step_size, "rp gradient step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--max-iters", bench_opt.max_iters, "rp iteration budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--rel-tol", bench_opt.rel_tol, "rp relative stopping tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    FlowEncodeOptions flow_opt;
    CLI::App* flow_cmd = app.add_subcommand("flow-encode", "quantize real flow fields to bytes");
    flow_cmd->add_option("-i,--input", flow_opt.input, "real-valued tensor container")
        ->required();
    flow_cmd->add_option("-o,--output", flow_opt.output, "output tensor container")->required();
    flow_cmd->add_option("--clip", flow_opt.clip, "clipping displacement")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    FuseOptions fuse_opt;
    CLI::App* fuse_cmd = app.add_subcommand("fuse", "average per-stream class scores");
    fuse_cmd->add_option("-i,--input", fuse_opt.input, "CSV of one score row per stream")
        ->required();
    fuse_cmd->add_option("-o,--output", fuse_opt.output, "output CSV (stdout when omitted)");
    fuse_cmd->add_option("--weights", fuse_opt.weights, "comma list of per-stream weights");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 1;
    }

    try {
        if (pool_cmd->parsed()) return cmd_pool(pool_opt);
        if (coeffs_cmd->parsed()) return cmd_coeffs(coeff_opt);
        if (acc_cmd->parsed()) return cmd_rank_acc(acc_opt);
        if (grad_cmd->parsed()) return cmd_gradcheck(grad_opt, seed);
        if (bench_cmd->parsed()) return cmd_bench(bench_opt, seed);
        if (flow_cmd->parsed()) return cmd_flow_encode(flow_opt);
        if (fuse_cmd->parsed()) return cmd_fuse(fuse_opt);
    } catch (const IoError& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "dynimg: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}
