#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace dynimg;
using namespace testutil;
using Catch::Matchers::WithinAbs;

namespace {

FrameSequence scalars(std::initializer_list<double> values) {
    std::vector<Tensor> frames;
    for (double v : values) {
        frames.emplace_back(std::vector<std::size_t>{1}, std::vector<double>{v});
    }
    return FrameSequence(std::move(frames));
}

FrameSequence combine(const FrameSequence& a, const FrameSequence& b, double ca, double cb) {
    std::vector<Tensor> frames;
    for (std::size_t t = 1; t <= a.length(); ++t) {
        std::vector<double> data(a.frame_size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            data[i] = ca * a.frame(t)[i] + cb * b.frame(t)[i];
        }
        frames.emplace_back(a.frame_dims(), std::move(data));
    }
    return FrameSequence(std::move(frames));
}

Tensor scale(const Tensor& t, double c) {
    std::vector<double> data(t.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = c * t[i];
    }
    return Tensor(t.dims(), std::move(data));
}

} // namespace

TEST_CASE("arp matches hand expansions") {
    const DynamicImage avg2 = arp(scalars({0, 1}), Variant::avg);
    CHECK_THAT(avg2.tensor[0], WithinAbs(0.5, 1e-15));
    CHECK(avg2.method == PoolKind::arp_avg);
    CHECK(avg2.source_range == std::pair<std::size_t, std::size_t>{1, 2});

    const DynamicImage dir3 = arp(scalars({1, 2, 3}), Variant::direct);
    CHECK(dir3.tensor[0] == 4.0); // -2*1 + 0*2 + 2*3
}

TEST_CASE("arp of a constant sequence is zero") {
    std::vector<Tensor> frames(9, Tensor::full({2, 3, 3}, 0.37));
    const FrameSequence seq(std::move(frames));
    for (Variant v : {Variant::avg, Variant::direct}) {
        const Tensor out = arp(seq, v).tensor;
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(std::abs(out[i]) <= 1e-12);
        }
    }
}

TEST_CASE("arp avg equals the literal running-mean combination") {
    SplitMix64 rng(3);
    for (int round = 0; round < 25; ++round) {
        const std::size_t frames = 2 + rng.below(19);
        const std::size_t side = 1 + rng.below(5);
        const FrameSequence seq = random_real_sequence({side, side}, frames, rng);

        const RunningMeanSequence means = running_means(seq);
        const CoefficientVector beta = running_mean_weights(frames);
        std::vector<double> expect(seq.frame_size(), 0.0);
        for (std::size_t t = 1; t <= frames; ++t) {
            for (std::size_t i = 0; i < expect.size(); ++i) {
                expect[i] += beta[t] * means.mean(t)[i];
            }
        }
        const Tensor got = arp(seq, Variant::avg).tensor;
        CHECK(max_rel_diff(got, Tensor(got.dims(), expect), 1e-9) < 1e-10);
    }
}

TEST_CASE("arp is linear in the input sequence") {
    SplitMix64 rng(17);
    const std::size_t frames = 8;
    const FrameSequence s1 = random_real_sequence({3, 4}, frames, rng);
    const FrameSequence s2 = random_real_sequence({3, 4}, frames, rng);
    const double a = 1.25, b = -0.5;
    for (Variant v : {Variant::avg, Variant::direct}) {
        const Tensor lhs = arp(combine(s1, s2, a, b), v).tensor;
        const Tensor p1 = arp(s1, v).tensor;
        const Tensor p2 = arp(s2, v).tensor;
        std::vector<double> rhs(lhs.size());
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            rhs[i] = a * p1[i] + b * p2[i];
        }
        CHECK(max_rel_diff(lhs, Tensor(lhs.dims(), rhs), 1e-9) < 1e-10);
    }
}

TEST_CASE("mean and max pooling basics") {
    const FrameSequence seq = scalars({1, 3});
    CHECK(mean_pool(seq).tensor[0] == 2.0);
    CHECK(max_pool(seq).tensor[0] == 3.0);

    const FrameSequence one = scalars({0.7});
    CHECK(mean_pool(one).tensor[0] == 0.7);
    CHECK(max_pool(one).tensor[0] == 0.7);
}

TEST_CASE("order sensitivity: arp flips, mean and max do not") {
    SplitMix64 rng(23);
    for (int round = 0; round < 10; ++round) {
        const FrameSequence seq = random_dyadic_sequence({2, 4}, 2 + rng.below(12), rng);
        const FrameSequence rev = reversed(seq);

        CHECK(bitwise_equal(mean_pool(seq).tensor, mean_pool(rev).tensor));
        CHECK(bitwise_equal(max_pool(seq).tensor, max_pool(rev).tensor));

        // integer direct weights on dyadic data: the flip is exact
        const Tensor fwd = arp(seq, Variant::direct).tensor;
        const Tensor bwd = arp(rev, Variant::direct).tensor;
        CHECK(bitwise_equal(bwd, scale(fwd, -1.0)));
    }
}

TEST_CASE("avg-variant reversal changes the output on non-constant input") {
    SplitMix64 rng(29);
    for (int round = 0; round < 10; ++round) {
        const FrameSequence seq = random_real_sequence({6}, 3 + rng.below(10), rng);
        const Tensor fwd = arp(seq, Variant::avg).tensor;
        const Tensor bwd = arp(reversed(seq), Variant::avg).tensor;
        CHECK(l2_distance(fwd, bwd) > 0.0);
    }
}

TEST_CASE("motion history recurrence") {
    SECTION("static input gives a zero image") {
        std::vector<Tensor> frames(5, Tensor::full({1, 2, 2}, 0.5));
        const Tensor out = mhi(FrameSequence(std::move(frames))).tensor;
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out[i] == 0.0);
        }
    }

    SECTION("motion at the final step keeps full intensity") {
        std::vector<Tensor> frames(5, Tensor::full({1, 1, 2}, 0.0));
        frames[4] = Tensor({1, 1, 2}, {1.0, 0.0}); // pixel 0 moves at the last step
        const Tensor out = mhi(FrameSequence(std::move(frames)), 0.05, 1.0).tensor;
        CHECK(out[0] == 1.0);
        CHECK(out[1] == 0.0);
    }

    SECTION("motion at the first step decays by duration/(T-1) per step") {
        std::vector<Tensor> frames(3, Tensor::full({1, 1, 1}, 1.0));
        frames[0] = Tensor({1, 1, 1}, {0.0}); // change only between frames 1 and 2
        const Tensor out = mhi(FrameSequence(std::move(frames)), 0.05, 1.0).tensor;
        CHECK_THAT(out[0], WithinAbs(0.5, 1e-15));
    }

    SECTION("rejects short sequences and bad parameters") {
        CHECK_THROWS_AS(mhi(scalars({1})), std::invalid_argument);
        CHECK_THROWS_AS(mhi(scalars({1, 2}), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(mhi(scalars({1, 2}), 0.05, 0.0), std::invalid_argument);
    }
}

TEST_CASE("motion energy is the union of the step masks") {
    SECTION("static and single-change cases") {
        std::vector<Tensor> still(4, Tensor::full({1, 1, 1}, 0.25));
        CHECK(mei(FrameSequence(std::move(still))).tensor[0] == 0.0);

        std::vector<Tensor> moved(4, Tensor::full({1, 1, 1}, 0.0));
        moved[2] = Tensor({1, 1, 1}, {1.0});
        CHECK(mei(FrameSequence(std::move(moved))).tensor[0] == 1.0);
    }

    SECTION("equals the indicator of a nonzero motion history") {
        SplitMix64 rng(31);
        for (int round = 0; round < 10; ++round) {
            const FrameSequence seq = random_dyadic_sequence({1, 3, 3}, 3 + rng.below(8), rng);
            const Tensor hist = mhi(seq, 0.2, 1.0).tensor;
            const Tensor energy = mei(seq, 0.2).tensor;
            for (std::size_t i = 0; i < hist.size(); ++i) {
                CHECK(energy[i] == (hist[i] > 0.0 ? 1.0 : 0.0));
                CHECK(energy[i] * (1.0 - energy[i]) == 0.0);
                CHECK(hist[i] >= 0.0);
                CHECK(hist[i] <= 1.0);
            }
        }
    }
}

TEST_CASE("multi-channel motion inputs reduce to one channel") {
    std::vector<Tensor> frames(3, Tensor::full({3, 2, 2}, 0.2));
    frames[2] = Tensor::full({3, 2, 2}, 0.9);
    const DynamicImage out = mhi(FrameSequence(std::move(frames)));
    CHECK(out.tensor.dims() == std::vector<std::size_t>{1, 2, 2});
    CHECK(out.tensor[0] == 1.0); // luminance jumped by 0.7 > threshold
}

TEST_CASE("square-root preprocessing") {
    std::vector<Tensor> frames;
    frames.push_back(Tensor({3}, {0.25, 0.0, 1.0}));
    const FrameSequence out = di_preprocess(FrameSequence(std::move(frames)));
    CHECK(out.frame(1)[0] == 0.5);
    CHECK(out.frame(1)[1] == 0.0);
    CHECK(out.frame(1)[2] == 1.0);

    std::vector<Tensor> bad;
    bad.push_back(Tensor({1}, {-0.1}));
    CHECK_THROWS_AS(di_preprocess(FrameSequence(std::move(bad))), std::domain_error);
}

TEST_CASE("8-bit export uses a joint min-max with half-away rounding") {
    const DynamicImage spanning{Tensor({3}, {-1.0, 0.0, 1.0}), PoolKind::arp_avg, {1, 2}};
    const ByteTensor bytes = di_export(spanning);
    CHECK(bytes[0] == 0);
    CHECK(bytes[1] == 128); // 127.5 rounds away from zero
    CHECK(bytes[2] == 255);

    const DynamicImage flat{Tensor::full({2, 2}, 3.25), PoolKind::mean, {1, 2}};
    const ByteTensor gray = di_export(flat);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        CHECK(gray[i] == 128);
    }

    const DynamicImage already{Tensor({2}, {0.0, 255.0}), PoolKind::max, {1, 2}};
    const ByteTensor kept = di_export(already);
    CHECK(kept[0] == 0);
    CHECK(kept[1] == 255);
}
