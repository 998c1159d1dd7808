#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace dynimg;
using Catch::Matchers::WithinAbs;

namespace {

// Independent route: the frame weight at t is the suffix sum over i >= t
// of (running-mean weight at i) / i.
double suffix_sum_weight(std::size_t t, std::size_t frames) {
    const CoefficientVector beta = running_mean_weights(frames);
    double s = 0.0;
    for (std::size_t i = t; i <= frames; ++i) {
        s += beta[i] / static_cast<double>(i);
    }
    return s;
}

double rel_gap(double a, double b) {
    const double m = std::max(std::abs(a), std::abs(b));
    return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

} // namespace

TEST_CASE("harmonic numbers by direct summation") {
    CHECK(harmonic(0) == 0.0);
    CHECK(harmonic(1) == 1.0);
    CHECK_THAT(harmonic(3), WithinAbs(11.0 / 6.0, 1e-15));
    CHECK_THAT(harmonic(10), WithinAbs(7381.0 / 2520.0, 1e-14));
}

TEST_CASE("running-mean weights are the exact integers 2t - T - 1") {
    const CoefficientVector one = running_mean_weights(1);
    REQUIRE(one.length() == 1);
    CHECK(one[1] == 0.0);

    const CoefficientVector three = running_mean_weights(3);
    CHECK(three[1] == -2.0);
    CHECK(three[2] == 0.0);
    CHECK(three[3] == 2.0);

    const CoefficientVector four = running_mean_weights(4);
    CHECK(four[1] == -3.0);
    CHECK(four[2] == -1.0);
    CHECK(four[3] == 1.0);
    CHECK(four[4] == 3.0);

    CHECK_THROWS_AS(running_mean_weights(0), std::invalid_argument);
}

TEST_CASE("avg frame weights match hand-derived small cases") {
    const CoefficientVector two = frame_weights(2, Variant::avg);
    CHECK_THAT(two[1], WithinAbs(-0.5, 1e-12));
    CHECK_THAT(two[2], WithinAbs(0.5, 1e-12));

    const CoefficientVector three = frame_weights(3, Variant::avg);
    CHECK_THAT(three[1], WithinAbs(-4.0 / 3.0, 1e-12));
    CHECK_THAT(three[2], WithinAbs(2.0 / 3.0, 1e-12));
    CHECK_THAT(three[3], WithinAbs(2.0 / 3.0, 1e-12));

    CHECK_THROWS_AS(frame_weights(0, Variant::avg), std::invalid_argument);
}

TEST_CASE("direct frame weights equal the running-mean weights") {
    const CoefficientVector direct = frame_weights(3, Variant::direct);
    CHECK(direct[1] == -2.0);
    CHECK(direct[2] == 0.0);
    CHECK(direct[3] == 2.0);
    for (std::size_t frames : {1u, 2u, 7u, 40u}) {
        const CoefficientVector a = frame_weights(frames, Variant::direct);
        const CoefficientVector b = running_mean_weights(frames);
        for (std::size_t t = 1; t <= frames; ++t) {
            CHECK(a[t] == b[t]);
        }
    }
}

TEST_CASE("avg frame weights equal the suffix-sum expansion to 1e-9 relative") {
    for (std::size_t frames = 1; frames <= 200; ++frames) {
        const CoefficientVector alpha = frame_weights(frames, Variant::avg);
        for (std::size_t t = 1; t <= frames; ++t) {
            CHECK(rel_gap(alpha[t], suffix_sum_weight(t, frames)) < 1e-9);
        }
    }
}

TEST_CASE("frame weights sum to zero for both variants") {
    for (std::size_t frames = 1; frames <= 500; ++frames) {
        for (Variant v : {Variant::avg, Variant::direct}) {
            const CoefficientVector w = frame_weights(frames, v);
            double sum = 0.0;
            for (double x : w.values) {
                sum += x;
            }
            CHECK(std::abs(sum) <= 1e-9 * static_cast<double>(frames));
        }
    }
}

TEST_CASE("direct weights are exactly antisymmetric and strictly increasing") {
    for (std::size_t frames : {2u, 3u, 10u, 101u}) {
        const CoefficientVector w = frame_weights(frames, Variant::direct);
        for (std::size_t t = 1; t <= frames; ++t) {
            CHECK(w[t] == -w[frames + 1 - t]);
        }
        for (std::size_t t = 2; t <= frames; ++t) {
            CHECK(w[t] > w[t - 1]);
        }
    }
}

TEST_CASE("avg weights are negative early and positive late with one pivot") {
    for (std::size_t frames = 3; frames <= 300; ++frames) {
        const CoefficientVector w = frame_weights(frames, Variant::avg);
        std::size_t zeros = 0;
        bool seen_positive = false;
        for (std::size_t t = 1; t <= frames; ++t) {
            if (w[t] == 0.0) {
                ++zeros;
                continue;
            }
            if (w[t] > 0.0) {
                seen_positive = true;
            } else {
                // no negative value may follow a positive one
                CHECK_FALSE(seen_positive);
            }
        }
        CHECK(w[1] < 0.0);
        CHECK(w[frames] > 0.0);
        CHECK(zeros <= 1);
    }
}
