#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "apnc/rng.hpp"
#include "apnc/signal.hpp"

using namespace apnc;

namespace {
PulseConfig base_cfg(double beta = 1.0) {
    PulseConfig c;
    c.beta = beta;
    return c;
}

cplx value_at(const DenseSignal& s, double t) {
    const long long idx = std::llround(t / s.dt) - s.start_index;
    REQUIRE(idx >= 0);
    REQUIRE(idx < static_cast<long long>(s.size()));
    return s.samples[static_cast<size_t>(idx)];
}
}  // namespace

TEST_CASE("shape_symbols: single RC pulse is ISI-free at symbol instants") {
    const PulseConfig c = base_cfg(0.5);
    const cvec sym{cplx{1.0, 0.0}};
    const DenseSignal s = shape_symbols(sym, 0.0, Pulse::rc, c);
    CHECK(value_at(s, 0.0).real() == doctest::Approx(1.0));
    CHECK(std::abs(value_at(s, c.T)) < 1e-12);
    CHECK(std::abs(value_at(s, -c.T)) < 1e-12);
}

TEST_CASE("shape_symbols: two-symbol superposition") {
    const PulseConfig c = base_cfg(0.5);
    const cvec sym{cplx{1.0, 0.0}, cplx{-1.0, 0.0}};
    const DenseSignal s = shape_symbols(sym, 0.0, Pulse::rc, c);
    CHECK(value_at(s, 0.0).real() == doctest::Approx(1.0));
    CHECK(value_at(s, c.T).real() == doctest::Approx(-1.0));
}

TEST_CASE("shape_symbols: fractional delay, direct two-term oracle") {
    const PulseConfig c = base_cfg(1.0);
    const cvec sym{cplx{1.0, 0.0}, cplx{1.0, 0.0}};
    const double delay = 0.25 * c.T;
    const DenseSignal s = shape_symbols(sym, delay, Pulse::rc, c);
    // at t = 0.25T: rc(0) + rc(-T) = 1
    CHECK(value_at(s, 0.25 * c.T).real() == doctest::Approx(1.0).epsilon(1e-12));
    // at t = 0: rc(-0.25T) + rc(-1.25T)
    const double expect = rc_pulse(-0.25 * c.T, c) + rc_pulse(-1.25 * c.T, c);
    CHECK(value_at(s, 0.0).real() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("shape_symbols rejects an empty frame") {
    const PulseConfig c = base_cfg();
    CHECK_THROWS_WITH(shape_symbols(cvec{}, 0.0, Pulse::rc, c), "empty frame");
}

TEST_CASE("convolve_filter: RRC self-convolution reproduces the RC pulse") {
    const PulseConfig c = base_cfg(0.5);
    const cvec sym{cplx{1.0, 0.0}};
    const DenseSignal rrc_sig = shape_symbols(sym, 0.0, Pulse::rrc, c);
    const DenseSignal rc_sig = convolve_filter(rrc_sig, Pulse::rrc, c);
    double worst = 0.0;
    for (size_t j = 0; j < rc_sig.size(); ++j) {
        const double t = rc_sig.time_at(j);
        if (std::abs(t) > c.span * c.T) continue;
        worst = std::max(worst, std::abs(rc_sig.samples[j].real() - rc_pulse(t, c)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("convolve_filter: zero in, zero out") {
    const PulseConfig c = base_cfg();
    DenseSignal z;
    z.dt = c.dt();
    z.start_index = -5;
    z.samples.assign(300, cplx{0.0, 0.0});
    const DenseSignal out = convolve_filter(z, Pulse::rrc, c);
    for (const auto& v : out.samples) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("convolve_filter: unit impulse reproduces the kernel") {
    const PulseConfig c = base_cfg(0.75);
    DenseSignal imp;
    imp.dt = c.dt();
    imp.start_index = 0;
    imp.samples.assign(1, cplx{1.0 / c.dt(), 0.0});
    const DenseSignal out = convolve_filter(imp, Pulse::rrc, c);
    for (size_t j = 0; j < out.size(); ++j) {
        CHECK(std::abs(out.samples[j].real() - rrc_pulse(out.time_at(j), c)) < 1e-6);
    }
}

TEST_CASE("convolve_filter rejects mismatched grids") {
    const PulseConfig c = base_cfg();
    DenseSignal z;
    z.dt = c.dt() * 2.0;
    z.samples.assign(10, cplx{});
    CHECK_THROWS_WITH(convolve_filter(z, Pulse::rrc, c), "mismatched dt");
}

TEST_CASE("sinc2_reconstruct interpolates exactly at sample instants") {
    std::mt19937_64 rng(3);
    cvec samples(64);
    for (auto& v : samples) v = draw_cn(rng, 1.0);
    for (long long k = 0; k < 64; k += 7) {
        const cplx got = sinc2_reconstruct(samples, 0, k * 0.5, 1.0, 32);
        CHECK(std::abs(got - samples[static_cast<size_t>(k)]) < 1e-9);
    }
}

TEST_CASE("sinc2_reconstruct recovers a band-limited pulse off-grid") {
    for (double beta : {0.0, 1.0}) {
        const PulseConfig c = base_cfg(beta);
        const int w = 32;
        const int k0 = -2 * (c.span + 2 * w);
        const int k1 = 2 * (c.span + 2 * w);
        cvec samples(static_cast<size_t>(k1 - k0 + 1));
        for (int k = k0; k <= k1; ++k) {
            samples[static_cast<size_t>(k - k0)] = cplx{rc_pulse(k * c.T / 2.0, c), 0.0};
        }
        const cplx got = sinc2_reconstruct(samples, k0, 0.3 * c.T, c.T, w);
        CHECK(std::abs(got.real() - rc_pulse(0.3 * c.T, c)) < 1e-3);
        CHECK(std::abs(got.imag()) < 1e-12);
    }
}

TEST_CASE("sinc2_reconstruct: all-zero samples give zero, outside support throws") {
    cvec zeros(32, cplx{0.0, 0.0});
    CHECK(std::abs(sinc2_reconstruct(zeros, 0, 3.3, 1.0, 8)) == 0.0);
    CHECK_THROWS_WITH(static_cast<void>(sinc2_reconstruct(zeros, 0, 33.0, 1.0, 8)),
                      "out of support");
}

TEST_CASE("calibrate_noise: baud-rate variance after RRC matched filtering") {
    // N0 = 2, T = 1 -> post-filter baud-sample variance 1. Monte Carlo oracle
    // over independent filter outputs.
    const PulseConfig c = base_cfg(0.35);
    const double n0 = 2.0;
    const double s = calibrate_noise(n0, c);
    const FilterTaps taps = make_pulse_taps(Pulse::rrc, c);
    auto rng = make_rng(1234);
    std::normal_distribution<double> g(0.0, s / std::sqrt(2.0));
    const int trials = 100000;
    double acc = 0.0;
    for (int i = 0; i < trials; ++i) {
        cplx y{0.0, 0.0};
        for (double w : taps.taps) y += w * cplx{g(rng), g(rng)};
        y *= c.dt();
        acc += std::norm(y);
    }
    const double target = n0 / (2.0 * c.T);
    CHECK(acc / trials / target > 0.98);
    CHECK(acc / trials / target < 1.02);
}

TEST_CASE("calibrate_noise: sinc(2t) front-end doubles the sample variance") {
    const PulseConfig c = base_cfg(0.35);
    const double n0 = 2.0;
    const double s = calibrate_noise(n0, c);
    const FilterTaps taps = make_sinc2_taps(c, 32);
    auto rng = make_rng(99);
    std::normal_distribution<double> g(0.0, s / std::sqrt(2.0));
    const int trials = 60000;
    double acc = 0.0;
    for (int i = 0; i < trials; ++i) {
        cplx y{0.0, 0.0};
        for (double w : taps.taps) y += w * cplx{g(rng), g(rng)};
        y *= c.dt();
        acc += std::norm(y);
    }
    const double target = n0 / c.T;  // 2 sigma^2
    CHECK(acc / trials / target > 0.97);
    CHECK(acc / trials / target < 1.03);
}

TEST_CASE("calibrate_noise rejects non-positive N0") {
    CHECK_THROWS(calibrate_noise(0.0, base_cfg()));
    CHECK_THROWS(calibrate_noise(-1.0, base_cfg()));
}
