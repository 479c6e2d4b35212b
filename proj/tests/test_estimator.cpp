#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "apnc/estimator.hpp"
#include "apnc/rng.hpp"

using namespace apnc;

namespace {

PulseConfig cfg_beta(double beta) {
    PulseConfig c;
    c.beta = beta;
    return c;
}

struct Setup {
    PulseConfig pulse;
    PreambleSpec spec;
    cvec z_a, z_b, z_d_a, z_d_b;
    SymbolFrame frame_a, frame_b;

    Setup(double beta, int q, int g, int n_data) : pulse(cfg_beta(beta)), spec{q, 1, g} {
        auto [za, zb] = assign_pair(spec);
        z_a = za;
        z_b = zb;
        z_d_a = interpolate_zc_double(z_a, pulse);
        z_d_b = interpolate_zc_double(z_b, pulse);
        cvec data(static_cast<size_t>(n_data), cplx{1.0, 0.0});
        std::mt19937_64 rng(42);
        std::uniform_int_distribution<int> bit(0, 1);
        for (auto& v : data) v = bit(rng) ? cplx{-1.0, 0.0} : cplx{1.0, 0.0};
        frame_a = build_frame(spec, Node::A, data);
        frame_b = build_frame(spec, Node::B, data);
    }

    SampleSet baud_window(const ChannelRealization& ch, int d) const {
        const DenseSignal r = uplink_superpose(frame_a, frame_b, ch, pulse);
        return front_end_sampled(r, SampleKind::baud_rrc, pulse, ch.n0,
                                 spec.G + 1 - d, static_cast<size_t>(spec.Q + 2 * d));
    }
    SampleSet double_window(const ChannelRealization& ch, int d) const {
        const DenseSignal r = uplink_superpose(frame_a, frame_b, ch, pulse);
        return front_end_sampled(r, SampleKind::double_sinc2, pulse, ch.n0,
                                 2 * spec.G + 1 - d,
                                 static_cast<size_t>(2 * spec.Q + 2 * d));
    }
};

}  // namespace

TEST_CASE("crosscorr_baud: noiseless aligned peak is Q, neighbors vanish") {
    Setup s(1.0, 31, 10, 16);
    ChannelRealization ch;  // t = 0, h = 1, noiseless
    const SampleSet y = s.baud_window(ch, 4);
    const CorrelationWindow c = crosscorr_baud(y, s.z_a, 4, s.spec.G);
    CHECK(c.noise_var == 0.0);
    CHECK(c.zc_length == 31);
    const double q = 31.0;
    CHECK(std::abs(c.values[3] - cplx{q, 0.0}) < 1e-2 * q);  // m = 0 entry
    for (int m = 1 - 4; m <= 4; ++m) {
        if (m == 0) continue;
        CHECK(std::abs(c.values[static_cast<size_t>(m + 3)]) < 1e-2 * q);
    }
}

TEST_CASE("crosscorr_baud: fractional offset samples the RC pulse") {
    Setup s(1.0, 31, 10, 16);
    ChannelRealization ch;
    ch.t_a = 0.3;
    ch.t_b = 0.15;  // keep |t| <= T/2
    const SampleSet y = s.baud_window(ch, 4);
    const CorrelationWindow c = crosscorr_baud(y, s.z_a, 4, s.spec.G);
    for (int m = 1 - 4; m <= 4; ++m) {
        const double expect = 31.0 * rc_pulse(m * 1.0 - 0.3, s.pulse);
        CHECK(std::abs(c.values[static_cast<size_t>(m + 3)] - cplx{expect, 0.0}) <
              1e-2 * 31.0);
    }
}

TEST_CASE("crosscorr_baud: argmax peak location agrees with the nominal index") {
    Setup s(0.5, 31, 10, 16);
    ChannelRealization ch;
    ch.t_a = 0.2;
    ch.t_b = -0.2;
    const DenseSignal r = uplink_superpose(s.frame_a, s.frame_b, ch, s.pulse);
    const SampleSet y = take_samples(front_end(r, FrontEndFilter::rrc, s.pulse),
                                     SampleKind::baud_rrc, s.pulse, 0.0);
    const CorrelationWindow via_argmax = crosscorr_baud(y, s.z_a, 4, -1);
    const CorrelationWindow via_nominal = crosscorr_baud(y, s.z_a, 4, s.spec.G);
    for (size_t i = 0; i < via_argmax.values.size(); ++i) {
        CHECK(std::abs(via_argmax.values[i] - via_nominal.values[i]) < 1e-12);
    }
}

TEST_CASE("crosscorr_baud: noise-only per-entry variance is Q sigma^2") {
    const int q = 31, d = 4;
    const cvec z = zc_generate(q, 1);
    const double sigma2 = 0.7;
    auto rng = make_rng(314);
    double acc = 0.0;
    long long n = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        SampleSet y;
        y.kind = SampleKind::baud_rrc;
        y.first_index = 0;
        y.sigma2 = sigma2;
        y.samples.resize(static_cast<size_t>(q + 2 * d));
        for (auto& v : y.samples) v = draw_cn(rng, sigma2);
        const CorrelationWindow c = crosscorr_baud(y, z, d, d);
        CHECK(c.noise_var == doctest::Approx(q * sigma2));
        for (const auto& v : c.values) {
            acc += std::norm(v);
            ++n;
        }
    }
    const double got = acc / static_cast<double>(n);
    CHECK(std::abs(got - q * sigma2) / (q * sigma2) < 0.05);
}

TEST_CASE("interpolate_zc_double: direct-sum oracle and zero input") {
    const PulseConfig c = cfg_beta(0.0);
    const cvec z = zc_generate(15, 1);
    const cvec zd = interpolate_zc_double(z, c);
    REQUIRE(zd.size() == 30);
    for (int k = 0; k < 30; ++k) {
        cplx expect{0.0, 0.0};
        for (int i = -c.span - 1; i < 15 + c.span + 1; ++i) {
            expect += z[static_cast<size_t>(((i % 15) + 15) % 15)] *
                      rrc_pulse(k * 0.5 - i, c);
        }
        CHECK(std::abs(zd[static_cast<size_t>(k)] - expect) < 1e-10);
    }
    // beta=0 is the sinc pulse: even entries are the original samples exactly
    CHECK(std::abs(zd[8] - z[4] * rrc_pulse(0.0, c)) < 1e-12);
    // positive roll-off leaves RRC tails on the even entries
    const cvec zd_half = interpolate_zc_double(z, cfg_beta(0.5));
    CHECK(std::abs(zd_half[8] - z[4] * rrc_pulse(0.0, cfg_beta(0.5))) > 1e-3);

    const cvec zeros(15, cplx{0.0, 0.0});
    for (const auto& v : interpolate_zc_double(zeros, c)) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("crosscorr_double: noiseless window follows the double-rate template") {
    // The replica is clipped to 2Q points, so the match degrades as the pulse
    // tails grow against Q; slow sinc tails at beta=0 leave a few percent.
    for (double beta : {0.0, 1.0}) {
        Setup s(beta, 31, 10, 16);
        ChannelRealization ch;
        ch.t_a = 0.3;
        ch.t_b = 0.1;
        const SampleSet y = s.double_window(ch, 4);
        const CorrelationWindow c = crosscorr_double(y, s.z_d_a, 4, 2 * s.spec.G);
        const DoubleRateTemplate tmpl(s.pulse, 4.0);
        const double scale = 2.0 * 31.0;  // peak value Q S(0) = 2Q/T
        const double tol = (beta == 0.0 ? 5e-2 : 2e-2) * scale;
        for (int m = 1 - 4; m <= 4; ++m) {
            const double expect = 31.0 * tmpl(m * 0.5 - 0.3);
            CHECK(std::abs(c.values[static_cast<size_t>(m + 3)] - cplx{expect, 0.0}) < tol);
        }
    }
}

TEST_CASE("double-rate template: matches the explicit even/odd tap double sum") {
    for (double beta : {0.0, 0.6, 1.0}) {
        const PulseConfig c = cfg_beta(beta);
        const DoubleRateTemplate tmpl(c, 4.0);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (int trial = 0; trial < 100; ++trial) {
            const double t = u(rng);
            for (int m = -3; m <= 4; ++m) {
                double lhs = 0.0;  // sum_l p'(lT)p'(mT/2+lT-t) + p'(lT+T/2)p'((m+1)T/2+lT-t)
                for (int l = -c.span - 2; l <= c.span + 2; ++l) {
                    lhs += rrc_pulse(l * c.T, c) * rrc_pulse(m * c.T / 2.0 + l * c.T - t, c);
                    lhs += rrc_pulse(l * c.T + c.T / 2.0, c) *
                           rrc_pulse((m + 1) * c.T / 2.0 + l * c.T - t, c);
                }
                CHECK(std::abs(lhs - tmpl(m * c.T / 2.0 - t)) < 1e-5);
            }
        }
    }
}

TEST_CASE("double-rate template: equals (2/T) rc up to truncation tolerance") {
    for (double beta : {0.5, 1.0}) {
        const PulseConfig c = cfg_beta(beta);
        const DoubleRateTemplate tmpl(c, 4.0);
        for (double s = -2.0; s <= 2.0; s += 0.071) {
            CHECK(std::abs(tmpl(s) - 2.0 * rc_pulse(s, c)) < 2e-3);
        }
    }
}

TEST_CASE("crosscorr_double: noise statistics of the correlation window") {
    const int q = 31, d = 4;
    const PulseConfig c = cfg_beta(1.0);
    const cvec z_d = interpolate_zc_double(zc_generate(q, 1), c);
    double e_zd = 0.0;
    for (const auto& v : z_d) e_zd += std::norm(v);
    const double sigma2 = 0.4;           // per-sample complex variance sigma^2
    const double samp_var = 2 * sigma2;  // sinc2 stream
    auto rng = make_rng(999);

    double var_acc = 0.0;
    cplx lag1{0.0, 0.0}, lag2{0.0, 0.0};
    long long n = 0, n1 = 0, n2 = 0;
    for (int trial = 0; trial < 8000; ++trial) {
        SampleSet y;
        y.kind = SampleKind::double_sinc2;
        y.first_index = 0;
        y.sigma2 = samp_var;
        y.samples.resize(static_cast<size_t>(2 * q + 2 * d));
        for (auto& v : y.samples) v = draw_cn(rng, samp_var);
        const CorrelationWindow cw = crosscorr_double(y, z_d, d, d);
        CHECK(cw.noise_var == doctest::Approx(samp_var * e_zd));
        for (size_t i = 0; i < cw.values.size(); ++i) {
            var_acc += std::norm(cw.values[i]);
            ++n;
            if (i >= 1) {
                lag1 += std::conj(cw.values[i - 1]) * cw.values[i];
                ++n1;
            }
            if (i >= 2) {
                lag2 += std::conj(cw.values[i - 2]) * cw.values[i];
                ++n2;
            }
        }
    }
    const double var = var_acc / static_cast<double>(n);
    const double expect_var = samp_var * e_zd;  // ~ 4 Q sigma^2 / T
    CHECK(std::abs(var - expect_var) / expect_var < 0.05);
    // colored across adjacent lags, white between even/odd sub-streams up to
    // the clipped-replica residual (~Q^-1 scale at Q=31)
    const double r1 = lag1.real() / static_cast<double>(n1);
    CHECK(std::abs(r1 - expect_var * rc_pulse(c.T / 2.0, c)) / expect_var < 0.05);
    CHECK(std::abs(lag2) / static_cast<double>(n2) / expect_var < 0.05);
}

TEST_CASE("build_whitener: hand values and factorization residuals") {
    SUBCASE("d=1, beta=1") {
        const WhiteningOperator w = build_whitener(1, cfg_beta(1.0));
        CHECK(w.sigma0.get(0, 0) == doctest::Approx(1.0));
        CHECK(w.sigma0.get(0, 1) == doctest::Approx(0.5));
        CHECK(w.u0.get(0, 0) == doctest::Approx(1.0));
        CHECK(w.u0.get(0, 1) == doctest::Approx(0.5));
        CHECK(w.u0.get(1, 1) == doctest::Approx(std::sqrt(0.75)));
    }
    SUBCASE("beta=0 off-diagonals are sinc(1/2) = 2/pi") {
        const WhiteningOperator w = build_whitener(4, cfg_beta(0.0));
        for (int i = 0; i + 1 < 8; ++i) {
            CHECK(w.sigma0.get(i, i + 1) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
            CHECK(w.sigma0.get(i, i) == doctest::Approx(1.0));
            if (i + 2 < 8) CHECK(w.sigma0.get(i, i + 2) == doctest::Approx(0.0));
        }
    }
    SUBCASE("positive definite across beta and d, residual < 1e-10") {
        for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            for (int d : {2, 4, 8}) {
                const WhiteningOperator w = build_whitener(d, cfg_beta(beta));
                CHECK(cholesky_residual(w.sigma0, w.u0) < 1e-10);
            }
        }
    }
}

TEST_CASE("whiten_window: hand case and identity covariance") {
    const WhiteningOperator w = build_whitener(1, cfg_beta(1.0));
    CorrelationWindow c;
    c.d = 1;
    c.rate = SampleRate::double_rate;
    c.values = {cplx{1.0, 0.0}, cplx{1.0, 0.0}};
    const cvec out = whiten_window(c, w);
    CHECK(std::abs(out[0] - cplx{1.0, 0.0}) < 1e-12);
    CHECK(std::abs(out[1] - cplx{0.5 / std::sqrt(0.75), 0.0}) < 1e-12);

    WhiteningOperator ident;
    ident.sigma0 = SymBandMatrix(2, 1);
    ident.sigma0.at(0, 0) = 1.0;
    ident.sigma0.at(1, 0) = 1.0;
    ident.u0 = cholesky(ident.sigma0, 1e-12, "not pd");
    const cvec same = whiten_window(c, ident);
    CHECK(std::abs(same[0] - c.values[0]) < 1e-15);
    CHECK(std::abs(same[1] - c.values[1]) < 1e-15);

    CorrelationWindow wrong;
    wrong.values.resize(4);
    CHECK_THROWS_WITH(whiten_window(wrong, w), "dimension mismatch");
}

TEST_CASE("whiten_window: Monte Carlo covariance becomes scaled identity") {
    // Q = 63 keeps the clipped-replica residual below the 5% Monte Carlo
    // budget; at Q = 31 the residual coloring alone is ~7%.
    const int q = 63, d = 4;
    const PulseConfig c = cfg_beta(1.0);
    const cvec z_d = interpolate_zc_double(zc_generate(q, 1), c);
    const WhiteningOperator w = build_whitener(d, c);
    const double samp_var = 2.0 * 0.5;
    auto rng = make_rng(2024);

    const int n = 2 * d;
    std::vector<dvec> cov(static_cast<size_t>(n), dvec(static_cast<size_t>(n), 0.0));
    const int trials = 10000;
    for (int trial = 0; trial < trials; ++trial) {
        SampleSet y;
        y.kind = SampleKind::double_sinc2;
        y.first_index = 0;
        y.sigma2 = samp_var;
        y.samples.resize(static_cast<size_t>(2 * q + 2 * d));
        for (auto& v : y.samples) v = draw_cn(rng, samp_var);
        CorrelationWindow cw = crosscorr_double(y, z_d, d, d);
        const cvec wh = whiten_window(cw, w);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                cov[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                    (std::conj(wh[static_cast<size_t>(i)]) * wh[static_cast<size_t>(j)])
                        .real();
            }
        }
    }
    double diag_mean = 0.0;
    for (int i = 0; i < n; ++i) {
        diag_mean += cov[static_cast<size_t>(i)][static_cast<size_t>(i)];
    }
    diag_mean /= n * trials;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = cov[static_cast<size_t>(i)][static_cast<size_t>(j)] / trials;
            if (i == j) {
                CHECK(std::abs(v - diag_mean) / diag_mean < 0.05);
            } else {
                CHECK(std::abs(v) < 0.05 * diag_mean);
            }
        }
    }
}

TEST_CASE("exact preamble template tracks the noiseless correlation window") {
    for (double beta : {0.0, 1.0}) {
        Setup s(beta, 31, 10, 16);
        ChannelRealization ch;
        ch.t_a = 0.3;
        ch.t_b = 0.1;
        const SampleSet y = s.double_window(ch, 4);
        const CorrelationWindow c = crosscorr_double(y, s.z_d_a, 4, 2 * s.spec.G);
        const CorrelationTemplate tmpl(s.spec, Node::A, 4, SampleRate::double_rate,
                                       s.pulse);
        for (int m = 1 - 4; m <= 4; ++m) {
            // residual: unmodeled data tails only
            CHECK(std::abs(c.values[static_cast<size_t>(m + 3)] - tmpl.at(m, ch.t_a)) <
                  5e-3 * 62.0);
        }
    }
}

TEST_CASE("estimate_baud: noiseless recovery") {
    Setup s(1.0, 31, 10, 16);
    const CorrelationTemplate ta(s.spec, Node::A, 4, SampleRate::baud, s.pulse);
    const CorrelationTemplate tb(s.spec, Node::B, 4, SampleRate::baud, s.pulse);
    ChannelRealization ch;
    ch.t_a = 0.3;
    ch.t_b = -0.1;
    const SampleSet y = s.baud_window(ch, 4);
    const CorrelationWindow ca = crosscorr_baud(y, s.z_a, 4, s.spec.G);
    const CorrelationWindow cb = crosscorr_baud(y, s.z_b, 4, s.spec.G);
    const OffsetEstimate e = estimate_baud(ca, cb, ta, tb, ch.h_a, ch.h_b, s.pulse);
    CHECK(std::abs(e.tau_hat - 0.4) < 1e-3);
    CHECK(std::abs(e.t_hat_a - 0.3) < 1e-3);
    CHECK(std::abs(e.t_hat_b - (-0.1)) < 1e-3);
}

TEST_CASE("estimate_baud: equal offsets give tau_hat 0") {
    Setup s(0.5, 31, 10, 16);
    const CorrelationTemplate ta(s.spec, Node::A, 4, SampleRate::baud, s.pulse);
    const CorrelationTemplate tb(s.spec, Node::B, 4, SampleRate::baud, s.pulse);
    ChannelRealization ch;
    ch.t_a = 0.21;
    ch.t_b = 0.21;
    const SampleSet y = s.baud_window(ch, 4);
    const CorrelationWindow ca = crosscorr_baud(y, s.z_a, 4, s.spec.G);
    const CorrelationWindow cb = crosscorr_baud(y, s.z_b, 4, s.spec.G);
    const OffsetEstimate e = estimate_baud(ca, cb, ta, tb, ch.h_a, ch.h_b, s.pulse);
    CHECK(std::abs(e.tau_hat) < 1e-3);
}

TEST_CASE("noiseless recovery across beta and Q for both estimators") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double beta = u(rng);
        const int q = (trial % 2 == 0) ? 31 : 15;
        const int g = q == 31 ? 10 : 5;
        const int d = 4;
        Setup s(beta, q, g, 16);
        ChannelRealization ch;
        ch.t_a = (u(rng) - 0.5) * 0.5;
        ch.t_b = (u(rng) - 0.5) * 0.5;
        CAPTURE(beta);
        CAPTURE(q);
        {
            const SampleSet y = s.double_window(ch, d);
            const WhiteningOperator w = build_whitener(d, s.pulse);
            const CorrelationTemplate ta(s.spec, Node::A, d, SampleRate::double_rate,
                                         s.pulse);
            const CorrelationTemplate tb(s.spec, Node::B, d, SampleRate::double_rate,
                                         s.pulse);
            const CorrelationWindow ca = crosscorr_double(y, s.z_d_a, d, 2 * s.spec.G);
            const CorrelationWindow cb = crosscorr_double(y, s.z_d_b, d, 2 * s.spec.G);
            const OffsetEstimate e = estimate_double(whiten_window(ca, w),
                                                     whiten_window(cb, w), ta, tb, w,
                                                     ch.h_a, ch.h_b, s.pulse);
            CHECK(std::abs(e.tau_hat - ch.tau()) < 1e-3);
        }
        {
            const SampleSet y = s.baud_window(ch, d);
            const CorrelationTemplate ta(s.spec, Node::A, d, SampleRate::baud, s.pulse);
            const CorrelationTemplate tb(s.spec, Node::B, d, SampleRate::baud, s.pulse);
            const CorrelationWindow ca = crosscorr_baud(y, s.z_a, d, s.spec.G);
            const CorrelationWindow cb = crosscorr_baud(y, s.z_b, d, s.spec.G);
            const OffsetEstimate e =
                estimate_baud(ca, cb, ta, tb, ch.h_a, ch.h_b, s.pulse);
            CHECK(std::abs(e.tau_hat - ch.tau()) < 1e-3);
        }
    }
}

TEST_CASE("estimator argmin is invariant to common positive scaling") {
    Setup s(1.0, 31, 10, 16);
    const CorrelationTemplate ta(s.spec, Node::A, 4, SampleRate::baud, s.pulse);
    const CorrelationTemplate tb(s.spec, Node::B, 4, SampleRate::baud, s.pulse);
    ChannelRealization ch;
    ch.t_a = 0.17;
    ch.t_b = -0.22;
    ch.h_a = cplx{0.9, 0.1};
    ch.h_b = cplx{1.1, -0.2};
    const SampleSet y = s.baud_window(ch, 4);
    CorrelationWindow ca = crosscorr_baud(y, s.z_a, 4, s.spec.G);
    CorrelationWindow cb = crosscorr_baud(y, s.z_b, 4, s.spec.G);
    const OffsetEstimate e1 = estimate_baud(ca, cb, ta, tb, ch.h_a, ch.h_b, s.pulse);
    const double k = 3.7;
    for (auto& v : ca.values) v *= k;
    for (auto& v : cb.values) v *= k;
    const OffsetEstimate e2 = estimate_baud(ca, cb, ta, tb, k * ch.h_a, k * ch.h_b, s.pulse);
    CHECK(e1.t_hat_a == doctest::Approx(e2.t_hat_a).epsilon(1e-12));
    CHECK(e1.t_hat_b == doctest::Approx(e2.t_hat_b).epsilon(1e-12));
}
