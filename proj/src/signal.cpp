#include "apnc/signal.hpp"

#include <algorithm>
#include <cmath>

namespace apnc {

DenseSignal shape_symbols(std::span<const cplx> symbols, double delay, Pulse p,
                          const PulseConfig& cfg) {
    cfg.validate();
    require(!symbols.empty(), "empty frame");
    require(std::abs(delay) < cfg.T, "delay must satisfy |delay| < T");

    const double dt = cfg.dt();
    const long long n = static_cast<long long>(symbols.size());
    const long long start =
        static_cast<long long>(std::floor((-cfg.span * cfg.T + delay) / dt));
    const long long stop =
        static_cast<long long>(std::ceil(((n - 1 + cfg.span) * cfg.T + delay) / dt));

    DenseSignal out;
    out.start_index = start;
    out.dt = dt;
    out.samples.assign(static_cast<size_t>(stop - start + 1), cplx{0.0, 0.0});

    // The fractional offset of (i*T + delay) against the grid is the same for
    // every symbol, so one tap table is shared by all of them.
    const int ntaps = 2 * cfg.span * cfg.M + 1;
    const double frac = delay - std::floor(delay / dt) * dt;
    const long long delay_steps = static_cast<long long>(std::floor(delay / dt));
    dvec taps(static_cast<size_t>(ntaps) + 1, 0.0);
    for (int k = 0; k <= ntaps; ++k) {
        taps[static_cast<size_t>(k)] =
            pulse_value((k - cfg.span * cfg.M) * dt - frac, p, cfg);
    }

    for (long long i = 0; i < n; ++i) {
        const cplx s = symbols[static_cast<size_t>(i)];
        if (s == cplx{0.0, 0.0}) continue;
        const long long base = i * cfg.M + delay_steps - cfg.span * cfg.M - start;
        for (int k = 0; k <= ntaps; ++k) {
            const long long j = base + k;
            if (j < 0 || j >= static_cast<long long>(out.samples.size())) continue;
            out.samples[static_cast<size_t>(j)] += s * taps[static_cast<size_t>(k)];
        }
    }
    return out;
}

FilterTaps make_pulse_taps(Pulse p, const PulseConfig& cfg) {
    FilterTaps f;
    f.half_width = cfg.span * cfg.M;
    f.taps.resize(static_cast<size_t>(2 * f.half_width + 1));
    for (int k = -f.half_width; k <= f.half_width; ++k) {
        f.taps[static_cast<size_t>(k + f.half_width)] = pulse_value(k * cfg.dt(), p, cfg);
    }
    return f;
}

FilterTaps make_sinc2_taps(const PulseConfig& cfg, int width_symbols) {
    FilterTaps f;
    f.half_width = width_symbols * cfg.M;
    f.taps.resize(static_cast<size_t>(2 * f.half_width + 1));
    const double gain = 2.0 / cfg.T;
    for (int k = -f.half_width; k <= f.half_width; ++k) {
        f.taps[static_cast<size_t>(k + f.half_width)] =
            gain * sinc_kernel(k * cfg.dt(), 2, cfg.T);
    }
    return f;
}

DenseSignal convolve_filter(const DenseSignal& sig, const FilterTaps& kernel,
                            const PulseConfig& cfg) {
    require(std::abs(sig.dt - cfg.dt()) < 1e-12 * cfg.dt(), "mismatched dt");
    const int nk = static_cast<int>(kernel.taps.size());
    const long long ns = static_cast<long long>(sig.samples.size());

    DenseSignal out;
    out.dt = sig.dt;
    out.start_index = sig.start_index - kernel.half_width;
    out.samples.assign(static_cast<size_t>(ns + nk - 1), cplx{0.0, 0.0});

    for (long long j = 0; j < ns; ++j) {
        const cplx v = sig.samples[static_cast<size_t>(j)];
        if (v == cplx{0.0, 0.0}) continue;
        cplx* dst = out.samples.data() + j;
        const double re = v.real(), im = v.imag();
        for (int k = 0; k < nk; ++k) {
            const double w = kernel.taps[static_cast<size_t>(k)];
            dst[k] += cplx{re * w, im * w};
        }
    }
    for (auto& v : out.samples) v *= sig.dt;
    return out;
}

DenseSignal convolve_filter(const DenseSignal& sig, Pulse p, const PulseConfig& cfg) {
    return convolve_filter(sig, make_pulse_taps(p, cfg), cfg);
}

cplx sinc2_reconstruct(std::span<const cplx> samples, long long first_index, double t,
                       double T, int half_width_symbols) {
    require(!samples.empty(), "no samples");
    const double u = 2.0 * t / T;
    const long long last_index = first_index + static_cast<long long>(samples.size()) - 1;
    require(u >= static_cast<double>(first_index) - 1e-9 &&
                u <= static_cast<double>(last_index) + 1e-9,
            "out of support");
    const long long reach = 2LL * half_width_symbols;
    const long long k_lo = std::max(first_index, static_cast<long long>(std::ceil(u)) - reach);
    const long long k_hi = std::min(last_index, static_cast<long long>(std::floor(u)) + reach);
    cplx acc{0.0, 0.0};
    for (long long k = k_lo; k <= k_hi; ++k) {
        acc += samples[static_cast<size_t>(k - first_index)] * sinc(u - static_cast<double>(k));
    }
    return acc;
}

double calibrate_noise(double n0, const PulseConfig& cfg) {
    require(n0 > 0.0, "N0 must be positive");
    // Complex variance s^2 per grid sample models white noise of effective
    // PSD s^2*dt; the unit-energy RRC then yields baud-sample variance
    // s^2*dt = N0/(2T).
    return std::sqrt(n0 / (2.0 * cfg.T * cfg.dt()));
}

}  // namespace apnc
