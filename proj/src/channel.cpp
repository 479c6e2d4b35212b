#include "apnc/channel.hpp"

#include <algorithm>
#include <cmath>

#include "apnc/rng.hpp"

namespace apnc {

void ChannelRealization::validate(double symbol_t) const {
    require(std::abs(t_a) <= symbol_t / 2.0 && std::abs(t_b) <= symbol_t / 2.0,
            "offsets must satisfy |t| <= T/2");
    const double tau_v = tau();
    require(tau_v >= -symbol_t && tau_v < symbol_t, "tau must lie in [-T, T)");
    require(n0 >= 0.0, "N0 must be non-negative");
}

DenseSignal uplink_superpose(const SymbolFrame& frame_a, const SymbolFrame& frame_b,
                             const ChannelRealization& ch, const PulseConfig& cfg,
                             int extra_margin_symbols) {
    cfg.validate();
    ch.validate(cfg.T);

    const cvec sa = frame_a.all_symbols();
    const cvec sb = frame_b.all_symbols();
    const DenseSignal xa = shape_symbols(sa, ch.t_a, Pulse::rrc, cfg);
    const DenseSignal xb = shape_symbols(sb, ch.t_b, Pulse::rrc, cfg);
    require(std::abs(xa.dt - xb.dt) < 1e-15, "incompatible grids");

    const long long margin = static_cast<long long>(extra_margin_symbols) * cfg.M;
    const long long start = std::min(xa.start_index, xb.start_index) - margin;
    const long long stop =
        std::max(xa.start_index + static_cast<long long>(xa.size()),
                 xb.start_index + static_cast<long long>(xb.size())) +
        margin;

    DenseSignal r;
    r.start_index = start;
    r.dt = xa.dt;
    r.samples.assign(static_cast<size_t>(stop - start), cplx{0.0, 0.0});

    for (size_t j = 0; j < xa.size(); ++j) {
        r.samples[static_cast<size_t>(xa.start_index - start) + j] += ch.h_a * xa.samples[j];
    }
    for (size_t j = 0; j < xb.size(); ++j) {
        r.samples[static_cast<size_t>(xb.start_index - start) + j] += ch.h_b * xb.samples[j];
    }

    if (ch.n0 > 0.0) {
        const double s2 = calibrate_noise(ch.n0, cfg);
        auto rng = make_rng(ch.seed);
        std::normal_distribution<double> n(0.0, s2 / std::sqrt(2.0));
        for (auto& v : r.samples) v += cplx{n(rng), n(rng)};
    }
    return r;
}

DenseSignal front_end(const DenseSignal& r, FrontEndFilter f, const PulseConfig& cfg,
                      int sinc2_width_symbols) {
    const FilterTaps taps = (f == FrontEndFilter::rrc)
                                ? make_pulse_taps(Pulse::rrc, cfg)
                                : make_sinc2_taps(cfg, sinc2_width_symbols);
    return convolve_filter(r, taps, cfg);
}

SampleSet take_samples(const DenseSignal& y, SampleKind kind, const PulseConfig& cfg,
                       double n0) {
    cfg.validate();
    const int stride = kind == SampleKind::baud_rrc ? cfg.M : cfg.M / 2;
    const long long first_grid = y.start_index;
    const long long last_grid = y.start_index + static_cast<long long>(y.size()) - 1;

    // First sampling instant at or after the signal start.
    long long n_lo = first_grid / stride;
    while (n_lo * stride < first_grid) ++n_lo;
    long long n_hi = last_grid / stride;
    while (n_hi * stride > last_grid) --n_hi;
    require(n_hi >= n_lo, "requested instants off-grid");

    SampleSet s;
    s.kind = kind;
    s.first_index = n_lo;
    s.sigma2 = sample_sigma2(kind, n0, cfg.T);
    s.samples.resize(static_cast<size_t>(n_hi - n_lo + 1));
    for (long long n = n_lo; n <= n_hi; ++n) {
        s.samples[static_cast<size_t>(n - n_lo)] =
            y.samples[static_cast<size_t>(n * stride - first_grid)];
    }
    return s;
}

SampleSet front_end_sampled(const DenseSignal& r, SampleKind kind, const PulseConfig& cfg,
                            double n0, long long first_index, size_t count,
                            int sinc2_width_symbols) {
    const FilterTaps taps = (kind == SampleKind::double_sinc2)
                                ? make_sinc2_taps(cfg, sinc2_width_symbols)
                                : make_pulse_taps(Pulse::rrc, cfg);
    const int stride = kind == SampleKind::baud_rrc ? cfg.M : cfg.M / 2;
    const int nk = static_cast<int>(taps.taps.size());
    const long long ns = static_cast<long long>(r.size());

    SampleSet s;
    s.kind = kind;
    s.first_index = first_index;
    s.sigma2 = sample_sigma2(kind, n0, cfg.T);
    s.samples.assign(count, cplx{0.0, 0.0});

    for (size_t i = 0; i < count; ++i) {
        const long long out_grid = (first_index + static_cast<long long>(i)) * stride;
        // out[g] = dt * sum_k r[g + half - k] * taps[k]
        const long long base = out_grid + taps.half_width - r.start_index;
        const int k_lo = static_cast<int>(std::max(0LL, base - (ns - 1)));
        const int k_hi = static_cast<int>(std::min(static_cast<long long>(nk - 1), base));
        double acc_re = 0.0, acc_im = 0.0;
        const cplx* src = r.samples.data();
        for (int k = k_lo; k <= k_hi; ++k) {
            const double w = taps.taps[static_cast<size_t>(k)];
            const cplx v = src[base - k];
            acc_re += w * v.real();
            acc_im += w * v.imag();
        }
        s.samples[i] = cplx{acc_re * r.dt, acc_im * r.dt};
    }
    return s;
}

}  // namespace apnc
