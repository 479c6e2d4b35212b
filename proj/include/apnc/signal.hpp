#pragma once

#include <span>

#include "apnc/pulse.hpp"

namespace apnc {

/// Complex baseband waveform on the uniform dense grid. Sample j sits at
/// t = (start_index + j)*dt; anchoring the grid at integer multiples of dt
/// keeps baud and half-baud instants exactly on grid for every signal.
struct DenseSignal {
    long long start_index = 0;
    double dt = 0.0;
    cvec samples;

    double start_time() const { return start_index * dt; }
    double time_at(size_t j) const { return (start_index + static_cast<long long>(j)) * dt; }
    size_t size() const { return samples.size(); }
};

/// Dense-grid superposition sum_i s[i] * pulse(t - i*T - delay), covering
/// [-span*T + delay, (N-1+span)*T + delay].
DenseSignal shape_symbols(std::span<const cplx> symbols, double delay, Pulse p,
                          const PulseConfig& cfg);

/// Real filter taps evaluated on the dense grid. tap k (k = 0..size-1)
/// sits at (k - half_width) * dt.
struct FilterTaps {
    dvec taps;
    int half_width = 0;  // taps.size() == 2*half_width + 1
};

FilterTaps make_pulse_taps(Pulse p, const PulseConfig& cfg);
/// Ideal-lowpass interpolation kernel (2/T)*sinc(2t/T), truncated to
/// +-width_symbols*T. Unit passband gain over |f| <= 1/T.
FilterTaps make_sinc2_taps(const PulseConfig& cfg, int width_symbols);

/// Discrete convolution scaled by dt, approximating continuous convolution.
DenseSignal convolve_filter(const DenseSignal& sig, const FilterTaps& kernel,
                            const PulseConfig& cfg);
DenseSignal convolve_filter(const DenseSignal& sig, Pulse p, const PulseConfig& cfg);

/// Band-limited reconstruction from half-baud samples:
/// sum_k y[k] sinc(2t/T - k), truncated to |2t/T - k| <= 2W.
/// samples[j] is the value at t = (first_index + j)*T/2.
cplx sinc2_reconstruct(std::span<const cplx> samples, long long first_index, double t,
                       double T, int half_width_symbols);

/// Per-dense-grid-sample complex noise standard deviation such that after the
/// RRC matched filter each baud-rate sample has complex variance N0/(2T).
double calibrate_noise(double n0, const PulseConfig& cfg);

}  // namespace apnc
