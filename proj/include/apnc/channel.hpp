#pragma once

#include "apnc/preamble.hpp"
#include "apnc/signal.hpp"

namespace apnc {

/// One uplink draw: complex gains, fractional time offsets of both nodes
/// against the relay clock, noise level, and the noise RNG seed.
struct ChannelRealization {
    cplx h_a{1.0, 0.0};
    cplx h_b{1.0, 0.0};
    double t_a = 0.0;
    double t_b = 0.0;
    double n0 = 0.0;  // 0 disables noise
    uint64_t seed = 0;

    double tau() const { return t_a - t_b; }
    void validate(double symbol_t) const;
};

enum class SampleKind { baud_rrc, double_rrc, double_sinc2 };
enum class FrontEndFilter { rrc, sinc2 };

/// Receiver-clock sample stream. samples[j] is the value at
/// t = (first_index + j)*step, step = T (baud) or T/2 (double rate).
struct SampleSet {
    SampleKind kind = SampleKind::baud_rrc;
    long long first_index = 0;
    cvec samples;
    double sigma2 = 0.0;  // N0/2T for baud_rrc, N0/T for the double-rate kinds

    double step(double symbol_t) const {
        return kind == SampleKind::baud_rrc ? symbol_t : symbol_t / 2.0;
    }
    cplx at(long long index) const {
        const long long j = index - first_index;
        require(j >= 0 && j < static_cast<long long>(samples.size()),
                "sample index out of range");
        return samples[static_cast<size_t>(j)];
    }
};

inline double sample_sigma2(SampleKind kind, double n0, double symbol_t) {
    return kind == SampleKind::baud_rrc ? n0 / (2.0 * symbol_t) : n0 / symbol_t;
}

/// r(t) = h_A x_A(t - t_A) + h_B x_B(t - t_B) + n(t) on the dense grid.
/// extra_margin_symbols widens the noise-covered grid on both sides so that
/// later interpolation near the frame edges sees stationary noise.
DenseSignal uplink_superpose(const SymbolFrame& frame_a, const SymbolFrame& frame_b,
                             const ChannelRealization& ch, const PulseConfig& cfg,
                             int extra_margin_symbols = 0);

/// RRC matched filter (effective pulse RC) or sinc(2t) low-pass
/// (effective pulse RRC, doubled noise power).
DenseSignal front_end(const DenseSignal& r, FrontEndFilter f, const PulseConfig& cfg,
                      int sinc2_width_symbols = 32);

/// Exact grid reads at t = nT or t = kT/2 over the signal's support.
SampleSet take_samples(const DenseSignal& y, SampleKind kind, const PulseConfig& cfg,
                       double n0);

/// Fused front_end + take_samples restricted to [first_index, first_index+count):
/// identical values, computed only where needed. The filter is implied by the
/// sample kind (sinc2 for double_sinc2, RRC otherwise).
SampleSet front_end_sampled(const DenseSignal& r, SampleKind kind, const PulseConfig& cfg,
                            double n0, long long first_index, size_t count,
                            int sinc2_width_symbols = 32);

}  // namespace apnc
