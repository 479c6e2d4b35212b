#pragma once

#include "apnc/common.hpp"

namespace apnc {

/// Pulse-shaping parameters shared across the whole chain.
/// The dense simulation grid has step T/M; M must be even so both the
/// baud instants nT and the half-baud instants kT/2 land on grid points.
struct PulseConfig {
    double beta = 1.0;  // roll-off, 0 <= beta <= 1
    double T = 1.0;     // symbol duration
    int span = 16;      // one-sided pulse truncation, in symbols
    int M = 16;         // dense-grid samples per symbol

    void validate() const;
    double dt() const { return T / M; }
};

enum class Pulse { rrc, rc };

/// Unit-energy root-raised-cosine pulse, hard-truncated to |t| <= span*T.
/// Removable singularities at t = 0 and |t| = T/(4 beta) are evaluated by
/// their analytic limits with a 1e-9 guard band.
double rrc_pulse(double t, const PulseConfig& cfg);

/// Raised-cosine pulse with p(0) = 1 (the self-convolution of the unit-energy
/// RRC), ISI-free at integer multiples of T. Singular point |t| = T/(2 beta)
/// handled by its analytic limit. Hard-truncated like rrc_pulse.
double rc_pulse(double t, const PulseConfig& cfg);

/// sinc(rate*t/T) for rate 1 or 2. Total function; no truncation.
double sinc_kernel(double t, int rate, double T);

double pulse_value(double t, Pulse p, const PulseConfig& cfg);

}  // namespace apnc
