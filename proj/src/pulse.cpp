#include "apnc/pulse.hpp"

#include <cmath>

namespace apnc {

void PulseConfig::validate() const {
    require(beta >= 0.0 && beta <= 1.0, "beta must be in [0, 1]");
    require(T > 0.0, "T must be positive");
    require(span >= 8, "span must be >= 8 symbols");
    require(M >= 8 && M % 2 == 0, "M must be an even integer >= 8");
}

double rrc_pulse(double t, const PulseConfig& cfg) {
    const double T = cfg.T;
    const double b = cfg.beta;
    if (std::abs(t) > cfg.span * T) return 0.0;
    const double scale = 1.0 / std::sqrt(T);
    const double x = t / T;
    if (b == 0.0) return scale * sinc(x);
    if (std::abs(x) < 1e-9) return scale * (1.0 - b + 4.0 * b / kPi);
    const double fbx = 4.0 * b * x;
    if (std::abs(std::abs(fbx) - 1.0) < 1e-9) {
        const double a = kPi / (4.0 * b);
        return scale * (b / std::sqrt(2.0)) *
               ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * x * (1.0 - b)) + fbx * std::cos(kPi * x * (1.0 + b));
    return scale * num / (kPi * x * (1.0 - fbx * fbx));
}

double rc_pulse(double t, const PulseConfig& cfg) {
    const double T = cfg.T;
    const double b = cfg.beta;
    if (std::abs(t) > cfg.span * T) return 0.0;
    const double x = t / T;
    if (b == 0.0) return sinc(x);
    const double tbx = 2.0 * b * x;
    if (std::abs(std::abs(tbx) - 1.0) < 1e-9) {
        return (kPi / 4.0) * sinc(1.0 / (2.0 * b));
    }
    return sinc(x) * std::cos(kPi * b * x) / (1.0 - tbx * tbx);
}

double sinc_kernel(double t, int rate, double T) {
    require(rate == 1 || rate == 2, "sinc rate must be 1 or 2");
    return sinc(rate * t / T);
}

double pulse_value(double t, Pulse p, const PulseConfig& cfg) {
    return p == Pulse::rrc ? rrc_pulse(t, cfg) : rc_pulse(t, cfg);
}

}  // namespace apnc
