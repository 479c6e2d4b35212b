#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnc {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using dvec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::invalid_argument(msg);
}

inline void require(bool ok, const char* msg) {
    if (!ok) fail(msg);
}

/// sin(pi x)/(pi x) with the removable singularity at x = 0.
inline double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-8) {
        const double px = kPi * x;
        return 1.0 - px * px / 6.0;
    }
    const double px = kPi * x;
    return std::sin(px) / px;
}

}  // namespace apnc
