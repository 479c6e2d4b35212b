#include "apnc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace apnc {

namespace {

CorrelationWindow crosscorr_impl(const SampleSet& y, const cvec& z, int d,
                                 long long peak_index, SampleRate rate) {
    require(d >= 1, "window half-size d must be >= 1");
    const long long q = static_cast<long long>(z.size());
    const long long lo = y.first_index;
    const long long hi = y.first_index + static_cast<long long>(y.samples.size());

    auto corr_at = [&](long long m) {
        cplx acc{0.0, 0.0};
        const cplx* ys = y.samples.data() + (m - lo);
        for (long long n = 0; n < q; ++n) {
            acc += std::conj(z[static_cast<size_t>(n)]) * ys[n];
        }
        return acc;
    };

    if (peak_index < 0) {
        // Scan every lag where the full replica and the window both fit.
        double best = -1.0;
        for (long long m = lo + (d - 1); m + q + d <= hi; ++m) {
            const double mag = std::abs(corr_at(m));
            if (mag > best) {
                best = mag;
                peak_index = m;
            }
        }
        require(peak_index >= 0, "window exceeds available samples");
    }

    require(peak_index + (1 - d) >= lo && peak_index + d + q <= hi,
            "window exceeds available samples");

    CorrelationWindow c;
    c.d = d;
    c.zc_length = static_cast<int>(rate == SampleRate::baud ? q : q / 2);
    c.rate = rate;
    c.values.resize(static_cast<size_t>(2 * d));
    for (int m = 1 - d; m <= d; ++m) {
        c.values[static_cast<size_t>(m - (1 - d))] = corr_at(peak_index + m);
    }
    return c;
}

}  // namespace

CorrelationWindow crosscorr_baud(const SampleSet& y, const cvec& z, int d,
                                 long long peak_index) {
    require(y.kind == SampleKind::baud_rrc, "crosscorr_baud needs baud_rrc samples");
    CorrelationWindow c = crosscorr_impl(y, z, d, peak_index, SampleRate::baud);
    c.noise_var = static_cast<double>(c.zc_length) * y.sigma2;
    return c;
}

cvec interpolate_zc_double(const cvec& z, const PulseConfig& cfg) {
    cfg.validate();
    const int q = static_cast<int>(z.size());
    // Interpolate the cyclic extension of z, matching the prefix/suffix
    // structure of the transmitted preamble; interpolating the bare sequence
    // would clip tail mass and bias the correlation template.
    cvec zd(static_cast<size_t>(2 * q), cplx{0.0, 0.0});
    for (int k = 0; k < 2 * q; ++k) {
        cplx acc{0.0, 0.0};
        for (int i = -cfg.span - 1; i < q + cfg.span + 1; ++i) {
            const double w = rrc_pulse(k * cfg.T / 2.0 - i * cfg.T, cfg);
            if (w != 0.0) acc += z[static_cast<size_t>(((i % q) + q) % q)] * w;
        }
        zd[static_cast<size_t>(k)] = acc;
    }
    return zd;
}

CorrelationWindow crosscorr_double(const SampleSet& y, const cvec& z_d, int d,
                                   long long peak_index) {
    require(y.kind == SampleKind::double_sinc2,
            "crosscorr_double needs sinc2 front-end samples");
    CorrelationWindow c = crosscorr_impl(y, z_d, d, peak_index, SampleRate::double_rate);
    // Per-entry variance 2 sigma^2 ||z_d||^2; the replica energy carries the
    // double-rate correlation gain (~2Q/T).
    double e = 0.0;
    for (const cplx& v : z_d) e += std::norm(v);
    c.noise_var = y.sigma2 * e;
    return c;
}

WhiteningOperator build_whitener(int d, const PulseConfig& cfg) {
    require(d >= 1, "window half-size d must be >= 1");
    cfg.validate();
    const int n = 2 * d;
    WhiteningOperator w;
    w.sigma0 = SymBandMatrix(n, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; i + k < n; ++k) {
            w.sigma0.at(i, k) = rc_pulse(k * cfg.T / 2.0, cfg);
        }
    }
    w.u0 = cholesky(w.sigma0, 1e-12, "covariance not positive definite");
    return w;
}

cvec whiten_window(const CorrelationWindow& c, const WhiteningOperator& w) {
    require(static_cast<int>(c.values.size()) == w.dim(), "dimension mismatch");
    return w.apply_inv_t(c.values);
}

CorrelationTemplate::CorrelationTemplate(const PreambleSpec& spec, Node replica_node,
                                         Node waveform_node, int d, SampleRate rate,
                                         const PulseConfig& cfg) {
    spec.validate();
    cfg.validate();
    require(d >= 1, "window half-size d must be >= 1");
    d_ = d;
    rate_ = rate;
    const double T = cfg.T;
    t_min_ = -0.6 * T;
    step_ = 1e-3 * T;
    const int n_t = static_cast<int>(std::ceil(1.2 * T / step_)) + 1;

    auto [z_a, z_b] = assign_pair(spec);
    const cvec& z_rep = replica_node == Node::A ? z_a : z_b;
    const cvec& z_wave = waveform_node == Node::A ? z_a : z_b;
    const cvec pre = cyclic_extend(z_wave, spec.G);
    const int p_len = static_cast<int>(pre.size());
    const Pulse eff = rate == SampleRate::baud ? Pulse::rc : Pulse::rrc;
    const cvec replica =
        rate == SampleRate::baud ? z_rep : interpolate_zc_double(z_rep, cfg);
    const int half = rate == SampleRate::baud ? 2 : 1;  // sample spacing in T/2 units

    // Peak-aligned sample instants of replica tap k at window lag m:
    //   t_abs = (base + k*half + m*half_lag) * T/2 with the replica aligned to
    //   the ZC body at symbol index G.
    const int base = 2 * spec.G;
    values_.assign(static_cast<size_t>(2 * d), cvec(static_cast<size_t>(n_t)));
    const int k_lo = base - 2 * d - 2 * cfg.span - 2;
    const int k_hi =
        base + half * static_cast<int>(replica.size()) + 2 * d + 2 * cfg.span + 2;
    const int tap_reach = 2 * cfg.span + 2;
    dvec tap(static_cast<size_t>(2 * tap_reach + 1));
    cvec wave(static_cast<size_t>(k_hi - k_lo + 1));
    for (int ti = 0; ti < n_t; ++ti) {
        const double t_off = t_min_ + ti * step_;
        // pulse value at half-grid distance j from a symbol: tap[j + reach]
        for (int j = -tap_reach; j <= tap_reach; ++j) {
            tap[static_cast<size_t>(j + tap_reach)] =
                pulse_value(j * T / 2.0 - t_off, eff, cfg);
        }
        // modeled preamble waveform on the half grid
        for (int k = k_lo; k <= k_hi; ++k) {
            cplx acc{0.0, 0.0};
            for (int i = 0; i < p_len; ++i) {
                const int j = k - 2 * i;
                if (j < -tap_reach || j > tap_reach) continue;
                acc += pre[static_cast<size_t>(i)] * tap[static_cast<size_t>(j + tap_reach)];
            }
            wave[static_cast<size_t>(k - k_lo)] = acc;
        }
        for (int m = 1 - d; m <= d; ++m) {
            cplx acc{0.0, 0.0};
            for (size_t k = 0; k < replica.size(); ++k) {
                const int idx = base + half * (static_cast<int>(k) + m) - k_lo;
                acc += std::conj(replica[k]) * wave[static_cast<size_t>(idx)];
            }
            values_[static_cast<size_t>(m - (1 - d))][static_cast<size_t>(ti)] = acc;
        }
    }
}

cplx CorrelationTemplate::at(int m, double t) const {
    const cvec& row = values_[static_cast<size_t>(m - (1 - d_))];
    const double x = (t - t_min_) / step_;
    if (x <= 0.0) return row.front();
    const size_t n = row.size();
    if (x >= static_cast<double>(n - 1)) return row.back();
    const size_t j = static_cast<size_t>(x);
    const double f = x - static_cast<double>(j);
    return row[j] * (1.0 - f) + row[j + 1] * f;
}

DoubleRateTemplate::DoubleRateTemplate(const PulseConfig& cfg, double s_max) {
    cfg.validate();
    s_max_ = s_max;
    step_ = 1e-3 * cfg.T;
    const int n = static_cast<int>(std::ceil(2.0 * s_max / step_)) + 1;
    values_.resize(static_cast<size_t>(n));
    const int k_reach = 2 * cfg.span + 2;
    for (int j = 0; j < n; ++j) {
        const double s = -s_max_ + j * step_;
        double acc = 0.0;
        for (int k = -k_reach; k <= k_reach; ++k) {
            const double a = rrc_pulse(k * cfg.T / 2.0, cfg);
            if (a != 0.0) acc += a * rrc_pulse(k * cfg.T / 2.0 - s, cfg);
        }
        values_[static_cast<size_t>(j)] = acc;
    }
}

double DoubleRateTemplate::operator()(double s) const {
    const double x = (s + s_max_) / step_;
    if (x <= 0.0) return values_.front();
    const size_t n = values_.size();
    if (x >= static_cast<double>(n - 1)) return values_.back();
    const size_t j = static_cast<size_t>(x);
    const double f = x - static_cast<double>(j);
    return values_[j] * (1.0 - f) + values_[j + 1] * f;
}

namespace {

/// Coarse scan over [lo, hi) then golden-section refinement around the best
/// candidate. Strictly-less comparisons keep the smallest candidate on ties.
double minimize_offset(const std::function<double(double)>& cost, double lo, double hi,
                       double step, double tol) {
    double best_t = lo;
    double best_j = cost(lo);
    for (double t = lo + step; t < hi; t += step) {
        const double j = cost(t);
        if (j < best_j) {
            best_j = j;
            best_t = t;
        }
    }

    double a = std::max(lo, best_t - step);
    double b = std::min(hi, best_t + step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = cost(x1), f2 = cost(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = cost(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    return cost(mid) < best_j ? mid : best_t;
}

}  // namespace

namespace {

cvec window_model(const CorrelationTemplate& tmpl, cplx h, double t) {
    const int d = tmpl.d();
    cvec v(static_cast<size_t>(2 * d));
    for (int m = 1 - d; m <= d; ++m) {
        v[static_cast<size_t>(m - (1 - d))] = h * tmpl.at(m, t);
    }
    return v;
}

}  // namespace

OffsetEstimate estimate_baud(const CorrelationWindow& c_a, const CorrelationWindow& c_b,
                             const TemplateSet& tmpl, cplx h_a, cplx h_b,
                             const PulseConfig& cfg, const SearchOptions& opt) {
    require(c_a.rate == SampleRate::baud && c_b.rate == SampleRate::baud,
            "estimate_baud needs baud-rate windows");
    require(tmpl.self_a.rate() == SampleRate::baud, "estimate_baud needs baud templates");
    const int d = c_a.d;
    require(tmpl.self_a.d() == d && c_b.d == d, "dimension mismatch");
    const double T = cfg.T;

    auto fit = [&](const cvec& c, const CorrelationTemplate& self, cplx h) {
        auto cost = [&](double t) {
            double j = 0.0;
            for (int m = 1 - d; m <= d; ++m) {
                const cplx model = h * self.at(m, t);
                j += std::norm(c[static_cast<size_t>(m - (1 - d))] - model);
            }
            return j;
        };
        return minimize_offset(cost, -T / 2.0, T / 2.0, opt.coarse_step_frac * T,
                               opt.tol_frac * T);
    };

    OffsetEstimate e;
    e.method = SampleRate::baud;
    e.t_hat_a = fit(c_a.values, tmpl.self_a, h_a);
    e.t_hat_b = fit(c_b.values, tmpl.self_b, h_b);
    // Alternating refits with the other user's leakage removed; matters only
    // when the pulse tails are long against the preamble (small beta).
    for (int pass = 0; pass < opt.cross_passes; ++pass) {
        cvec ca = c_a.values;
        const cvec leak_b = window_model(tmpl.a_on_b, h_b, e.t_hat_b);
        for (size_t i = 0; i < ca.size(); ++i) ca[i] -= leak_b[i];
        e.t_hat_a = fit(ca, tmpl.self_a, h_a);

        cvec cb = c_b.values;
        const cvec leak_a = window_model(tmpl.b_on_a, h_a, e.t_hat_a);
        for (size_t i = 0; i < cb.size(); ++i) cb[i] -= leak_a[i];
        e.t_hat_b = fit(cb, tmpl.self_b, h_b);
    }
    e.tau_hat = std::clamp(e.t_hat_a - e.t_hat_b, -T, std::nextafter(T, 0.0));
    return e;
}

OffsetEstimate estimate_double(const cvec& ca_white, const cvec& cb_white,
                               const TemplateSet& tmpl, const WhiteningOperator& w,
                               cplx h_a, cplx h_b, const PulseConfig& cfg,
                               const SearchOptions& opt) {
    const int n = w.dim();
    require(static_cast<int>(ca_white.size()) == n && static_cast<int>(cb_white.size()) == n,
            "dimension mismatch");
    require(tmpl.self_a.rate() == SampleRate::double_rate,
            "estimate_double needs double-rate templates");
    const int d = n / 2;
    require(tmpl.self_a.d() == d, "dimension mismatch");
    const double T = cfg.T;

    auto fit = [&](const cvec& c_white, const CorrelationTemplate& self, cplx h) {
        cvec v(static_cast<size_t>(n));
        auto cost = [&](double t) {
            for (int m = 1 - d; m <= d; ++m) {
                v[static_cast<size_t>(m - (1 - d))] = h * self.at(m, t);
            }
            w.u0.solve_transposed(v);
            double j = 0.0;
            for (int i = 0; i < n; ++i) {
                j += std::norm(c_white[static_cast<size_t>(i)] - v[static_cast<size_t>(i)]);
            }
            return j;
        };
        return minimize_offset(cost, -T / 2.0, T / 2.0, opt.coarse_step_frac * T,
                               opt.tol_frac * T);
    };

    OffsetEstimate e;
    e.method = SampleRate::double_rate;
    e.t_hat_a = fit(ca_white, tmpl.self_a, h_a);
    e.t_hat_b = fit(cb_white, tmpl.self_b, h_b);
    for (int pass = 0; pass < opt.cross_passes; ++pass) {
        cvec leak_b = window_model(tmpl.a_on_b, h_b, e.t_hat_b);
        w.u0.solve_transposed(leak_b);
        cvec ca = ca_white;
        for (size_t i = 0; i < ca.size(); ++i) ca[i] -= leak_b[i];
        e.t_hat_a = fit(ca, tmpl.self_a, h_a);

        cvec leak_a = window_model(tmpl.b_on_a, h_a, e.t_hat_a);
        w.u0.solve_transposed(leak_a);
        cvec cb = cb_white;
        for (size_t i = 0; i < cb.size(); ++i) cb[i] -= leak_a[i];
        e.t_hat_b = fit(cb, tmpl.self_b, h_b);
    }
    e.tau_hat = std::clamp(e.t_hat_a - e.t_hat_b, -T, std::nextafter(T, 0.0));
    return e;
}

}  // namespace apnc
