#pragma once

#include "apnc/channel.hpp"
#include "apnc/linalg.hpp"

namespace apnc {

enum class SampleRate { baud, double_rate };

/// Correlator output over lags m = 1-d..d, re-indexed so the nominal peak
/// sits at m = 0. values[m - (1-d)] holds c[m].
struct CorrelationWindow {
    cvec values;
    int d = 0;
    int zc_length = 0;     // Q, the model amplitude scale
    double noise_var = 0;  // per-entry complex noise variance
    SampleRate rate = SampleRate::baud;
};

/// Cholesky whitener of the double-rate correlation noise covariance shape
/// Sigma0[i][j] = rc((j-i)T/2) over the 2d-point window.
struct WhiteningOperator {
    SymBandMatrix sigma0;
    BandCholesky u0;

    int dim() const { return sigma0.n; }
    /// c_dd = U0^{-T} c
    cvec apply_inv_t(cvec c) const {
        u0.solve_transposed(c);
        return c;
    }
};

struct OffsetEstimate {
    double t_hat_a = 0.0;
    double t_hat_b = 0.0;
    double tau_hat = 0.0;
    SampleRate method = SampleRate::baud;
};

/// c[m] = sum_{n=0}^{Q-1} z*[n] y[n + peak_index + m]. peak_index is the
/// receiver sample index where the local sequence aligns with the transmitted
/// ZC body; pass peak_index < 0 to locate it by |c| argmax instead (the frame
/// layout makes the nominal index exact, so argmax is mainly a cross-check).
CorrelationWindow crosscorr_baud(const SampleSet& y, const cvec& z, int d,
                                 long long peak_index);

/// z_d[k] = sum_i z[i] rrc(kT/2 - iT), k = 0..2Q-1.
cvec interpolate_zc_double(const cvec& z, const PulseConfig& cfg);

/// Same as crosscorr_baud on the sinc2-filtered double-rate stream, local
/// replica z_d of length 2Q, lags in half-symbol steps.
CorrelationWindow crosscorr_double(const SampleSet& y, const cvec& z_d, int d,
                                   long long peak_index);

WhiteningOperator build_whitener(int d, const PulseConfig& cfg);

/// Whitened window U0^{-T} c; noise becomes white across the 2d entries.
cvec whiten_window(const CorrelationWindow& c, const WhiteningOperator& w);

/// Double-rate self-correlation of the truncated RRC tap sequence,
/// S(s) = sum_k p'(kT/2) p'(kT/2 - s)  (= (2/T) rc(s) up to truncation).
/// The idealized shape of the double-rate correlation peak; kept for
/// identity checks against the exact template below.
class DoubleRateTemplate {
  public:
    explicit DoubleRateTemplate(const PulseConfig& cfg, double s_max);
    double operator()(double s) const;
    double s_max() const { return s_max_; }

  private:
    double s_max_ = 0.0;
    double step_ = 0.0;
    dvec values_;
};

/// Noiseless correlation window of one node's replica against one node's
/// known preamble waveform, as a function of that waveform's time offset t:
/// v(t)[m], m = 1-d..d. The waveform carries the effective pulse of the
/// receive path (RC for the matched-filter baud path, RRC for the sinc2
/// double-rate path), so the ML fit has no cyclic-idealization bias at small
/// roll-off. (replica == waveform) gives the per-user model; mixed nodes give
/// the cross-user leakage used for cancellation between the two fits.
/// Tabulated on a 1e-3 T grid and read by linear interpolation.
class CorrelationTemplate {
  public:
    CorrelationTemplate(const PreambleSpec& spec, Node replica, Node waveform, int d,
                        SampleRate rate, const PulseConfig& cfg);
    cplx at(int m, double t) const;  // m in 1-d..d
    int d() const { return d_; }
    SampleRate rate() const { return rate_; }

  private:
    int d_ = 0;
    SampleRate rate_ = SampleRate::baud;
    double t_min_ = 0.0;
    double step_ = 0.0;
    std::vector<cvec> values_;  // values_[m - (1-d)][t index]
};

/// The four templates one estimator rate needs: per-user models and the two
/// cross-leakage tables.
struct TemplateSet {
    CorrelationTemplate self_a, self_b, a_on_b, b_on_a;

    TemplateSet(const PreambleSpec& spec, int d, SampleRate rate, const PulseConfig& cfg)
        : self_a(spec, Node::A, Node::A, d, rate, cfg),
          self_b(spec, Node::B, Node::B, d, rate, cfg),
          a_on_b(spec, Node::A, Node::B, d, rate, cfg),
          b_on_a(spec, Node::B, Node::A, d, rate, cfg) {}
};

/// ML search settings: coarse grid over [-T/2, T/2) then golden-section
/// refinement; ties resolved toward the smallest candidate. cross_passes
/// alternating refits with the other user's modeled leakage subtracted
/// remove the residual cross-correlation bias at small roll-off.
struct SearchOptions {
    double coarse_step_frac = 1.0 / 200.0;  // coarse step = frac * T
    double tol_frac = 1e-4;                 // refinement tolerance = frac * T
    int cross_passes = 2;
};

OffsetEstimate estimate_baud(const CorrelationWindow& c_a, const CorrelationWindow& c_b,
                             const TemplateSet& tmpl, cplx h_a, cplx h_b,
                             const PulseConfig& cfg, const SearchOptions& opt = {});

OffsetEstimate estimate_double(const cvec& ca_white, const cvec& cb_white,
                               const TemplateSet& tmpl, const WhiteningOperator& w,
                               cplx h_a, cplx h_b, const PulseConfig& cfg,
                               const SearchOptions& opt = {});

}  // namespace apnc
