#pragma once

#include <array>
#include <cstdint>

#include "apnc/channel.hpp"
#include "apnc/linalg.hpp"

namespace apnc {

/// Whitened double-rate observation model y_bar ~ U H x + noise, where x is
/// the interleaved symbol vector [sA0, sB0, sA1, sB1, ...] over the modeled
/// block and U is the upper Cholesky factor of the boundary-noise covariance.
struct ObservationModel {
    cvec y_bar;
    BandCholesky u;  // full factor; the decoder graph reads only the first L-1 off-diagonals
    cplx h_a{1.0, 0.0};
    cplx h_b{1.0, 0.0};
    int L = 4;
    double sigma2 = 1.0;  // complex noise variance per whitened sample

    int num_vars() const { return static_cast<int>(y_bar.size()); }
    int num_pairs() const { return num_vars() / 2; }
    cplx h_at(int i) const { return (i % 2 == 0) ? h_a : h_b; }
};

/// Baud-rate observation model y[n] ~ h_A sA[n] + h_B sum_j coeff[j] sB[n+j]
/// (no whitening; boundary samples at the A-side are white).
struct BaudModel {
    cvec y;  // one observation per modeled symbol index
    std::vector<int> b_offsets;  // the L-1 connected B-symbol offsets j
    dvec b_coeffs;               // rc(tau_hat - j*T) per offset
    cplx h_a{1.0, 0.0};
    cplx h_b{1.0, 0.0};
    double sigma2 = 1.0;

    int num_pairs() const { return static_cast<int>(y.size()); }
};

/// Chain of clustered variable nodes with per-cluster log factors
/// (observation likelihoods and guard pins), suitable for one
/// forward/backward sum-product pass.
struct FactorGraph {
    int num_vars = 0;
    std::vector<std::vector<int>> cluster_vars;  // per cluster, member var ids (bit order)
    std::vector<dvec> log_factor;                // per cluster, 2^width log factors
    std::vector<int> pair_cluster;               // per symbol pair: cluster holding it
    std::vector<int> pair_bit_a;                 // bit position of sA within that cluster
    std::vector<int> pair_bit_b;

    int num_pairs() const { return static_cast<int>(pair_cluster.size()); }
};

/// Pair posteriors indexed (bitA<<1)|bitB with bit 0 meaning +1:
/// [P(+1,+1), P(+1,-1), P(-1,+1), P(-1,-1)], each normalized to sum 1.
using PairApp = std::array<double, 4>;

struct SoftXorOutput {
    dvec u;                     // Pr(xor=0)/Pr(xor=1), clamped to [1e-12, 1e12]
    std::vector<uint8_t> hard;  // xor decisions, ties to 0
};

/// Virtual resampling: reconstruct the matched-filter output from its
/// double-baud samples and read it at both nodes' estimated symbol
/// boundaries, n = 0..n_symbols-1 relative to first_symbol_index.
std::pair<cvec, cvec> resample_boundaries(const SampleSet& y_d, double t_hat_a,
                                          double t_hat_b, int n_symbols,
                                          long long first_symbol_index,
                                          const PulseConfig& cfg, int w_symbols = 32);

/// Interleave the boundary streams, whiten with the Cholesky factor of the
/// boundary-noise covariance (built from tau_hat alone), and record the
/// banded coefficients the decoder graph will read.
/// sigma2 is the per-boundary-sample complex noise variance N0/(2T).
ObservationModel build_model(const cvec& y1, const cvec& y2, double tau_hat, cplx h_a,
                             cplx h_b, int L, const PulseConfig& cfg, double sigma2);

BaudModel build_baud_model(const SampleSet& y_b, double tau_hat, cplx h_a, cplx h_b,
                           int L, const PulseConfig& cfg);

/// pin_prefix/pin_suffix: leading/trailing symbol pairs pinned to +1
/// (transmitted guard symbols).
FactorGraph build_graph(const ObservationModel& m, int pin_prefix_pairs = 0,
                        int pin_suffix_pairs = 0);
FactorGraph build_graph(const BaudModel& m, int pin_prefix_pairs = 0,
                        int pin_suffix_pairs = 0);

/// One forward and one backward pass of the log-domain sum-product algorithm
/// over the cluster chain; exact marginals (the graph is a tree).
std::vector<PairApp> spa_decode(const FactorGraph& g);

SoftXorOutput soft_xor(const std::vector<PairApp>& pair_apps);

/// Appendix-style baud-rate decoder: model, graph, SPA, soft XOR in one call.
/// y_b holds baud samples already taken at the estimated A boundaries.
SoftXorOutput decode_baud(const SampleSet& y_b, double tau_hat, cplx h_a, cplx h_b,
                          int L, const PulseConfig& cfg, int pin_prefix_pairs = 0,
                          int pin_suffix_pairs = 0);

}  // namespace apnc
