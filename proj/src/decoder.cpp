#include "apnc/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace apnc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const dvec& v) {
    double mx = kNegInf;
    for (double x : v) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

void normalize_log(dvec& v) {
    const double z = logsumexp(v);
    if (z == kNegInf) fail("factor table is identically zero");
    for (double& x : v) x -= z;
}

/// Exact covariance of the simulated dense-grid noise read at two instants:
/// dt * sum_j p'(t1 - j dt) p'(t2 - j dt). A Gram form, so any covariance
/// matrix assembled from it is positive semidefinite for truncated pulses,
/// which the ideal closed-form RC is not.
double gram_correlation(double t1, double t2, const PulseConfig& cfg) {
    const double dt = cfg.dt();
    const double reach = cfg.span * cfg.T;
    const long long j_lo =
        static_cast<long long>(std::ceil((std::max(t1, t2) - reach) / dt));
    const long long j_hi =
        static_cast<long long>(std::floor((std::min(t1, t2) + reach) / dt));
    double acc = 0.0;
    for (long long j = j_lo; j <= j_hi; ++j) {
        acc += rrc_pulse(t1 - j * dt, cfg) * rrc_pulse(t2 - j * dt, cfg);
    }
    return acc * dt;
}

}  // namespace

std::pair<cvec, cvec> resample_boundaries(const SampleSet& y_d, double t_hat_a,
                                          double t_hat_b, int n_symbols,
                                          long long first_symbol_index,
                                          const PulseConfig& cfg, int w_symbols) {
    require(y_d.kind == SampleKind::double_rrc,
            "resample_boundaries needs double_rrc samples");
    require(n_symbols >= 1, "n_symbols must be >= 1");
    const double T = cfg.T;
    const long long last = y_d.first_index + static_cast<long long>(y_d.samples.size()) - 1;

    const double t0 = first_symbol_index * T + std::min(t_hat_a, t_hat_b);
    const double t1 = (first_symbol_index + n_symbols - 1) * T + std::max(t_hat_a, t_hat_b);
    const bool covered = 2.0 * t0 / T - 2 * w_symbols >= static_cast<double>(y_d.first_index) &&
                         2.0 * t1 / T + 2 * w_symbols <= static_cast<double>(last);
    require(covered, "insufficient guard samples");

    cvec ya(static_cast<size_t>(n_symbols));
    cvec yb(static_cast<size_t>(n_symbols));
    for (int n = 0; n < n_symbols; ++n) {
        const double base = (first_symbol_index + n) * T;
        ya[static_cast<size_t>(n)] = sinc2_reconstruct(y_d.samples, y_d.first_index,
                                                       base + t_hat_a, T, w_symbols);
        yb[static_cast<size_t>(n)] = sinc2_reconstruct(y_d.samples, y_d.first_index,
                                                       base + t_hat_b, T, w_symbols);
    }
    return {ya, yb};
}

ObservationModel build_model(const cvec& y1, const cvec& y2, double tau_hat, cplx h_a,
                             cplx h_b, int L, const PulseConfig& cfg, double sigma2) {
    require(y1.size() == y2.size() && !y1.empty(), "boundary streams must match");
    require(L >= 2 && L % 2 == 0, "L must be an even integer >= 2");
    const int n_pairs = static_cast<int>(y1.size());
    const int m = 2 * n_pairs;
    require(L <= m, "L exceeds the modeled block");

    ObservationModel om;
    om.h_a = h_a;
    om.h_b = h_b;
    om.L = L;
    om.sigma2 = sigma2;

    // Boundary instants, canonically anchored so the covariance is a function
    // of tau_hat alone: A rows at nT + tau/2, B rows at nT - tau/2.
    auto row_time = [&](int i) {
        return (i / 2) * cfg.T + (i % 2 == 0 ? tau_hat / 2.0 : -tau_hat / 2.0);
    };

    const int bw = std::min(m - 1, 4 * cfg.span + 2);
    SymBandMatrix sigma(m, bw);
    std::map<std::tuple<int, int, int>, double> cache;
    dvec diag(static_cast<size_t>(2));
    diag[0] = gram_correlation(row_time(0), row_time(0), cfg);
    diag[1] = gram_correlation(row_time(1), row_time(1), cfg);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k <= bw && i + k < m; ++k) {
            const int j = i + k;
            const auto key = std::make_tuple(i % 2, j % 2, j / 2 - i / 2);
            auto it = cache.find(key);
            double r;
            if (it == cache.end()) {
                r = gram_correlation(row_time(i), row_time(j), cfg);
                cache.emplace(key, r);
            } else {
                r = it->second;
            }
            sigma.at(i, k) = r / std::sqrt(diag[static_cast<size_t>(i % 2)] *
                                           diag[static_cast<size_t>(j % 2)]);
        }
    }
    // Small diagonal floor covering interpolation-truncation noise; keeps the
    // factorization away from the exact-arithmetic singularity of heavily
    // oversampled low-beta noise.
    for (int i = 0; i < m; ++i) sigma.at(i, 0) += 1e-10;

    om.u = cholesky(sigma, 1e-12, "Sigma not positive definite");

    om.y_bar.resize(static_cast<size_t>(m));
    for (int n = 0; n < n_pairs; ++n) {
        om.y_bar[static_cast<size_t>(2 * n)] = y1[static_cast<size_t>(n)];
        om.y_bar[static_cast<size_t>(2 * n + 1)] = y2[static_cast<size_t>(n)];
    }
    om.u.solve_transposed(om.y_bar);
    return om;
}

BaudModel build_baud_model(const SampleSet& y_b, double tau_hat, cplx h_a, cplx h_b,
                           int L, const PulseConfig& cfg) {
    require(y_b.kind == SampleKind::baud_rrc, "decode_baud needs baud_rrc samples");
    require(L >= 2 && L % 2 == 0, "L must be an even integer >= 2");
    require(!y_b.samples.empty(), "empty sample set");

    BaudModel bm;
    bm.y = y_b.samples;
    bm.h_a = h_a;
    bm.h_b = h_b;
    bm.sigma2 = y_b.sigma2;
    const int j_lo = -((L - 1) / 2);
    for (int j = j_lo; j < j_lo + L - 1; ++j) {
        bm.b_offsets.push_back(j);
        bm.b_coeffs.push_back(rc_pulse(tau_hat - j * cfg.T, cfg));
    }
    return bm;
}

namespace {

FactorGraph finish_graph(FactorGraph g, int pin_prefix_pairs, int pin_suffix_pairs) {
    const int nv = g.num_vars;
    auto pinned = [&](int v) {
        return v < 2 * pin_prefix_pairs || v >= nv - 2 * pin_suffix_pairs;
    };
    for (size_t c = 0; c < g.cluster_vars.size(); ++c) {
        const auto& vars = g.cluster_vars[c];
        const int width = static_cast<int>(vars.size());
        for (int s = 0; s < (1 << width); ++s) {
            for (int b = 0; b < width; ++b) {
                if (((s >> b) & 1) != 0 && pinned(vars[static_cast<size_t>(b)])) {
                    g.log_factor[c][static_cast<size_t>(s)] = kNegInf;
                    break;
                }
            }
        }
        normalize_log(g.log_factor[c]);
    }
    return g;
}

}  // namespace

FactorGraph build_graph(const ObservationModel& m, int pin_prefix_pairs,
                        int pin_suffix_pairs) {
    const int nv = m.num_vars();
    const int L = m.L;
    require(L <= nv, "L exceeds the modeled block");

    FactorGraph g;
    g.num_vars = nv;
    const int n_clusters = nv - L + 1;
    g.cluster_vars.resize(static_cast<size_t>(n_clusters));
    g.log_factor.assign(static_cast<size_t>(n_clusters), dvec(1u << L, 0.0));

    for (int c = 0; c < n_clusters; ++c) {
        auto& vars = g.cluster_vars[static_cast<size_t>(c)];
        vars.resize(static_cast<size_t>(L));
        for (int b = 0; b < L; ++b) vars[static_cast<size_t>(b)] = c + b;
    }

    // Observation row r attaches to cluster r; the trailing rows, whose bands
    // shrink against the block edge, fold into the last cluster.
    const double inv_s2 = 1.0 / m.sigma2;
    for (int r = 0; r < nv; ++r) {
        const int c = std::min(r, n_clusters - 1);
        const int base_bit = r - c;
        auto& lf = g.log_factor[static_cast<size_t>(c)];
        const int n_taps = std::min(L, nv - r);
        std::vector<cplx> tap(static_cast<size_t>(n_taps));
        for (int l = 0; l < n_taps; ++l) {
            tap[static_cast<size_t>(l)] = m.u.get(r, r + l) * m.h_at(r + l);
        }
        const cplx y = m.y_bar[static_cast<size_t>(r)];
        for (int s = 0; s < (1 << L); ++s) {
            cplx mean{0.0, 0.0};
            for (int l = 0; l < n_taps; ++l) {
                const int bit = (s >> (base_bit + l)) & 1;
                mean += bit ? -tap[static_cast<size_t>(l)] : tap[static_cast<size_t>(l)];
            }
            lf[static_cast<size_t>(s)] -= std::norm(y - mean) * inv_s2;
        }
    }

    g.pair_cluster.resize(static_cast<size_t>(nv / 2));
    g.pair_bit_a.resize(static_cast<size_t>(nv / 2));
    g.pair_bit_b.resize(static_cast<size_t>(nv / 2));
    for (int n = 0; n < nv / 2; ++n) {
        const int c = std::min(2 * n, n_clusters - 1);
        g.pair_cluster[static_cast<size_t>(n)] = c;
        g.pair_bit_a[static_cast<size_t>(n)] = 2 * n - c;
        g.pair_bit_b[static_cast<size_t>(n)] = 2 * n + 1 - c;
    }
    return finish_graph(std::move(g), pin_prefix_pairs, pin_suffix_pairs);
}

FactorGraph build_graph(const BaudModel& m, int pin_prefix_pairs, int pin_suffix_pairs) {
    const int n = m.num_pairs();
    FactorGraph g;
    g.num_vars = 2 * n;
    g.cluster_vars.resize(static_cast<size_t>(n));
    g.log_factor.resize(static_cast<size_t>(n));
    g.pair_cluster.resize(static_cast<size_t>(n));
    g.pair_bit_a.resize(static_cast<size_t>(n));
    g.pair_bit_b.resize(static_cast<size_t>(n));

    const double inv_s2 = 1.0 / m.sigma2;
    const int deg = static_cast<int>(m.b_offsets.size());
    for (int c = 0; c < n; ++c) {
        auto& vars = g.cluster_vars[static_cast<size_t>(c)];
        vars.push_back(2 * c);  // sA[c]
        std::vector<cplx> taps{m.h_a};
        cplx offset{0.0, 0.0};
        int bit_b = -1;
        for (int t = 0; t < deg; ++t) {
            const int v = c + m.b_offsets[static_cast<size_t>(t)];
            const cplx coeff = m.h_b * m.b_coeffs[static_cast<size_t>(t)];
            if (v < 0 || v >= n) {
                offset += coeff;  // outside the modeled block: +1 guard
                continue;
            }
            if (m.b_offsets[static_cast<size_t>(t)] == 0) {
                bit_b = static_cast<int>(vars.size());
            }
            vars.push_back(2 * v + 1);  // sB[v]
            taps.push_back(coeff);
        }
        const int width = static_cast<int>(vars.size());
        auto& lf = g.log_factor[static_cast<size_t>(c)];
        lf.assign(1u << width, 0.0);
        const cplx y = m.y[static_cast<size_t>(c)];
        for (int s = 0; s < (1 << width); ++s) {
            cplx mean = offset;
            for (int b = 0; b < width; ++b) {
                const cplx tp = taps[static_cast<size_t>(b)];
                mean += ((s >> b) & 1) ? -tp : tp;
            }
            lf[static_cast<size_t>(s)] = -std::norm(y - mean) * inv_s2;
        }
        g.pair_cluster[static_cast<size_t>(c)] = c;
        g.pair_bit_a[static_cast<size_t>(c)] = 0;
        require(bit_b >= 0, "cluster misses its own B symbol");
        g.pair_bit_b[static_cast<size_t>(c)] = bit_b;
    }
    return finish_graph(std::move(g), pin_prefix_pairs, pin_suffix_pairs);
}

namespace {

/// For a cluster boundary, key arrays mapping each side's states to the
/// shared-variable configuration; states agreeing on the key are the ones the
/// equality check C_i connects.
struct Boundary {
    std::vector<int> left_key;
    std::vector<int> right_key;
    int key_bits = 0;
};

Boundary make_boundary(const std::vector<int>& left, const std::vector<int>& right) {
    Boundary b;
    std::vector<int> shared;
    for (int v : left) {
        if (std::find(right.begin(), right.end(), v) != right.end()) shared.push_back(v);
    }
    b.key_bits = static_cast<int>(shared.size());
    auto keys_for = [&](const std::vector<int>& vars) {
        const int width = static_cast<int>(vars.size());
        std::vector<int> pos(shared.size());
        for (size_t i = 0; i < shared.size(); ++i) {
            pos[i] = static_cast<int>(
                std::find(vars.begin(), vars.end(), shared[i]) - vars.begin());
        }
        std::vector<int> keys(1u << width);
        for (int s = 0; s < (1 << width); ++s) {
            int k = 0;
            for (size_t i = 0; i < shared.size(); ++i) {
                k |= ((s >> pos[i]) & 1) << i;
            }
            keys[static_cast<size_t>(s)] = k;
        }
        return keys;
    };
    b.left_key = keys_for(left);
    b.right_key = keys_for(right);
    return b;
}

dvec pass_message(const dvec& alpha, const std::vector<int>& from_key,
                  const std::vector<int>& to_key, int key_bits, size_t to_states) {
    dvec mx(1u << key_bits, kNegInf);
    for (size_t s = 0; s < alpha.size(); ++s) {
        mx[static_cast<size_t>(from_key[s])] =
            std::max(mx[static_cast<size_t>(from_key[s])], alpha[s]);
    }
    dvec acc(1u << key_bits, 0.0);
    for (size_t s = 0; s < alpha.size(); ++s) {
        const int k = from_key[s];
        if (mx[static_cast<size_t>(k)] != kNegInf) {
            acc[static_cast<size_t>(k)] += std::exp(alpha[s] - mx[static_cast<size_t>(k)]);
        }
    }
    dvec bucket(1u << key_bits, kNegInf);
    for (size_t k = 0; k < bucket.size(); ++k) {
        if (mx[k] != kNegInf && acc[k] > 0.0) bucket[k] = mx[k] + std::log(acc[k]);
    }
    dvec out(to_states);
    for (size_t s = 0; s < to_states; ++s) out[s] = bucket[static_cast<size_t>(to_key[s])];
    normalize_log(out);
    return out;
}

}  // namespace

std::vector<PairApp> spa_decode(const FactorGraph& g) {
    const size_t nc = g.cluster_vars.size();
    require(nc >= 1, "empty graph");

    std::vector<Boundary> bounds(nc > 0 ? nc - 1 : 0);
    for (size_t c = 0; c + 1 < nc; ++c) {
        bounds[c] = make_boundary(g.cluster_vars[c], g.cluster_vars[c + 1]);
    }

    std::vector<dvec> fwd(nc), bwd(nc);
    fwd[0].assign(g.log_factor[0].size(), 0.0);
    for (size_t c = 0; c + 1 < nc; ++c) {
        dvec alpha = g.log_factor[c];
        for (size_t s = 0; s < alpha.size(); ++s) alpha[s] += fwd[c][s];
        fwd[c + 1] = pass_message(alpha, bounds[c].left_key, bounds[c].right_key,
                                  bounds[c].key_bits, g.log_factor[c + 1].size());
    }
    bwd[nc - 1].assign(g.log_factor[nc - 1].size(), 0.0);
    for (size_t c = nc - 1; c > 0; --c) {
        dvec beta = g.log_factor[c];
        for (size_t s = 0; s < beta.size(); ++s) beta[s] += bwd[c][s];
        bwd[c - 1] = pass_message(beta, bounds[c - 1].right_key, bounds[c - 1].left_key,
                                  bounds[c - 1].key_bits, g.log_factor[c - 1].size());
    }

    std::vector<PairApp> out(static_cast<size_t>(g.num_pairs()));
    std::vector<dvec> post(nc);
    for (size_t n = 0; n < out.size(); ++n) {
        const size_t c = static_cast<size_t>(g.pair_cluster[n]);
        if (post[c].empty()) {
            post[c] = g.log_factor[c];
            for (size_t s = 0; s < post[c].size(); ++s) post[c][s] += fwd[c][s] + bwd[c][s];
            normalize_log(post[c]);
        }
        PairApp p{0.0, 0.0, 0.0, 0.0};
        const int ba = g.pair_bit_a[n];
        const int bb = g.pair_bit_b[n];
        for (size_t s = 0; s < post[c].size(); ++s) {
            const int idx = (((static_cast<int>(s) >> ba) & 1) << 1) |
                            ((static_cast<int>(s) >> bb) & 1);
            p[static_cast<size_t>(idx)] += std::exp(post[c][s]);
        }
        double z = p[0] + p[1] + p[2] + p[3];
        for (double& v : p) v /= z;
        out[n] = p;
    }
    return out;
}

SoftXorOutput soft_xor(const std::vector<PairApp>& pair_apps) {
    SoftXorOutput o;
    o.u.resize(pair_apps.size());
    o.hard.resize(pair_apps.size());
    for (size_t n = 0; n < pair_apps.size(); ++n) {
        const PairApp& p = pair_apps[n];
        const double num = p[0] + p[3];  // equal signs: xor = 0
        const double den = p[1] + p[2];
        double u = den > 0.0 ? num / den : 1e12;
        u = std::clamp(u, 1e-12, 1e12);
        o.u[n] = u;
        o.hard[n] = u >= 1.0 ? 0 : 1;
    }
    return o;
}

SoftXorOutput decode_baud(const SampleSet& y_b, double tau_hat, cplx h_a, cplx h_b,
                          int L, const PulseConfig& cfg, int pin_prefix_pairs,
                          int pin_suffix_pairs) {
    const BaudModel bm = build_baud_model(y_b, tau_hat, h_a, h_b, L, cfg);
    const FactorGraph g = build_graph(bm, pin_prefix_pairs, pin_suffix_pairs);
    return soft_xor(spa_decode(g));
}

}  // namespace apnc
