#include "apnc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "apnc/decoder.hpp"
#include "apnc/ldpc.hpp"
#include "apnc/rng.hpp"

namespace apnc {

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::estimator_mse: return "estimator_mse";
        case Scenario::estimator_pdf: return "estimator_pdf";
        case Scenario::decoder_ser_awgn: return "decoder_ser_awgn";
        case Scenario::decoder_per_rayleigh: return "decoder_per_rayleigh";
        case Scenario::truncation_sweep: return "truncation_sweep";
    }
    return "?";
}

std::string to_string(Solution s) {
    switch (s) {
        case Solution::I: return "I";
        case Solution::II: return "II";
        case Solution::III: return "III";
        case Solution::IV: return "IV";
        case Solution::exact_tau: return "exact_tau";
    }
    return "?";
}

std::string to_string(ChannelModel c) {
    return c == ChannelModel::awgn ? "awgn" : "rayleigh";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "estimator_mse") return Scenario::estimator_mse;
    if (s == "estimator_pdf") return Scenario::estimator_pdf;
    if (s == "decoder_ser_awgn") return Scenario::decoder_ser_awgn;
    if (s == "decoder_per_rayleigh") return Scenario::decoder_per_rayleigh;
    if (s == "truncation_sweep") return Scenario::truncation_sweep;
    fail("unknown scenario: " + s);
}

Solution solution_from_string(const std::string& s) {
    if (s == "I") return Solution::I;
    if (s == "II") return Solution::II;
    if (s == "III") return Solution::III;
    if (s == "IV") return Solution::IV;
    if (s == "exact_tau") return Solution::exact_tau;
    fail("unknown solution: " + s);
}

ChannelModel channel_from_string(const std::string& s) {
    if (s == "awgn") return ChannelModel::awgn;
    if (s == "rayleigh") return ChannelModel::rayleigh;
    fail("unknown channel: " + s);
}

bool ExperimentConfig::is_decoder_scenario() const {
    return scenario == Scenario::decoder_ser_awgn ||
           scenario == Scenario::decoder_per_rayleigh ||
           scenario == Scenario::truncation_sweep;
}

void ExperimentConfig::validate() const {
    PulseConfig p = pulse;
    p.beta = beta;
    p.validate();
    PreambleSpec spec{Q, root, G};
    spec.validate();
    require(G < Q, "invalid config field G: need G < Q");
    require(d >= 1 && d <= G, "invalid config field d: need 1 <= d <= G");
    require(L >= 2 && L % 2 == 0 && L <= 16, "invalid config field L: need even L in [2,16]");
    require(N >= 1, "invalid config field N: need N >= 1");
    require(guards >= (L + 1) / 2, "invalid config field guards: need guards >= L/2");
    require(!ebn0_db.empty(), "invalid config field ebn0: need at least one point");
    require(trials >= 1, "invalid config field trials: need trials >= 1");
    require(target_errors >= 1, "invalid config field target_errors");
    require(W >= 8, "invalid config field W: need W >= 8");
    if (scenario == Scenario::decoder_ser_awgn) {
        require(channel == ChannelModel::awgn,
                "invalid config field channel: decoder_ser_awgn runs on awgn");
    }
    if (scenario == Scenario::decoder_per_rayleigh) {
        require(channel == ChannelModel::rayleigh,
                "invalid config field channel: decoder_per_rayleigh runs on rayleigh");
        require(N == 1024, "invalid config field N: coded runs use the (1024,512) code");
    }
    if (scenario == Scenario::truncation_sweep) {
        require(solution == Solution::exact_tau,
                "invalid config field solution: truncation_sweep uses exact_tau");
    }
    if (scenario == Scenario::estimator_mse || scenario == Scenario::estimator_pdf) {
        require(solution != Solution::exact_tau,
                "invalid config field solution: estimator scenarios need an estimator");
    }
}

namespace {

struct TrialResult {
    double eps = 0.0;  // (tau_hat - tau)^2
    long long sym_errors = 0;
    long long symbols = 0;
    int pkt_error = 0;
    int packets = 0;
};

/// Everything shared across trials of one experiment.
struct TrialContext {
    const ExperimentConfig* cfg = nullptr;
    PulseConfig pulse;
    PreambleSpec spec;
    cvec z_a, z_b;      // base ZC pair
    cvec z_d_a, z_d_b;  // RRC-interpolated replicas
    std::optional<WhiteningOperator> whitener;
    std::optional<CorrelationTemplate> tmpl_a, tmpl_b;
    const LdpcCode* code = nullptr;

    bool decoding = false;
    bool use_baud_est = false;
    bool use_double_est = false;
    DecoderKind dec_kind = DecoderKind::double_rate;
    int data_len = 0;     // N
    int block_len = 0;    // N + 2 guards (modeled symbol pairs)
    int frame_len = 0;    // preamble + block
    long long peak_baud = 0;
    long long peak_double = 0;
    long long block_first = 0;  // symbol index where the modeled block starts
    double eb = 1.0;
};

TrialContext make_context(const ExperimentConfig& cfg) {
    TrialContext c;
    c.cfg = &cfg;
    c.pulse = cfg.pulse;
    c.pulse.beta = cfg.beta;
    c.spec = PreambleSpec{cfg.Q, cfg.root, cfg.G};
    auto [za, zb] = assign_pair(c.spec);
    c.z_a = std::move(za);
    c.z_b = std::move(zb);

    c.decoding = cfg.is_decoder_scenario();
    if (c.decoding) {
        switch (cfg.solution) {
            case Solution::I: c.use_baud_est = true; c.dec_kind = DecoderKind::baud; break;
            case Solution::II: c.use_double_est = true; c.dec_kind = DecoderKind::baud; break;
            case Solution::III: c.use_baud_est = true; c.dec_kind = DecoderKind::double_rate; break;
            case Solution::IV: c.use_double_est = true; c.dec_kind = DecoderKind::double_rate; break;
            case Solution::exact_tau: c.dec_kind = cfg.exact_decoder; break;
        }
    } else {
        const bool dbl = cfg.solution == Solution::II || cfg.solution == Solution::IV;
        c.use_baud_est = !dbl;
        c.use_double_est = dbl;
    }

    if (c.use_double_est) {
        c.z_d_a = interpolate_zc_double(c.z_a, c.pulse);
        c.z_d_b = interpolate_zc_double(c.z_b, c.pulse);
        c.whitener.emplace(build_whitener(cfg.d, c.pulse));
        c.tmpl_a.emplace(c.spec, Node::A, cfg.d, SampleRate::double_rate, c.pulse);
        c.tmpl_b.emplace(c.spec, Node::B, cfg.d, SampleRate::double_rate, c.pulse);
    } else if (c.use_baud_est) {
        c.tmpl_a.emplace(c.spec, Node::A, cfg.d, SampleRate::baud, c.pulse);
        c.tmpl_b.emplace(c.spec, Node::B, cfg.d, SampleRate::baud, c.pulse);
    }
    if (cfg.is_coded()) c.code = &LdpcCode::standard();

    c.data_len = cfg.is_coded() ? LdpcCode::standard().n() : cfg.N;
    const int g = c.decoding ? cfg.guards : 0;
    c.block_len = c.data_len + 2 * g;
    const int preamble_len = cfg.Q + 2 * cfg.G;
    c.frame_len = preamble_len + c.block_len;
    c.peak_baud = cfg.G;
    c.peak_double = 2LL * cfg.G;
    c.block_first = preamble_len;
    c.eb = cfg.is_coded() ? 2.0 : 1.0;  // rate-1/2 code doubles energy per info bit
    return c;
}

std::vector<uint8_t> random_bits(std::mt19937_64& rng, int count) {
    std::vector<uint8_t> b(static_cast<size_t>(count));
    std::uniform_int_distribution<int> bit(0, 1);
    for (auto& v : b) v = static_cast<uint8_t>(bit(rng));
    return b;
}

cvec bits_to_bpsk(const std::vector<uint8_t>& bits) {
    cvec s(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        s[i] = bits[i] ? cplx{-1.0, 0.0} : cplx{1.0, 0.0};
    }
    return s;
}

TrialResult run_trial(const TrialContext& ctx, double n0, uint64_t trial_seed) {
    const ExperimentConfig& cfg = *ctx.cfg;
    auto rng = make_rng(trial_seed);

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double T = ctx.pulse.T;
    const double tau = (uni(rng) - 0.5) * T;
    ChannelRealization ch;
    ch.t_a = tau / 2.0;
    ch.t_b = -tau / 2.0;
    if (cfg.channel == ChannelModel::rayleigh) {
        ch.h_a = draw_cn(rng, 1.0);
        ch.h_b = draw_cn(rng, 1.0);
    }
    ch.n0 = n0;

    const int g = ctx.decoding ? cfg.guards : 0;
    std::vector<uint8_t> bits_a, bits_b;
    if (cfg.is_coded()) {
        bits_a = ctx.code->encode(random_bits(rng, ctx.code->k()));
        bits_b = ctx.code->encode(random_bits(rng, ctx.code->k()));
    } else {
        bits_a = random_bits(rng, ctx.data_len);
        bits_b = random_bits(rng, ctx.data_len);
    }
    auto with_guards = [&](const std::vector<uint8_t>& bits) {
        cvec data(static_cast<size_t>(ctx.block_len), cplx{1.0, 0.0});
        const cvec s = bits_to_bpsk(bits);
        std::copy(s.begin(), s.end(), data.begin() + g);
        return data;
    };
    const SymbolFrame frame_a = build_frame(ctx.spec, Node::A, with_guards(bits_a));
    const SymbolFrame frame_b = build_frame(ctx.spec, Node::B, with_guards(bits_b));

    ch.seed = rng();
    const int margin = cfg.W + 4;
    const DenseSignal r = uplink_superpose(frame_a, frame_b, ch, ctx.pulse, margin);

    TrialResult out;

    double t_hat_a = ch.t_a, t_hat_b = ch.t_b, tau_hat = tau;
    if (ctx.use_baud_est) {
        const SampleSet yb = front_end_sampled(r, SampleKind::baud_rrc, ctx.pulse, n0,
                                               ctx.peak_baud + 1 - cfg.d,
                                               static_cast<size_t>(cfg.Q + 2 * cfg.d));
        const CorrelationWindow ca = crosscorr_baud(yb, ctx.z_a, cfg.d, ctx.peak_baud);
        const CorrelationWindow cb = crosscorr_baud(yb, ctx.z_b, cfg.d, ctx.peak_baud);
        const OffsetEstimate e =
            estimate_baud(ca, cb, *ctx.tmpl_a, *ctx.tmpl_b, ch.h_a, ch.h_b, ctx.pulse);
        t_hat_a = e.t_hat_a;
        t_hat_b = e.t_hat_b;
        tau_hat = e.tau_hat;
    } else if (ctx.use_double_est) {
        const SampleSet yd = front_end_sampled(r, SampleKind::double_sinc2, ctx.pulse, n0,
                                               ctx.peak_double + 1 - cfg.d,
                                               static_cast<size_t>(2 * cfg.Q + 2 * cfg.d),
                                               cfg.W);
        const CorrelationWindow ca = crosscorr_double(yd, ctx.z_d_a, cfg.d, ctx.peak_double);
        const CorrelationWindow cb = crosscorr_double(yd, ctx.z_d_b, cfg.d, ctx.peak_double);
        const cvec ca_w = whiten_window(ca, *ctx.whitener);
        const cvec cb_w = whiten_window(cb, *ctx.whitener);
        const OffsetEstimate e = estimate_double(ca_w, cb_w, *ctx.tmpl_a, *ctx.tmpl_b,
                                                 *ctx.whitener, ch.h_a, ch.h_b, ctx.pulse);
        t_hat_a = e.t_hat_a;
        t_hat_b = e.t_hat_b;
        tau_hat = e.tau_hat;
    }
    out.eps = (tau_hat - tau) * (tau_hat - tau);
    if (!ctx.decoding) return out;

    // Double-baud matched-filter samples covering the modeled block plus
    // reconstruction support; both decoders resample from them.
    const long long k_first = 2 * ctx.block_first - 2LL * cfg.W - 4;
    const long long k_last = 2 * (ctx.block_first + ctx.block_len - 1) + 1 + 2LL * cfg.W + 4;
    const SampleSet yd = front_end_sampled(r, SampleKind::double_rrc, ctx.pulse, n0, k_first,
                                           static_cast<size_t>(k_last - k_first + 1));
    const double sigma2 = n0 / (2.0 * T);

    SoftXorOutput sx;
    if (ctx.dec_kind == DecoderKind::double_rate) {
        auto [y1, y2] = resample_boundaries(yd, t_hat_a, t_hat_b, ctx.block_len,
                                            ctx.block_first, ctx.pulse, cfg.W);
        const ObservationModel om =
            build_model(y1, y2, tau_hat, ch.h_a, ch.h_b, cfg.L, ctx.pulse, sigma2);
        sx = soft_xor(spa_decode(build_graph(om, g, g)));
    } else {
        SampleSet ya;
        ya.kind = SampleKind::baud_rrc;
        ya.first_index = ctx.block_first;
        ya.sigma2 = sigma2;
        ya.samples.resize(static_cast<size_t>(ctx.block_len));
        for (int n = 0; n < ctx.block_len; ++n) {
            ya.samples[static_cast<size_t>(n)] =
                sinc2_reconstruct(yd.samples, yd.first_index,
                                  (ctx.block_first + n) * T + t_hat_a, T, cfg.W);
        }
        sx = decode_baud(ya, tau_hat, ch.h_a, ch.h_b, cfg.L, ctx.pulse, g, g);
    }

    out.symbols = ctx.data_len;
    for (int n = 0; n < ctx.data_len; ++n) {
        const int truth = (bits_a[static_cast<size_t>(n)] ^ bits_b[static_cast<size_t>(n)]) & 1;
        if (static_cast<int>(sx.hard[static_cast<size_t>(g + n)]) != truth) ++out.sym_errors;
    }

    if (cfg.is_coded()) {
        dvec llr(static_cast<size_t>(ctx.data_len));
        for (int n = 0; n < ctx.data_len; ++n) {
            llr[static_cast<size_t>(n)] = std::log(sx.u[static_cast<size_t>(g + n)]);
        }
        const auto dec = ctx.code->bp_decode(llr);
        out.packets = 1;
        for (int i = 0; i < ctx.code->k(); ++i) {
            const int truth =
                (bits_a[static_cast<size_t>(i)] ^ bits_b[static_cast<size_t>(i)]) & 1;
            if (static_cast<int>(dec.bits[static_cast<size_t>(i)]) != truth) {
                out.pkt_error = 1;
                break;
            }
        }
    }
    return out;
}

void parallel_trials(int threads, long long first, long long count,
                     const std::function<void(long long)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (long long i = 0; i < count; ++i) fn(first + i);
        return;
    }
    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            const long long i = next.fetch_add(1);
            if (i >= count) return;
            fn(first + i);
        }
    };
    std::vector<std::thread> pool;
    const int nt = static_cast<int>(std::min<long long>(threads, count));
    pool.reserve(static_cast<size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const TrialContext ctx = make_context(cfg);
    int threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    const bool early_stop = ctx.decoding;
    const bool want_hist = cfg.scenario == Scenario::estimator_pdf;
    constexpr long long kBlock = 256;  // early-stop granularity, thread-count independent

    std::vector<MetricsRecord> records;
    for (size_t pt = 0; pt < cfg.ebn0_db.size(); ++pt) {
        const auto t_start = std::chrono::steady_clock::now();
        const double ebn0 = cfg.ebn0_db[pt];
        const double n0 = ctx.eb * std::pow(10.0, -ebn0 / 10.0);
        const uint64_t point_seed = splitmix64(cfg.seed + 0x9e3779b9ULL * (pt + 1));

        MetricsRecord rec;
        rec.ebn0_db = ebn0;
        double eps_sum = 0.0;
        long long sym_err = 0, syms = 0, pkt_err = 0, pkts = 0, good = 0;
        dvec eps_all;
        if (want_hist) eps_all.reserve(static_cast<size_t>(cfg.trials));

        long long done = 0;
        std::vector<TrialResult> block(static_cast<size_t>(kBlock));
        while (done < cfg.trials) {
            const long long count = std::min(kBlock, cfg.trials - done);
            parallel_trials(threads, done, count, [&](long long i) {
                block[static_cast<size_t>(i - done)] =
                    run_trial(ctx, n0, stream_seed(point_seed, static_cast<uint64_t>(i)));
            });
            for (long long i = 0; i < count; ++i) {
                const TrialResult& t = block[static_cast<size_t>(i)];
                eps_sum += t.eps;
                if (t.eps <= 1e-3) ++good;
                if (want_hist) eps_all.push_back(t.eps);
                sym_err += t.sym_errors;
                syms += t.symbols;
                pkt_err += t.pkt_error;
                pkts += t.packets;
            }
            done += count;
            if (early_stop) {
                const long long err_count = cfg.is_coded() ? pkt_err : sym_err;
                if (err_count >= cfg.target_errors) break;
            }
        }

        rec.trials_run = done;
        rec.mse_tau = cfg.solution == Solution::exact_tau ? 0.0 : eps_sum / done;
        rec.p_good = static_cast<double>(good) / done;
        if (syms > 0) rec.ser = static_cast<double>(sym_err) / syms;
        if (pkts > 0) rec.per = static_cast<double>(pkt_err) / pkts;

        if (want_hist && !eps_all.empty()) {
            const double mx = *std::max_element(eps_all.begin(), eps_all.end());
            const double hi = mx > 0.0 ? mx : 1.0;
            const int nbins = 50;
            rec.histogram.assign(nbins, {});
            const double width = hi / nbins;
            for (double e : eps_all) {
                int b = static_cast<int>(e / width);
                b = std::clamp(b, 0, nbins - 1);
                rec.histogram[static_cast<size_t>(b)].density += 1.0;
            }
            for (int b = 0; b < nbins; ++b) {
                auto& bin = rec.histogram[static_cast<size_t>(b)];
                bin.lo = b * width;
                bin.hi = (b + 1) * width;
                bin.density /= static_cast<double>(eps_all.size()) * width;
            }
        }
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        records.push_back(std::move(rec));
    }
    return records;
}

void emit_results(const std::vector<MetricsRecord>& records, const ExperimentConfig& cfg,
                  const std::string& out_base) {
    require(!records.empty(), "no records to emit");

    std::ofstream csv(out_base + ".csv");
    require(csv.good(), "cannot write output file");
    csv << "scenario,solution,beta,Q,G,d,L,N,ebn0,mse_tau,ser,per,trials,seed\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    for (const auto& r : records) {
        csv << to_string(cfg.scenario) << "," << to_string(cfg.solution) << ","
            << num(cfg.beta) << "," << cfg.Q << "," << cfg.G << "," << cfg.d << "," << cfg.L
            << "," << cfg.N << "," << num(r.ebn0_db) << "," << num(r.mse_tau) << ","
            << num(r.ser) << "," << num(r.per) << "," << r.trials_run << "," << cfg.seed
            << "\n";
    }
    require(csv.good(), "cannot write output file");
    csv.close();

    nlohmann::json j;
    j["scenario"] = to_string(cfg.scenario);
    j["solution"] = to_string(cfg.solution);
    j["exact_decoder"] = cfg.exact_decoder == DecoderKind::baud ? "baud" : "double";
    j["channel"] = to_string(cfg.channel);
    j["beta"] = cfg.beta;
    j["Q"] = cfg.Q;
    j["root"] = cfg.root;
    j["G"] = cfg.G;
    j["d"] = cfg.d;
    j["L"] = cfg.L;
    j["N"] = cfg.N;
    j["guards"] = cfg.guards;
    j["ebn0"] = cfg.ebn0_db;
    j["trials"] = cfg.trials;
    j["target_errors"] = cfg.target_errors;
    j["seed"] = cfg.seed;
    j["W"] = cfg.W;
    j["pulse"] = {{"T", cfg.pulse.T}, {"span", cfg.pulse.span}, {"M", cfg.pulse.M}};
    std::ofstream js(out_base + ".json");
    require(js.good(), "cannot write output file");
    js << j.dump(2) << "\n";
    js.close();

    if (cfg.scenario == Scenario::estimator_pdf) {
        std::ofstream hist(out_base + "_hist.csv");
        require(hist.good(), "cannot write output file");
        hist << "ebn0,bin_lo,bin_hi,density\n";
        for (const auto& r : records) {
            for (const auto& b : r.histogram) {
                hist << num(r.ebn0_db) << "," << num(b.lo) << "," << num(b.hi) << ","
                     << num(b.density) << "\n";
            }
        }
        require(hist.good(), "cannot write output file");
    }
}

}  // namespace apnc
