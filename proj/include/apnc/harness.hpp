#pragma once

#include <cstdint>
#include <string>

#include "apnc/estimator.hpp"

namespace apnc {

enum class Scenario {
    estimator_mse,
    estimator_pdf,
    decoder_ser_awgn,
    decoder_per_rayleigh,
    truncation_sweep,
};

/// Table of estimation-and-decoding solutions:
///   I: baud estimation + baud decoding, II: double estimation + baud decoding,
///   III: baud estimation + double decoding, IV: double + double,
///   exact_tau: genie offsets, decoder chosen by ExperimentConfig::exact_decoder.
enum class Solution { I, II, III, IV, exact_tau };
enum class ChannelModel { awgn, rayleigh };
enum class DecoderKind { baud, double_rate };

std::string to_string(Scenario s);
std::string to_string(Solution s);
std::string to_string(ChannelModel c);
Scenario scenario_from_string(const std::string& s);
Solution solution_from_string(const std::string& s);
ChannelModel channel_from_string(const std::string& s);

struct ExperimentConfig {
    Scenario scenario = Scenario::estimator_mse;
    Solution solution = Solution::IV;
    DecoderKind exact_decoder = DecoderKind::double_rate;
    ChannelModel channel = ChannelModel::awgn;

    double beta = 1.0;
    int Q = 31;
    int root = 1;
    int G = 10;
    int d = 4;
    int L = 4;
    int N = 128;     // data symbols per packet (1024 for coded runs)
    int guards = 8;  // +1 guard symbols transmitted and modeled on each side of the data

    std::vector<double> ebn0_db{10.0};
    long long trials = 10000;
    long long target_errors = 100;  // SER/PER runs stop early past this count
    uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency

    PulseConfig pulse{};  // beta is overwritten from the field above
    int W = 32;           // sinc reconstruction half-width, symbols

    void validate() const;
    bool is_decoder_scenario() const;
    bool is_coded() const { return scenario == Scenario::decoder_per_rayleigh; }
};

struct HistogramBin {
    double lo = 0.0, hi = 0.0, density = 0.0;
};

struct MetricsRecord {
    double ebn0_db = 0.0;
    double mse_tau = 0.0;
    double ser = 0.0;
    double per = 0.0;
    double p_good = 0.0;  // P((tau_hat - tau)^2 <= 1e-3), estimator_pdf runs
    std::vector<HistogramBin> histogram;
    long long trials_run = 0;
    double wall_time_s = 0.0;
};

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg);

/// Writes <base>.csv and <base>.json (full config); estimator_pdf runs also
/// write <base>_hist.csv. Outputs are byte-identical for identical inputs.
void emit_results(const std::vector<MetricsRecord>& records, const ExperimentConfig& cfg,
                  const std::string& out_base);

}  // namespace apnc
