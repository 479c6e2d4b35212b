// Command-line front-end for the APNC simulator: estimator and decoder
// Monte Carlo experiments with CSV/JSON output.

#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apnc/harness.hpp"

namespace {

struct CliArgs {
    std::string scenario, solution, channel, decoder, config_path;
    std::string out = "results";
    apnc::ExperimentConfig cfg;
};

void load_config_file(const std::string& path, apnc::ExperimentConfig& cfg,
                      std::string& scenario, std::string& solution, std::string& channel,
                      std::string& decoder) {
    std::ifstream is(path);
    if (!is.good()) apnc::fail("cannot read config file: " + path);
    nlohmann::json j;
    is >> j;
    auto get = [&](const char* key, auto& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("scenario", scenario);
    get("solution", solution);
    get("channel", channel);
    get("decoder", decoder);
    get("beta", cfg.beta);
    get("Q", cfg.Q);
    get("root", cfg.root);
    get("G", cfg.G);
    get("d", cfg.d);
    get("L", cfg.L);
    get("N", cfg.N);
    get("guards", cfg.guards);
    get("ebn0", cfg.ebn0_db);
    get("trials", cfg.trials);
    get("target_errors", cfg.target_errors);
    get("seed", cfg.seed);
    get("threads", cfg.threads);
    get("W", cfg.W);
    if (j.contains("pulse")) {
        const auto& p = j.at("pulse");
        if (p.contains("T")) cfg.pulse.T = p.at("T").get<double>();
        if (p.contains("span")) cfg.pulse.span = p.at("span").get<int>();
        if (p.contains("M")) cfg.pulse.M = p.at("M").get<int>();
    }
}

void add_common_flags(CLI::App* sub, CliArgs& a) {
    sub->add_option("--config", a.config_path, "JSON config file; flags override it");
    sub->add_option("--scenario", a.scenario, "experiment scenario");
    sub->add_option("--solution", a.solution, "I, II, III, IV or exact_tau");
    sub->add_option("--channel", a.channel, "awgn or rayleigh");
    sub->add_option("--decoder", a.decoder, "baud or double (with --solution exact_tau)");
    sub->add_option("--beta", a.cfg.beta, "RRC roll-off factor");
    sub->add_option("--Q", a.cfg.Q, "ZC sequence length (odd)");
    sub->add_option("--root", a.cfg.root, "ZC root index");
    sub->add_option("--G", a.cfg.G, "cyclic prefix/suffix length");
    sub->add_option("--d", a.cfg.d, "correlation window half-size");
    sub->add_option("--L", a.cfg.L, "decoder truncation depth");
    sub->add_option("--N", a.cfg.N, "data symbols per packet");
    sub->add_option("--guards", a.cfg.guards, "guard symbols around the data");
    sub->add_option("--ebn0", a.cfg.ebn0_db, "Eb/N0 points in dB")->expected(-1);
    sub->add_option("--trials", a.cfg.trials, "Monte Carlo trials per point");
    sub->add_option("--target-errors", a.cfg.target_errors,
                    "stop a SER/PER point after this many errors");
    sub->add_option("--seed", a.cfg.seed, "RNG seed");
    sub->add_option("--threads", a.cfg.threads, "worker threads (0 = all cores)");
    sub->add_option("--W", a.cfg.W, "sinc reconstruction half-width (symbols)");
    sub->add_option("--out", a.out, "output path base (.csv/.json appended)");
}

int run(CliArgs& a, CLI::App* sub) {
    // JSON config first, then explicit flags on top.
    if (!a.config_path.empty()) {
        CliArgs file_args = a;
        load_config_file(a.config_path, file_args.cfg, file_args.scenario,
                         file_args.solution, file_args.channel, file_args.decoder);
        auto keep = [&](const char* flag, auto member, auto& dst) {
            if (sub->count(flag) > 0) dst = member;
        };
        apnc::ExperimentConfig cli_cfg = a.cfg;
        std::string cli_scenario = a.scenario, cli_solution = a.solution,
                    cli_channel = a.channel, cli_decoder = a.decoder;
        a = file_args;
        keep("--scenario", cli_scenario, a.scenario);
        keep("--solution", cli_solution, a.solution);
        keep("--channel", cli_channel, a.channel);
        keep("--decoder", cli_decoder, a.decoder);
        keep("--beta", cli_cfg.beta, a.cfg.beta);
        keep("--Q", cli_cfg.Q, a.cfg.Q);
        keep("--root", cli_cfg.root, a.cfg.root);
        keep("--G", cli_cfg.G, a.cfg.G);
        keep("--d", cli_cfg.d, a.cfg.d);
        keep("--L", cli_cfg.L, a.cfg.L);
        keep("--N", cli_cfg.N, a.cfg.N);
        keep("--guards", cli_cfg.guards, a.cfg.guards);
        keep("--ebn0", cli_cfg.ebn0_db, a.cfg.ebn0_db);
        keep("--trials", cli_cfg.trials, a.cfg.trials);
        keep("--target-errors", cli_cfg.target_errors, a.cfg.target_errors);
        keep("--seed", cli_cfg.seed, a.cfg.seed);
        keep("--threads", cli_cfg.threads, a.cfg.threads);
        keep("--W", cli_cfg.W, a.cfg.W);
    }

    if (!a.scenario.empty()) a.cfg.scenario = apnc::scenario_from_string(a.scenario);
    if (!a.solution.empty()) a.cfg.solution = apnc::solution_from_string(a.solution);
    if (!a.channel.empty()) a.cfg.channel = apnc::channel_from_string(a.channel);
    if (!a.decoder.empty()) {
        if (a.decoder == "baud") {
            a.cfg.exact_decoder = apnc::DecoderKind::baud;
        } else if (a.decoder == "double") {
            a.cfg.exact_decoder = apnc::DecoderKind::double_rate;
        } else {
            apnc::fail("unknown decoder: " + a.decoder);
        }
    }

    const auto records = apnc::run_experiment(a.cfg);
    apnc::emit_results(records, a.cfg, a.out);

    std::cout << "scenario=" << apnc::to_string(a.cfg.scenario)
              << " solution=" << apnc::to_string(a.cfg.solution) << "\n";
    for (const auto& r : records) {
        std::cout << "  ebn0=" << r.ebn0_db << " dB  trials=" << r.trials_run;
        if (a.cfg.scenario == apnc::Scenario::estimator_mse ||
            a.cfg.scenario == apnc::Scenario::estimator_pdf) {
            std::cout << "  mse_tau=" << r.mse_tau << " ("
                      << 10.0 * std::log10(r.mse_tau > 0 ? r.mse_tau : 1e-300) << " dB)"
                      << "  P(eps<=1e-3)=" << r.p_good;
        }
        if (r.ser > 0.0 || a.cfg.is_decoder_scenario()) std::cout << "  ser=" << r.ser;
        if (a.cfg.is_coded()) std::cout << "  per=" << r.per;
        std::cout << "\n";
    }
    std::cout << "wrote " << a.out << ".csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous PNC baseband simulator"};
    app.require_subcommand(1);

    CliArgs est_args, dec_args, sweep_args;
    est_args.cfg.scenario = apnc::Scenario::estimator_mse;
    est_args.cfg.N = 16;
    dec_args.cfg.scenario = apnc::Scenario::decoder_ser_awgn;
    dec_args.cfg.solution = apnc::Solution::exact_tau;

    CLI::App* est = app.add_subcommand("estimate", "symbol-misalignment estimator runs");
    add_common_flags(est, est_args);
    CLI::App* dec = app.add_subcommand("decode", "PNC decoder runs");
    add_common_flags(dec, dec_args);
    CLI::App* sweep = app.add_subcommand("sweep", "generic Eb/N0 sweep of any scenario");
    add_common_flags(sweep, sweep_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (est->parsed()) return run(est_args, est);
        if (dec->parsed()) return run(dec_args, dec);
        return run(sweep_args, sweep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
