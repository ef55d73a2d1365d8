// Command-line front end: metric reports, online simulations, T-sweeps with
// rate checks, and fixture generation.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdl/adversary.hpp"
#include "cdl/harness.hpp"
#include "cdl/metrics.hpp"
#include "cdl/predictor.hpp"
#include "cdl/transcript.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

std::vector<long> parse_long_list(const std::string& csv) {
    std::vector<long> out;
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t comma = csv.find(',', start);
        out.push_back(std::stol(csv.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        out.push_back(csv.substr(start, comma == std::string::npos ? std::string::npos
                                                                   : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibration decision loss toolkit"};
    app.require_subcommand(1);

    // ---- metrics ----
    auto* metrics_cmd = app.add_subcommand("metrics", "compute calibration metrics for a transcript");
    std::string metrics_input, metrics_list = "ece,l2,smcal,vcdl,cdl,ucal", metrics_out;
    int metrics_grid = 0;
    bool metrics_witness = false;
    metrics_cmd->add_option("input", metrics_input, "transcript CSV")->required();
    metrics_cmd->add_option("--grid", metrics_grid, "grid size m")->required();
    metrics_cmd->add_option("--metrics", metrics_list, "comma list of metrics");
    metrics_cmd->add_flag("--witness", metrics_witness, "emit LP-optimal rule and kink");
    metrics_cmd->add_option("--out", metrics_out, "output JSON path (default stdout)");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "run the online prediction game");
    long sim_T = 0;
    int sim_m = 0;
    double sim_eps = 0.0;
    std::string sim_adversary = "iid:0.5", sim_out, sim_trace, sim_predictor = "alg1";
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("--T", sim_T, "number of rounds")->required();
    sim_cmd->add_option("--m", sim_m, "grid size (default ceil(sqrt(T)/ln T))");
    sim_cmd->add_option("--eps", sim_eps, "step-3 slack (default 1/T)");
    sim_cmd->add_option("--adversary", sim_adversary, "iid:<rho> | script:<path> | alt | greedy");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");
    sim_cmd->add_option("--predictor", sim_predictor, "alg1 | truthful");
    sim_cmd->add_option("--out", sim_out, "transcript CSV path")->required();
    sim_cmd->add_option("--trace", sim_trace, "per-round trace CSV path");

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep T and adversaries, fit the rate");
    std::string sweep_T = "256,512,1024,2048,4096,8192,16384";
    std::string sweep_advs = "greedy,iid:0.5,alt";
    std::string sweep_dir = "sweep_out";
    int sweep_seeds = 20, sweep_m = 0;
    double sweep_eps = 0.0;
    bool sweep_check = false;
    sweep_cmd->add_option("--T-list", sweep_T, "comma list of horizons");
    sweep_cmd->add_option("--adversaries", sweep_advs, "comma list of adversary specs");
    sweep_cmd->add_option("--seeds", sweep_seeds, "number of seeds (0..n-1)");
    sweep_cmd->add_option("--m", sweep_m, "override grid size");
    sweep_cmd->add_option("--eps", sweep_eps, "override step-3 slack");
    sweep_cmd->add_option("--out-dir", sweep_dir, "output directory");
    sweep_cmd->add_flag("--check", sweep_check, "nonzero exit when the rate check fails");

    // ---- fixture ----
    auto* fix_cmd = app.add_subcommand("fixture", "generate a worked-example transcript");
    std::string fix_name, fix_out;
    long fix_T = 0;
    double fix_eps = 0.1;
    fix_cmd->add_option("--name", fix_name,
                        "intro_miscal | intro_cal | ex41a | ex41b | ex42b | ex43")->required();
    fix_cmd->add_option("--T", fix_T, "number of rounds")->required();
    fix_cmd->add_option("--eps", fix_eps, "epsilon parameter (ex41a, ex42b)");
    fix_cmd->add_option("--out", fix_out, "transcript CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*metrics_cmd) {
            cdl::Transcript t = cdl::read_transcript_file(metrics_input);
            cdl::MetricReport rep = cdl::compute_report(
                t, cdl::Grid(metrics_grid), cdl::MetricSelection::parse(metrics_list),
                metrics_witness);
            std::string text = cdl::to_json(rep).dump(2) + "\n";
            if (metrics_out.empty()) std::cout << text;
            else write_text(metrics_out, text);
        } else if (*sim_cmd) {
            cdl::PredictorConfig config = cdl::PredictorConfig::defaults(sim_T, sim_seed);
            if (sim_m > 0) config.m = sim_m;
            if (sim_eps > 0.0) config.eps = sim_eps;
            cdl::AdversarySpec spec =
                cdl::AdversarySpec::parse(sim_adversary, static_cast<std::size_t>(sim_T));
            spec.seed = cdl::splitmix64(sim_seed ^ 0x5245564441ull);
            cdl::Adversary adversary(spec);
            if (sim_predictor == "alg1") {
                cdl::RunResult run = cdl::run_algorithm1(config, adversary, !sim_trace.empty());
                cdl::write_transcript_file(run.transcript, sim_out);
                if (!sim_trace.empty()) {
                    std::ofstream trace(sim_trace);
                    cdl::write_trace(run.trace, trace);
                }
                std::cerr << "T=" << sim_T << " m=" << config.m << " max_h=" << run.max_h
                          << " (eps=" << config.eps << ")\n";
            } else if (sim_predictor == "truthful") {
                cdl::TruthfulResult run = cdl::run_truthful_baseline(config, adversary);
                cdl::write_transcript_file(run.transcript, sim_out);
                std::cerr << "T=" << sim_T << " m=" << config.m
                          << " deviation=" << run.deviation << " (alpha=" << run.alpha
                          << ", beta=" << run.beta << ")\n";
            } else {
                throw std::invalid_argument("unknown predictor: " + sim_predictor);
            }
        } else if (*sweep_cmd) {
            std::vector<std::uint64_t> seeds;
            for (int s = 0; s < sweep_seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
            cdl::SweepOverrides overrides;
            if (sweep_m > 0) overrides.m = sweep_m;
            if (sweep_eps > 0.0) overrides.eps = sweep_eps;
            cdl::SweepResult res = cdl::sweep(parse_long_list(sweep_T),
                                              parse_string_list(sweep_advs), seeds, overrides);
            std::filesystem::create_directories(sweep_dir);
            {
                std::ofstream csv(sweep_dir + "/records.csv");
                cdl::write_sweep_csv(res, csv);
            }
            cdl::RateReport rate = cdl::rate_report(res);
            nlohmann::json summary = cdl::sweep_summary_json(res);
            summary["rate"] = cdl::to_json(rate);
            write_text(sweep_dir + "/summary.json", summary.dump(2) + "\n");
            std::cout << cdl::to_json(rate).dump(2) << "\n";
            for (const auto& f : res.failures) std::cerr << "cell failed: " << f << "\n";
            if (sweep_check && !rate.pass()) return 1;
        } else if (*fix_cmd) {
            cdl::Transcript t = cdl::fixture(fix_name, cdl::FixtureParams{fix_T, fix_eps});
            cdl::write_transcript_file(t, fix_out);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
