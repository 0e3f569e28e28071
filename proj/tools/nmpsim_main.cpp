// nmpsim: experiment driver for the pooled-NMP embedding simulator.
//
// Subcommands:
//   run       evaluate the configured (design x batch x benchmark) grid -> CSV
//   sweep     like run, with the batch list overridden on the command line
//   validate  randomized functional-equivalence suite against the oracle
//   trace     emit per-rank DRAM request traces
//
// Exit codes: 0 success, 2 configuration error, 3 simulation fault or
// validation mismatch.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nmpsim/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw nmpsim::ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nmpsim::ExperimentConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return nmpsim::default_experiment();
    return nmpsim::load_experiment(slurp(config_path));
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw nmpsim::ConfigError("cannot write output file '" + path + "'");
    }
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nmpsim: near-memory embedding-layer simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path;
    std::string trace_dir;
    std::vector<std::uint32_t> batches;
    std::vector<std::string> designs;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::uint64_t cases = 1000;
    bool inject_fault = false;
    bool dump_config = false;

    auto* run = app.add_subcommand("run", "evaluate design points, emit CSV");
    run->add_option("-c,--config", config_path, "experiment config (JSON)");
    run->add_option("-o,--output", output_path, "CSV output path (default stdout)");
    run->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--design", designs, "restrict to these design points");
    run->add_flag("--dump-config", dump_config,
                  "print the effective config JSON and exit");

    auto* sweep = app.add_subcommand("sweep", "run with a batch-size sweep");
    sweep->add_option("-c,--config", config_path, "experiment config (JSON)");
    sweep->add_option("-o,--output", output_path, "CSV output path");
    sweep->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    sweep->add_option("-b,--batches", batches, "batch sizes to sweep")
        ->required();

    auto* validate =
        app.add_subcommand("validate", "randomized oracle equivalence suite");
    validate->add_option("--seed", seed, "RNG seed");
    validate->add_option("--cases", cases, "number of random cases");
    validate->add_flag("--inject-fault", inject_fault,
                       "corrupt one result to exercise failure reporting");

    auto* trace = app.add_subcommand("trace", "emit per-rank DRAM traces");
    trace->add_option("-c,--config", config_path, "experiment config (JSON)");
    trace->add_option("-d,--dir", trace_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed() || sweep->parsed()) {
            nmpsim::ExperimentConfig cfg = load_or_default(config_path);
            if (seed_set) cfg.seed = seed;
            if (sweep->parsed()) cfg.batches = batches;
            if (!designs.empty()) {
                cfg.designs.clear();
                for (const auto& d : designs) {
                    cfg.designs.push_back(nmpsim::parse_design(d));
                }
            }
            if (!output_path.empty()) cfg.output_csv = output_path;
            if (dump_config) {
                std::fputs(nmpsim::dump_experiment(cfg).c_str(), stdout);
                return 0;
            }
            write_or_print(cfg.output_csv, nmpsim::run_experiment(cfg));
            return 0;
        }
        if (validate->parsed()) {
            const nmpsim::ValidationReport rep =
                nmpsim::run_validation(seed, cases, inject_fault);
            std::printf("validation: %llu/%llu cases passed\n",
                        static_cast<unsigned long long>(rep.cases -
                                                        rep.failures),
                        static_cast<unsigned long long>(rep.cases));
            if (rep.failures > 0) {
                std::fputs(rep.log.c_str(), stderr);
                return 3;
            }
            return 0;
        }
        if (trace->parsed()) {
            nmpsim::ExperimentConfig cfg = load_or_default(config_path);
            if (!trace_dir.empty()) cfg.trace_dir = trace_dir;
            const auto traces = nmpsim::build_traces(cfg);
            for (const auto& [name, text] : traces) {
                const std::string path = cfg.trace_dir + "/" + name + ".trace";
                std::ofstream out(path, std::ios::binary);
                if (!out) {
                    throw nmpsim::ConfigError("cannot write '" + path + "'");
                }
                out << text;
            }
            std::printf("wrote %zu trace files to %s\n", traces.size(),
                        cfg.trace_dir.c_str());
            return 0;
        }
    } catch (const nmpsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const nmpsim::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const nmpsim::SimError& e) {
        std::fprintf(stderr, "simulation fault: %s\n", e.what());
        return 3;
    }
    return 0;
}
