#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "srtrl/errors.hpp"
#include "srtrl/harness.hpp"

using namespace srtrl;

namespace {

int fail(const char* kind, const std::string& message, int code) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
}

std::string sweep_dir_name(const ExperimentConfig& c, const std::vector<SweepParam>& params) {
    std::ostringstream os;
    for (const auto& p : params) {
        if (p.key == "n") os << (os.tellp() > 0 ? "_" : "") << "n" << c.model.n;
        if (p.key == "lr") os << (os.tellp() > 0 ? "_" : "") << "lr" << c.optimizer.adam.lr;
    }
    return os.str();
}

void run_and_report(ExperimentConfig cfg, std::optional<unsigned> jobs, bool quiet) {
    RunOptions opts;
    opts.jobs = jobs;
    const auto records = run_experiment(cfg, opts);
    const auto dir = resolve_output_dir(cfg);
    const auto rows = build_report(dir);
    write_report(dir, rows);
    if (!quiet) {
        std::cout << "wrote " << records.size() << " runs to " << dir.string() << '\n';
        std::cout << format_report(rows);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online recurrent learning experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    unsigned jobs = 0;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run every (engine, seed) cell of a config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("-o,--output", output, "Output directory (overrides the config)");
    run->add_option("-j,--jobs", jobs, "Concurrent grid cells");
    run->add_flag("-q,--quiet", quiet, "Do not print the report table");

    std::vector<std::string> sweep_params;
    auto* sweep = app.add_subcommand("sweep", "Run a config over a parameter grid");
    sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
    sweep->add_option("-p,--param", sweep_params, "key=v1,v2,... (k, strategy, lambda, window, lr, n)")
        ->required();
    sweep->add_option("-o,--output", output, "Output directory (overrides the config)");
    sweep->add_option("-j,--jobs", jobs, "Concurrent grid cells");
    sweep->add_flag("-q,--quiet", quiet, "Do not print the report table");

    std::string report_dir;
    bool report_json = false;
    auto* report = app.add_subcommand("report", "Aggregate run summaries into a recovery table");
    report->add_option("dir", report_dir, "Directory of run outputs")->required();
    report->add_flag("--json", report_json, "Print report.json instead of the table");

    auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    validate->add_option("config", config_path, "Experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 64);
    }

    const std::optional<unsigned> job_opt = jobs > 0 ? std::optional<unsigned>(jobs) : std::nullopt;
    try {
        if (*validate) {
            std::cout << load_config(config_path).to_json().dump(2) << '\n';
        } else if (*run) {
            auto cfg = load_config(config_path);
            if (!output.empty()) cfg.output_dir = output;
            run_and_report(cfg, job_opt, quiet);
        } else if (*sweep) {
            auto cfg = load_config(config_path);
            if (!output.empty()) cfg.output_dir = output;
            std::vector<SweepParam> params;
            for (const auto& p : sweep_params) params.push_back(parse_sweep_param(p));
            const auto configs = expand_sweep(cfg, params);
            const auto root = resolve_output_dir(cfg);
            for (auto c : configs) {
                c.output_dir = configs.size() == 1 ? root : root / sweep_dir_name(c, params);
                run_and_report(c, job_opt, quiet);
            }
        } else if (*report) {
            const auto rows = build_report(report_dir);
            write_report(report_dir, rows);
            if (report_json) {
                std::ifstream in(std::filesystem::path(report_dir) / "report.json");
                std::cout << in.rdbuf();
            } else {
                std::cout << format_report(rows);
            }
        }
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const IngestionError& e) {
        return fail("ingestion", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 1);
    }
    return 0;
}
