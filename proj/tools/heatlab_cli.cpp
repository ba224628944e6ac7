#include <cstdio>
#include <exception>
#include <future>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatlab/cli/config.hpp"
#include "heatlab/cli/runner.hpp"

namespace {

int do_run(heatlab::cli::RunConfig cfg, const std::string& out_dir,
           bool strict) {
    using namespace heatlab::cli;
    const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
    RunOutputs outputs;
    strict_runtime() = strict;
    try {
        outputs = execute(cfg);
    } catch (const heatlab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 1;
    }
    write_outputs(outputs, dir);
    if (!outputs.ok) {
        std::cerr << "failed stage: " << outputs.failed_stage << "\n";
        return 1;
    }
    std::cout << dir << "/manifest.json written, all stages ok\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatlab: Dirichlet heat flow and concavity audits on "
                 "constant-curvature model surfaces"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool strict = false;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration (json)")
            ->required();
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_flag("--strict", strict,
                      "invariant breach produces a nonzero exit");
        cmd->add_option("--seed", seed_override, "sampler seed override");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "execute one experiment");
    add_common(run_cmd);
    CLI::App* describe_cmd =
        app.add_subcommand("describe", "resolve constants, no PDE solve");
    add_common(describe_cmd);
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "execute named runs from one file in parallel");
    add_common(sweep_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(sweep_cmd)) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "usage error: cannot open " << config_path << "\n";
                return 2;
            }
            nlohmann::json root;
            in >> root;
            if (!root.contains("runs") || !root.at("runs").is_object()) {
                std::cerr << "usage error: runs: expected an object\n";
                return 2;
            }
            std::vector<std::pair<std::string, heatlab::cli::RunConfig>> runs;
            for (const auto& [name, sub] : root.at("runs").items()) {
                auto cfg = heatlab::cli::parse_config(sub);
                if (seed_override >= 0)
                    cfg.audit.seed = static_cast<std::uint64_t>(seed_override);
                runs.emplace_back(name, cfg);
            }
            const std::string base = out_dir.empty() ? "sweep_out" : out_dir;
            std::vector<std::future<int>> results;
            for (auto& [name, cfg] : runs) {
                const std::string dir = base + "/" + name;
                results.push_back(
                    std::async(std::launch::async, do_run, cfg, dir, strict));
            }
            int status = 0;
            for (std::size_t i = 0; i < results.size(); ++i) {
                const int rc = results[i].get();
                std::cout << runs[i].first << ": "
                          << (rc == 0 ? "ok" : "failed") << "\n";
                status = std::max(status, rc);
            }
            return status;
        }

        auto cfg = heatlab::cli::load_config(config_path);
        if (seed_override >= 0)
            cfg.audit.seed = static_cast<std::uint64_t>(seed_override);
        if (app.got_subcommand(describe_cmd)) {
            std::cout << heatlab::cli::describe(cfg).dump(2) << "\n";
            return 0;
        }
        return do_run(cfg, out_dir, strict);
    } catch (const heatlab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
