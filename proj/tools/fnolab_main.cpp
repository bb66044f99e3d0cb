#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "fnolab/scenario.hpp"

namespace {

std::string resolve_config(const std::string& arg, const std::string& scenario_dir) {
    namespace fs = std::filesystem;
    if (fs::exists(arg)) return arg;
    const fs::path named = fs::path(scenario_dir) / (arg + ".json");
    if (fs::exists(named)) return named.string();
    throw std::runtime_error("no such config file or scenario name: " + arg);
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fnolab: random FNO ensembles vs closed-form kernel recursions"};
    app.require_subcommand(1);

    std::string scenario_dir = "scenarios";
    std::string out_dir = "out";
    std::string format = "all";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicas = 0;
    int workers = 0;
    bool fast = false;

    app.add_option("--scenarios-dir", scenario_dir, "directory with scenario configs");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out-dir", out_dir, "artifact output directory");
        sub->add_option("--format", format, "csv|json|svg|all")
            ->check(CLI::IsMember({"csv", "json", "svg", "all"}));
        sub->add_option("--seed", seed, "override root seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--replicas", replicas, "override replica count");
        sub->add_option("--workers", workers, "worker pool size (0 = hardware)");
        sub->add_flag("--fast", fast, "25 replicas, 1.5x band (CI mode)");
    };

    std::string config_arg;
    auto* run = app.add_subcommand("run", "run one scenario and emit its report");
    run->add_option("config", config_arg, "config file or scenario name")->required();
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "run a sweep scenario");
    sweep->add_option("config", config_arg, "config file or scenario name")->required();
    add_common(sweep);
    auto* tune = app.add_subcommand("tune", "solve a criticality condition, then verify by MC");
    tune->add_option("config", config_arg, "config file or scenario name")->required();
    add_common(tune);
    auto* list = app.add_subcommand("list-scenarios", "list checked-in scenario configs");

    CLI11_PARSE(app, argc, argv);

    try {
        fnolab::RunOptions opt;
        opt.out_dir = out_dir;
        opt.format = format;
        opt.workers = workers;
        opt.fast = fast;
        if (seed_set) opt.seed_override = seed;
        if (replicas > 0) opt.replicas_override = replicas;

        if (list->parsed()) {
            for (const auto& name : fnolab::list_scenarios(scenario_dir))
                std::cout << name << "\n";
            return 0;
        }

        const auto cfg = fnolab::load_config(resolve_config(config_arg, scenario_dir));
        Timer timer;
        bool pass = false;

        if (run->parsed()) {
            const auto rep = fnolab::run_scenario(cfg, opt);
            pass = rep.aggregate_pass;
            for (const auto& c : rep.curves)
                std::cout << cfg.name << " " << c.label << ": in-band "
                          << 100.0 * c.in_band_fraction << "% "
                          << (c.passed ? "[pass]" : "[fail]") << "\n";
        } else if (sweep->parsed()) {
            std::vector<fnolab::ComparisonReport> reports;
            const auto sum = fnolab::run_sweep(cfg, opt, &reports);
            pass = sum.aggregate_pass;
            for (std::size_t i = 0; i < sum.values.size(); ++i)
                std::cout << cfg.name << " " << sum.axis << "=" << sum.values[i] << ": "
                          << (sum.passed[i] ? "[pass]" : "[fail]") << "\n";
            if (sum.dispersion_slope)
                std::cout << "dispersion slope: " << *sum.dispersion_slope << "\n";
            if (sum.crossing_estimate)
                std::cout << "criticality crossing near cr_level " << *sum.crossing_estimate
                          << "\n";
        } else if (tune->parsed()) {
            const auto res = fnolab::run_tune(cfg, opt);
            pass = res.pass;
            std::cout << cfg.name << ": " << res.report.parameter << " = "
                      << res.report.recommended
                      << " (condition " << res.report.condition_value << ", "
                      << res.report.iterations << " iterations)\n";
            if (!res.report.converged) {
                std::cout << "solver failed: " << res.report.message << "\n";
            } else {
                std::cout << "MC integrated value " << res.mc_integrated << " +- " << res.mc_std
                          << (res.mc_within_2std ? " [within 2 std of 1]" : " [outside 2 std]")
                          << "\n";
            }
        }
        std::cout << "elapsed " << timer.seconds() << " s\n";
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
