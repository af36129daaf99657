#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "laplace_cert/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kAssumption = 3;
constexpr int kNumerical = 4;

const char* kDisclaimer =
    "note: constants with provenance 'estimated' come from sampling and do not certify the bound\n";

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw lc::NumericalError("cannot write " + (dir / name).string());
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplace approximation error certificates for Bayesian inverse problems"};
    app.require_subcommand(1);

    std::string config_path, out_dir, oracle;
    long long seed = -1;
    bool allow_invalid = false;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "configuration file")->required();
        sub->add_option("--seed", seed, "override the config seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--out-dir", out_dir, "override the output directory");
        sub->add_flag("--allow-invalid", allow_invalid, "exit 0 despite assumption violations");
        sub->add_option("--oracle", oracle, "auto, quadrature, importance or none")
            ->check(CLI::IsMember({"auto", "quadrature", "importance", "none"}));
    };
    CLI::App* run = app.add_subcommand("run", "compute bounds and oracle distances, write results.csv and rates.txt");
    CLI::App* dens = app.add_subcommand("densities", "write densities.csv for a one-dimensional problem");
    CLI::App* ver = app.add_subcommand("verify", "check the standing assumptions");
    for (auto* s : {run, dens, ver}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        lc::ExperimentConfig cfg = lc::load_config(config_path);
        lc::RunOptions opt;
        opt.allow_invalid = allow_invalid;
        if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
        if (!oracle.empty()) opt.oracle = lc::parse_oracle(oracle);
        const fs::path dir = out_dir.empty() ? fs::path(cfg.output) : fs::path(out_dir);

        if (run->parsed()) {
            const auto rows = lc::run_experiment(cfg, opt);
            {
                auto f = open_out(dir, "results.csv");
                lc::write_results_csv(f, rows);
            }
            {
                auto f = open_out(dir, "rates.txt");
                lc::write_rates(f, cfg, rows);
            }
            bool violation = false, numerical = false, estimated = false;
            for (const auto& r : rows) {
                violation |= r.status == lc::RowStatus::AssumptionViolation;
                numerical |= r.status == lc::RowStatus::NumericalFailure;
                estimated |= r.constants && r.constants->provenance == lc::Provenance::Estimated;
                if (r.status != lc::RowStatus::Ok)
                    std::cerr << "axis_value=" << lc::format_double(r.axis_value) << ": "
                              << lc::to_string(r.status) << ": " << r.message << "\n";
            }
            if (estimated) std::cerr << kDisclaimer;
            std::cout << "wrote " << (dir / "results.csv").string() << " (" << rows.size()
                      << " rows) and " << (dir / "rates.txt").string() << "\n";
            if (numerical) return kNumerical;
            if (violation && !allow_invalid) return kAssumption;
            return kOk;
        }
        if (dens->parsed()) {
            const lc::InverseProblem p = lc::build_problem(cfg, std::nullopt);
            lc::MapOptions mo;
            mo.multistart = cfg.multistart;
            mo.seed = opt.seed.value_or(cfg.seed);
            const lc::MapResult map = lc::map_estimate(p, lc::default_start(p), mo);
            const auto rows = lc::density_table(p, map, cfg.density_grid);
            auto f = open_out(dir, "densities.csv");
            lc::write_densities_csv(f, rows);
            std::cout << "wrote " << (dir / "densities.csv").string() << "\n";
            return kOk;
        }
        const auto checks = lc::verify_assumptions(cfg, opt);
        lc::write_checks(std::cout, checks);
        bool failed = false, estimated = false;
        for (const auto& c : checks) {
            failed |= c.status == "fail" && c.name != "explicit_bound_condition";
            estimated |= c.provenance == "estimated";
        }
        if (estimated) std::cerr << kDisclaimer;
        return failed && !allow_invalid ? kAssumption : kOk;
    } catch (const lc::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const lc::AssumptionViolation& e) {
        std::cerr << "assumption violation: " << e.what() << "\n";
        return allow_invalid ? kOk : kAssumption;
    } catch (const lc::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
}
