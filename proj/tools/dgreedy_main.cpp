#include <CLI11.hpp>

#include <iostream>

#include "dgreedy/errors.hpp"
#include "dgreedy/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_table(const dgreedy::ReportTable& t) {
    std::cout << "piece cycle trial test    delta        surr         rb_truth     rb_l2        ratio\n";
    for (const auto& r : t.rows) {
        std::printf("%5d %5d %5ld %4ld  %.3e  %.3e  %.3e  %.3e  %.3e %s\n", r.piece, r.cycle, r.trial, r.test,
                    r.delta, r.max_surrogate, r.rb_truth, r.rb_l2, r.ratio, r.ratio_kind.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"double-greedy reduced basis experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one experiment and write table.csv, history.json, decay.csv");
    std::string config_path;
    run->add_option("--config", config_path, "flat key = value config file");
    std::map<std::string, std::string> flags;
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        run->add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };
    flag("--problem", "problem", "cd | transport | transport_jump | synthetic_saddle");
    flag("--epsilon", "epsilon", "diffusion");
    flag("--omega", "omega", "outflow penalty weight");
    flag("--trial-level", "trial_level", "trial grid level");
    flag("--test-level", "test_level", "test grid level");
    flag("--samples", "sample_count", "training sample count");
    flag("--interval", "parameter_interval", "[lo, hi]");
    flag("--zeta", "zeta", "inf-sup safety factor");
    flag("--delta", "delta", "proximality target");
    flag("--tol", "tol", "greedy tolerance");
    flag("--n-max", "n_max", "maximal trial dimension");
    flag("--cycles", "cycles", "iterative tightening cycles");
    flag("--out", "output_dir", "output directory");
    flag("--seed", "seed", "seed for the synthetic problem");
    flag("--piece", "piece", "0, 1 or all");
    flag("--surrogate", "surrogate", "auto | truth_dual | reduced_dual");
    flag("--loop", "loop", "auto | inf_sup | delta");
    flag("--threads", "threads", "worker threads (0 = hardware)");
    bool quiet = false;
    run->add_flag("-q,--quiet", quiet, "do not print the table");

    auto* verify = app.add_subcommand("verify", "run the invariant suite on small problems");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            dgreedy::ExperimentConfig cfg =
                config_path.empty() ? dgreedy::ExperimentConfig{} : dgreedy::parse_config_file(config_path);
            for (const auto& [k, v] : flags) dgreedy::set_config_value(cfg, k, v);
            cfg.validate();
            const auto res = dgreedy::run_experiment(cfg);
            dgreedy::emit_outputs(res, cfg.output_dir);
            if (!quiet) print_table(res.table);
            std::cout << "wrote " << cfg.output_dir << "/{table.csv,history.json,decay.csv}\n";
            return 0;
        }
        if (*verify) {
            bool ok = true;
            for (const auto& c : dgreedy::run_verify()) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
                if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
                std::cout << "\n";
                ok = ok && c.passed;
            }
            return ok ? 0 : 1;
        }
    } catch (const dgreedy::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const dgreedy::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
