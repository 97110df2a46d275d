// cil: run one named experiment and write its outputs.
#include "cil/experiments.hpp"

#include "CLI11.hpp"

#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Contact-process interface experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<double> lambda;
    std::optional<int> range;
    std::optional<long long> reps;
    std::optional<unsigned long long> seed;
    std::optional<double> horizon;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::vector<std::string> sets;
    bool quiet = false;

    for (const auto& name : cil::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "flat key = value file");
        sub->add_option("--lambda", lambda, "birth rate per ordered pair");
        sub->add_option("--range", range, "interaction radius R");
        sub->add_option("--reps", reps, "replications");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--horizon", horizon, "time horizon");
        sub->add_option("--out", out, "output root directory");
        sub->add_option("--threads", threads, "worker threads, 0 for all cores");
        sub->add_option("--set", sets, "extra key=value overrides")->take_all();
        sub->add_flag("--quiet", quiet, "print only the output directory");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        cil::Config cfg = config_path.empty() ? cil::Config{} : cil::Config::load(config_path);
        // Flags win over the file.
        auto put = [&cfg](const char* key, const auto& v) {
            if (v) {
                std::ostringstream ss;
                ss << std::setprecision(17) << *v;
                cfg.set(key, ss.str());
            }
        };
        put("lambda", lambda);
        put("range", range);
        put("reps", reps);
        put("seed", seed);
        put("horizon", horizon);
        put("out", out);
        put("threads", threads);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw cil::ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        const auto resolved = cil::resolve_config(command, cfg);
        const auto result = cil::run_experiment(resolved);
        const auto dir = resolved.output_dir();
        cil::write_outputs(result, dir);
        if (quiet) {
            std::cout << dir.string() << "\n";
        } else {
            std::cout << command << " -> " << dir.string() << "\n";
            for (const auto& [k, v] : result.scalars) std::cout << "  " << k << " = " << v << "\n";
            for (const auto& v : result.verdicts) {
                std::cout << (v.pass ? "  PASS " : "  FAIL ") << v.name << ": " << v.detail << "\n";
            }
        }
        return result.passed() ? 0 : 1;
    } catch (const cil::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
