#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rkhs/error.hpp"
#include "rkhs/experiment.hpp"

namespace {

struct Overrides {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::string> method;
};

void add_common(CLI::App* sub, Overrides& o, bool with_method) {
    sub->add_option("--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "seed for randomized center selection");
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    if (with_method) {
        sub->add_option("--method", o.method, "center selection method")
            ->check(CLI::IsMember({"uniform", "random", "cvt", "som", "explicit"}));
    }
}

rkhs::exp::ExperimentConfig resolve(const Overrides& o) {
    auto cfg = rkhs::exp::load_config(o.config);
    if (o.seed) { cfg.seed = o.seed; }
    if (o.out) { cfg.out_dir = *o.out; }
    if (o.method) { cfg.centers.method = *o.method; }
    rkhs::exp::validate(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-center selection and RKHS adaptive estimation experiments", "rkhs-adapt"};
    app.require_subcommand(1);
    Overrides o;

    using Stage = void (*)(const rkhs::exp::ExperimentConfig&);
    struct Entry {
        const char* name;
        const char* help;
        Stage stage;
    };
    const Entry entries[] = {
        {"simulate", "integrate the plant and write trajectory.csv", rkhs::exp::stage_simulate},
        {"centers", "select kernel centers from the trajectory", rkhs::exp::stage_centers},
        {"diagnose", "placement and occupancy diagnostics for the centers", rkhs::exp::stage_diagnose},
        {"estimate", "run the adaptive estimator on the centers", rkhs::exp::stage_estimate},
        {"grid", "pointwise error of the learned function on a grid", rkhs::exp::stage_grid},
        {"run", "all stages in order", rkhs::exp::run_experiment},
    };
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(e.name, e.help);
        const std::string name = e.name;
        add_common(sub, o, name == "centers" || name == "run");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto cfg = resolve(o);
        for (const auto& e : entries) {
            if (app.got_subcommand(e.name)) { e.stage(cfg); }
        }
    } catch (const rkhs::Error& e) {
        std::cerr << "rkhs-adapt: " << e.what() << "\n";
        return rkhs::exp::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "rkhs-adapt: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
