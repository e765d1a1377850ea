// qkin: runs one study and writes <out>.csv / <out>.json.
// Exit status: 0 all criteria pass, 1 a criterion failed, 2 bad input or runtime error.

#include <CLI11.hpp>

#include <iostream>

#include "qkin/studies.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Kinetic-limit studies for the quantum BBGKY hierarchy"};
    app.require_subcommand(1);

    std::string config_path, epsilons, out;
    long long samples = 0;
    long long seed = -1;
    int order = -1, theta = 0;
    double offset = -1.0, t2 = -1.0;
    app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--epsilons", epsilons, "comma-separated, strictly decreasing");
    app.add_option("--samples", samples, "Monte Carlo samples per epsilon");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--out", out, "output prefix");
    app.add_option("--potential-order", order, "vanishing order n of phi_hat");
    app.add_option("--potential-offset", offset, "constant admixture c0");
    app.add_option("--theta", theta, "+1 bosons, -1 fermions");
    app.add_option("--t2", t2, "outer time");
    for (const auto& name : qkin::study_names()) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const std::string study = app.get_subcommands().front()->get_name();
        qkin::ConfigMap file, flags;
        if (!config_path.empty()) file = qkin::parse_config_file(config_path);
        if (!epsilons.empty()) flags["epsilons"] = epsilons;
        if (samples > 0) flags["quadrature.n_samples"] = std::to_string(samples);
        if (seed >= 0) flags["quadrature.seed"] = std::to_string(seed);
        if (!out.empty()) flags["out"] = out;
        if (order >= 0) flags["potential.order"] = std::to_string(order);
        if (offset >= 0.0) flags["potential.offset"] = qkin::format_double(offset);
        if (theta != 0) flags["theta"] = std::to_string(theta);
        if (t2 > 0.0) flags["t2"] = qkin::format_double(t2);
        return qkin::run_study(qkin::build_spec(study, file, flags));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
