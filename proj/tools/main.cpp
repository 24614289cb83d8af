#include "commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

int main(int argc, char** argv) {
    using namespace vsm::app;
    CLI::App app{"Virtual solitary manifold toolkit for the perturbed sine-Gordon equation"};
    app.require_subcommand(1);
    CommandOptions o;
    bool seedless = false;

    auto add = [&](const char* name, const char* help, std::function<int(const CommandOptions&)> fn, bool model,
                   bool eps, bool order) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
        if (model) sub->add_option("--model", o.model, "Model directory written by build");
        if (eps) sub->add_option("--eps", o.eps, "Comma-separated eps values");
        if (order) sub->add_option("--order", o.order, "Comma-separated truncation orders");
        sub->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_flag("--seedless", seedless, "Accepted for compatibility; every run is deterministic");
        return std::make_pair(sub, fn);
    };
    std::vector<std::pair<CLI::App*, std::function<int(const CommandOptions&)>>> subs{
        add("build", "Build the manifold and write the model directory", cmd_build, false, false, true),
        add("residual-sweep", "Residual norms against eps for several orders", cmd_residual_sweep, true, true, true),
        add("simulate", "Integrate the modulation equations", cmd_simulate, true, true, true),
        add("verify", "Compare PDE evolution with the manifold trajectory", cmd_verify, true, true, true),
        add("bounds-check", "Factorial bound table of the stored coefficients", cmd_bounds_check, true, false, false),
        add("rescaled-check", "Rescaled-time limit dynamics", cmd_rescaled_check, true, true, false),
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    for (auto& [sub, fn] : subs)
        if (sub->parsed()) return fn(o);
    return kExitUsage;
}
