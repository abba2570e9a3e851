#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fracdrift/runner.hpp"

int main(int argc, char** argv) {
    std::cout << std::unitbuf;
    CLI::App app{"fracdrift: fractional drift-diffusion experiments"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;
    for (const char* name : {"decay", "eta", "solve", "particles", "compare"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " suite");
        sub->add_option("--config", config, "configuration file (defaults when omitted)")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--seed", seed, "overrides the configured seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const auto* sub = app.get_subcommands().front();
    return fracdrift::run_cli(fracdrift::parse_experiment(sub->get_name()), config, out, seed, std::cout, std::cerr);
}
