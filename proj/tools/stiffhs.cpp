#include "stiffhs/cli_io.hpp"
#include "stiffhs/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv)
{
    using namespace stiffhs;
    CLI::App app{"Stiff-pressure limit experiments: porous medium solver, Hele-Shaw fronts, barriers"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config;
    std::string out = "runs";
    std::vector<double> m_list;
    int threads = 0;
    const std::map<std::string, std::string> about{
        {"pme-run", "porous medium runs at every m: snapshots and diagnostics"},
        {"front-run", "radial Hele-Shaw front of the limit problem"},
        {"sweep", "m-sweep against the front reference"},
        {"barriers", "barrier identities and sampled verification"},
        {"contraction", "L1 contraction and ordering of a scaled copy"},
        {"perimeter", "support perimeter and boundary-band measure"},
    };
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output root (one directory per run)");
        sub->add_option("--m-list", m_list, "override m_list, e.g. 10,20,40,80")->delimiter(',');
        sub->add_option("--threads", threads, "worker threads for sweeps (0: automatic)")->check(CLI::NonNegativeNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    ParsedScenario parsed;
    try {
        std::optional<std::vector<double>> override;
        if (!m_list.empty())
            override = m_list;
        parsed = parse_scenario(config, override);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config " << config << ":\n";
        for (const auto& f : e.failures())
            std::cerr << "  " << f << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "invalid config " << config << ": " << e.what() << "\n";
        return kExitValidation;
    }
    DispatchOptions opt;
    opt.threads = threads;
    return dispatch(command, parsed, out, opt, std::cerr);
}
