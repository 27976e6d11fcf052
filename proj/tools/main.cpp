#include "onsager/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Maier-Saupe / Onsager small-interaction-range experiments"};
    std::string command;
    std::string config;
    app.add_option("command", command, "phase-diagram, bingham-check, kernel-check, operator-check, minimize, eps-scan or "
                                       "harmonic-map; defaults to the config's command key")
        ->check(CLI::IsMember(onsager::commands()));
    app.add_option("-c,--config", config, "key=value config file")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << onsager::error_line(onsager::ConfigError("", e.what())) << std::endl;
        return 2;
    }
    return onsager::run(command, config, std::cout, std::cerr);
}
