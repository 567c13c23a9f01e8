#include "commands.hpp"

#include "qae/errors.hpp"

#include <iostream>

using namespace qae;

int main(int argc, char** argv) {
    CLI::App app{"Quadratic autoencoder for low-dose CT denoising"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.fallthrough();

    cli::GlobalFlags flags;
    app.add_flag("--quiet,-q", flags.quiet, "only print errors and final results");

    std::vector<cli::Command> commands;
    for (auto add : {cli::add_train, cli::add_denoise, cli::add_verify, cli::add_study, cli::add_gen_corpus}) {
        for (auto& c : add(app, flags)) commands.push_back(std::move(c));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        // Name the choices when a command group was given no (or an unknown) subcommand.
        for (const CLI::App* group : app.get_subcommands({})) {
            if (!group->parsed() || group->get_subcommands({}).empty()) continue;
            if (!group->get_subcommands().empty()) continue;
            std::string names;
            for (const CLI::App* sub : group->get_subcommands({})) names += (names.empty() ? "" : ", ") + sub->get_name();
            std::cerr << "valid " << group->get_name() << " names: " << names << '\n';
        }
        return 2;
    }

    try {
        for (const auto& c : commands) {
            if (c.app->parsed()) return c.run();
        }
        std::cerr << "no command given\n";
        return 2;
    } catch (const cli::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const cli::CheckFailed& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
