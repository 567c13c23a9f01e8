#pragma once

#include "options.hpp"

#include <functional>

namespace qae::cli {

struct Command {
    CLI::App* app;
    std::function<int()> run;
};

std::vector<Command> add_train(CLI::App& app, const GlobalFlags& g);
std::vector<Command> add_denoise(CLI::App& app, const GlobalFlags& g);
std::vector<Command> add_verify(CLI::App& app, const GlobalFlags& g);
std::vector<Command> add_study(CLI::App& app, const GlobalFlags& g);
std::vector<Command> add_gen_corpus(CLI::App& app, const GlobalFlags& g);

} // namespace qae::cli
