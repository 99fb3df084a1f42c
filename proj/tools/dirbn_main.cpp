// dirbn: train, evaluate and inspect Dirichlet belief network topic models.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "dirbn/cli.hpp"

namespace {

using dirbn::cli::Command;

struct Subcommand {
    Command command = Command::Train;
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;
    std::map<std::string, CLI::Option*> options;
};

void register_keys(Subcommand& sub) {
    sub.app->add_option("--config", sub.config_path, "flat key = value configuration file");
    for (const auto& spec : dirbn::cli::command_keys(sub.command)) {
        std::string help = spec.help;
        if (!spec.default_value.empty()) help += " [default: " + spec.default_value + "]";
        if (spec.is_flag)
            sub.options[spec.key] = sub.app->add_flag("--" + spec.key, sub.switches[spec.key], help);
        else
            sub.options[spec.key] = sub.app->add_option("--" + spec.key, sub.values[spec.key], help);
    }
}

std::map<std::string, std::string> given_flags(const Subcommand& sub) {
    std::map<std::string, std::string> out;
    for (const auto& [key, opt] : sub.options) {
        if (opt->count() == 0) continue;
        auto sw = sub.switches.find(key);
        out[key] = sw != sub.switches.end() ? (sw->second ? "true" : "false") : sub.values.at(key);
    }
    return out;
}

int run(const Subcommand& sub) {
    std::map<std::string, std::string> file;
    if (!sub.config_path.empty()) file = dirbn::cli::load_config_file(sub.config_path);
    const auto cfg = dirbn::cli::resolve_config(sub.command, given_flags(sub), file);
    switch (sub.command) {
    case Command::Train: {
        auto r = dirbn::cli::cmd_train(cfg, std::cerr);
        std::cout << "trained " << r.sweeps << " iterations, kept " << r.phi1_samples.size() << " samples in "
                  << cfg.out_dir().string() << "\n";
        break;
    }
    case Command::Eval: {
        auto m = dirbn::cli::cmd_eval(cfg, std::cerr);
        std::cout << "perplexity " << m.perplexity << "  npmi " << m.coherence.aggregate << "\n";
        break;
    }
    case Command::ExportHierarchy: {
        auto h = dirbn::cli::cmd_export_hierarchy(cfg);
        std::cout << "exported " << h.layers.size() << " layers and " << h.links.size() << " links\n";
        break;
    }
    case Command::Synth: {
        auto s = dirbn::cli::cmd_synth(cfg);
        std::cout << "generated " << s.corpus.num_docs() << " documents, " << s.corpus.total_tokens() << " tokens\n";
        break;
    }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirichlet belief network topic models"};
    app.require_subcommand(1);
    Subcommand subs[4];
    const Command commands[] = {Command::Train, Command::Eval, Command::ExportHierarchy, Command::Synth};
    const char* about[] = {"fit a model to a bag-of-words corpus", "heldout perplexity and topic coherence of a run",
                           "write the topic hierarchy of a run", "generate a synthetic corpus from the prior"};
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        subs[i].command = commands[i];
        subs[i].app = app.add_subcommand(dirbn::cli::command_name(subs[i].command), about[i]);
        register_keys(subs[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const auto& sub : subs) {
        if (!sub.app->parsed()) continue;
        try {
            return run(sub);
        } catch (const std::exception& e) {
            std::cerr << "dirbn " << dirbn::cli::command_name(sub.command) << ": " << e.what() << "\n";
            return dirbn::cli::exit_code_for(e);
        }
    }
    return 1;
}
