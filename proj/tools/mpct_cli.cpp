// SPDX-License-Identifier: Apache-2.0
//
// mpct: synthesize, detect, track and evaluate multipath components.
// Exit codes: 0 ok, 2 config error, 3 parse error, 4 stage failure.

#include "mpct/error.hpp"
#include "mpct/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace
{

using mpct::json;

constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitStage = 4;

void collect_leaves(const json& j, const std::string& prefix, std::vector<std::string>& out)
{
    for (const auto& [key, value] : j.items())
    {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object())
            collect_leaves(value, path, out);
        else if (path != "seed" && path != "out" && path != "threads")
            out.push_back(path);
    }
}

// Flag values are JSON when they parse as JSON, plain strings otherwise.
json flag_value(const std::string& text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error&)
    {
        return json(text);
    }
}

void set_path(json& root, const std::string& path, json value)
{
    json* node = &root;
    std::size_t start = 0;
    for (;;)
    {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (dot == std::string::npos)
        {
            (*node)[key] = std::move(value);
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object())
            (*node)[key] = json::object();
        node = &(*node)[key];
        start = dot + 1;
    }
}

struct Invocation
{
    std::string config_file;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 0;
    std::map<std::string, std::string> flags;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help,
                      const std::vector<std::string>& leaves, Invocation& inv)
{
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_file, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", inv.seed, "Base seed")->required();
    sub->add_option("--out", inv.out, "Artifact directory")->required();
    sub->add_option("--threads", inv.threads, "Detection workers (0: hardware concurrency)");
    for (const auto& leaf : leaves)
        sub->add_option_function<std::string>(
               "--" + leaf, [&inv, leaf](const std::string& v) { inv.flags[leaf] = v; }, "config key " + leaf)
            ->group("Config keys");
    return sub;
}

mpct::PipelineConfig build_config(const Invocation& inv, const std::string& command)
{
    json overrides = json::object();
    if (!inv.config_file.empty())
        overrides = mpct::parse_json(mpct::read_text(inv.config_file));
    if (!overrides.is_object())
        throw mpct::ConfigError("configuration file must hold a JSON object");
    for (const auto& [path, text] : inv.flags)
        set_path(overrides, path, flag_value(text));
    set_path(overrides, "seed", inv.seed);
    set_path(overrides, "out", inv.out);
    set_path(overrides, "threads", inv.threads);
    if (command != "pipeline")
        set_path(overrides, "stages", json::array({command}));
    auto cfg = mpct::config_from_json(overrides);
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multipath component detection and tracking for wideband channel-sounder data"};
    app.require_subcommand(1);

    std::vector<std::string> leaves;
    collect_leaves(mpct::config_to_json(mpct::PipelineConfig{}), "", leaves);

    Invocation inv;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "Render the scenario to dataset.wcir, pulse.wpls and truth.json"},
        {"detect", "Detect MPCs per snapshot into detections.json"},
        {"track", "Short-term tracking into tracks.json (proposed)"},
        {"gmphd", "GM-PHD tracking into tracks.json (gmphd)"},
        {"longtrack", "Link full-lifetime tracks across sets"},
        {"eval", "Artificial-channel sweep (eval.csv) and channel gains (gains.csv)"},
        {"stats", "Run statistics and power-loss ledger (stats.json)"},
        {"pipeline", "Run the configured stages in order"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands)
        subs[name] = add_command(app, name, help, leaves, inv);
    app.add_subcommand("defaults", "Print the default configuration")->callback([] {
        std::cout << mpct::config_to_json(mpct::PipelineConfig{}).dump(2) << '\n';
    });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed())
            command = name;
    if (command.empty())
        return 0;

    try
    {
        const auto cfg = build_config(inv, command);
        if (command == "pipeline")
            mpct::run_pipeline(cfg);
        else
            mpct::run_stage(command, cfg);
    }
    catch (const mpct::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const mpct::ParseError& e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitParse;
    }
    catch (const mpct::StageError& e)
    {
        std::cerr << "stage " << e.what() << '\n';
        return kExitStage;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStage;
    }
    return 0;
}
