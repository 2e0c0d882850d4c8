#include "epsmode/app/cache.hpp"
#include "epsmode/app/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace
{

using nlohmann::json;

void diagnostic(const std::string &kind, const std::string &message)
{
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

} // namespace

int main(int argc, char **argv)
{
    using namespace epsmode;

    CLI::App cli{"Normal modes, Green kernels and gauge-respecting perturbation series for dielectric media"};
    cli.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool force = false;

    for (const auto &name : app::experiment_names())
    {
        auto *sub = cli.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "disorder seed (overrides the config)");
        sub->add_option("--threads", threads, "worker threads (fallback: EPSMODE_THREADS)");
        sub->add_flag("--force", force, "accept a mode cache written for a different configuration");
    }

    try
    {
        cli.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        if (e.get_exit_code() == 0)
        {
            return cli.exit(e);
        }
        diagnostic("usage", e.what());
        return 2;
    }
    const std::string experiment = cli.get_subcommands().front()->get_name();

    app::ExperimentConfig config;
    try
    {
        std::ifstream in(config_path);
        json doc = json::parse(in);
        if (!doc.is_object())
        {
            throw app::ConfigError("configuration must be a JSON object");
        }
        if (!doc.contains("experiment"))
        {
            doc["experiment"] = experiment;
        }
        else if (doc["experiment"] != experiment)
        {
            throw app::ConfigError("$.experiment does not match the subcommand '" + experiment + "'");
        }
        if (out_dir)
        {
            doc["output"] = *out_dir;
        }
        if (seed)
        {
            if (!doc.contains("disorder"))
            {
                doc["disorder"] = json::object();
            }
            doc["disorder"]["seed"] = *seed;
        }
        config = app::parse_config(doc);
    }
    catch (const json::exception &e)
    {
        diagnostic("schema", std::string("invalid JSON: ") + e.what());
        return 2;
    }
    catch (const app::ConfigError &e)
    {
        diagnostic("schema", e.what());
        return 2;
    }

    try
    {
        app::RunOptions options;
        options.force = force;
        options.threads = app::resolve_threads(threads);
        const json summary = app::run_experiment(config, options);
        std::cout << json{{"experiment", experiment},
                          {"config_hash", summary["config_hash"]},
                          {"summary", (std::filesystem::path(config.output) / experiment / "summary.json").string()}}
                         .dump()
                  << '\n';
        return 0;
    }
    catch (const app::ConfigError &e)
    {
        diagnostic("schema", e.what());
        return 2;
    }
    catch (const std::exception &e)
    {
        diagnostic("compute", e.what());
        return 1;
    }
}
