#pragma once

#include "epsmode/app/config.hpp"

#include <json.hpp>

#include <optional>

namespace epsmode::app
{

struct RunOptions
{
    bool force = false;
    unsigned threads = 1;
};

/// --threads, else EPSMODE_THREADS, else 1.
unsigned resolve_threads(std::optional<unsigned> flag);

/// Runs one experiment, writes `<output>/<experiment>/` and returns its summary.
nlohmann::json run_experiment(const ExperimentConfig &config, const RunOptions &options = {});

/// Medium-I modes, loaded from `<output>/cache/modes_i.epsm` when present and
/// written there otherwise.
ModeSet obtain_modes(const ExperimentConfig &config, const DielectricProfile &eps, const RunOptions &options);

} // namespace epsmode::app
