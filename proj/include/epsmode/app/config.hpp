#pragma once

#include "epsmode/born.hpp"
#include "epsmode/dielectric.hpp"
#include "epsmode/errors.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace epsmode::app
{

/// Invalid configuration document (exit status 2).
class ConfigError : public Error
{
public:
    using Error::Error;
};

inline const std::vector<std::string> &experiment_names()
{
    static const std::vector<std::string> names{"modes",     "green-check", "born",      "gauge",
                                                "localfield", "couplings",  "interface", "report"};
    return names;
}

struct SolverConfig
{
    std::optional<std::size_t> mode_count;
    double degeneracy_tol = 1e-6;
    std::optional<double> omega_tol;
    double eta = 0.0;
    double resonance_tol = 1e-8;
    FrequencyPolicy frequency_policy = FrequencyPolicy::Fixed;
    double eps_min = 0.05;
    std::optional<Index3> band_limit;
};

struct GreenCheckParams
{
    /// Empty: midpoints between the lowest distinct eigenfrequencies.
    std::vector<double> frequencies;
    /// Dense oracle comparison; defaults to on when 3N <= 3000.
    std::optional<bool> dense;
};

struct BornParams
{
    std::string variant = "both"; ///< "G", "K" or "both"
    int orders = 3;
    std::vector<std::size_t> labels; ///< empty: lowest nondegenerate
    std::size_t mode_count = 4;
};

struct GaugeParams
{
    std::vector<std::size_t> labels; ///< empty: lowest `mode_count` modes
    std::size_t mode_count = 4;
};

struct LocalFieldParams
{
    std::vector<double> eps{1.0, 1.5, 2.0, 4.0, 12.0};
};

struct CouplingParams
{
    /// Empty: full, 3/4, 1/2 and 1/4 of the medium-I basis.
    std::vector<std::size_t> basis_sizes;
    bool write_matrix = false;
};

struct InterfaceParams
{
    LayeredSpec epsilon_ii;
    std::vector<std::size_t> labels; ///< empty: the lowest 8 modes
};

struct ExperimentConfig
{
    std::string experiment;
    Index3 dims{};
    Real3 lengths{};
    ProfileSpec epsilon_i = HomogeneousSpec{};
    DisorderSpec disorder;
    SolverConfig solver;
    GreenCheckParams green_check;
    BornParams born;
    GaugeParams gauge;
    LocalFieldParams localfield;
    CouplingParams couplings;
    InterfaceParams interface;
    std::string output = "out";

    Grid grid() const { return Grid(dims, lengths); }
    ProfileOptions profile_options() const { return {solver.eps_min, solver.band_limit}; }
};

/// Parses and validates a configuration document; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json &doc);
ExperimentConfig load_config(const std::string &path);

/// Effective configuration with every default materialized.
nlohmann::json to_json(const ExperimentConfig &config);

/// Lower-case hex SHA-256 of the canonical serialization.
std::string sha256_hex(const std::string &bytes);
std::string config_hash(const ExperimentConfig &config);
/// Hash over the subset of the configuration that determines the medium-I modes.
std::string mode_hash(const ExperimentConfig &config);

} // namespace epsmode::app
