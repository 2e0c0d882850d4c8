#include "epsmode/app/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace epsmode::app
{

using nlohmann::json;

namespace
{

/// Reads keys of one JSON object and rejects the ones nobody asked for.
class ObjectReader
{
public:
    ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
        {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    bool has(const std::string &key)
    {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json &raw(const std::string &key)
    {
        if (!has(key))
        {
            throw ConfigError(where(key) + ": required");
        }
        return j_.at(key);
    }

    template <class T> T get(const std::string &key)
    {
        const json &v = raw(key);
        try
        {
            return v.get<T>();
        }
        catch (const json::exception &)
        {
            throw ConfigError(where(key) + ": wrong type");
        }
    }

    template <class T> T get(const std::string &key, T fallback)
    {
        return has(key) ? get<T>(key) : fallback;
    }

    template <class T> std::optional<T> optional(const std::string &key)
    {
        return has(key) ? std::optional<T>(get<T>(key)) : std::nullopt;
    }

    std::string where(const std::string &key) const { return path_ + "." + key; }

    void done() const
    {
        for (const auto &item : j_.items())
        {
            if (!seen_.contains(item.key()))
            {
                throw ConfigError(where(item.key()) + ": unknown key");
            }
        }
    }

private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string &what)
{
    if (!ok)
    {
        throw ConfigError(what);
    }
}

bool positive(double x)
{
    return std::isfinite(x) && x > 0.0;
}

LayeredSpec parse_layered(ObjectReader &r)
{
    LayeredSpec s;
    s.values = r.get<std::vector<double>>("values");
    s.interfaces = r.get<std::vector<double>>("interfaces", {});
    s.width = r.get<double>("width", 0.0);
    s.axis = r.get<int>("axis", 2);
    check(!s.values.empty(), r.where("values") + ": must not be empty");
    check(s.values.size() == s.interfaces.size() + 1, r.where("values") + ": needs one more entry than interfaces");
    check(s.width >= 0.0, r.where("width") + ": must be >= 0");
    check(s.axis >= 0 && s.axis < 3, r.where("axis") + ": must be 0, 1 or 2");
    return s;
}

ProfileSpec parse_profile(const json &j, const std::string &path, std::size_t points)
{
    ObjectReader r(j, path);
    const auto kind = r.get<std::string>("kind");
    ProfileSpec out;
    if (kind == "homogeneous")
    {
        out = HomogeneousSpec{r.get<double>("value")};
    }
    else if (kind == "layered")
    {
        out = parse_layered(r);
    }
    else if (kind == "sampled")
    {
        SampledSpec s{r.get<std::vector<double>>("values")};
        check(s.values.size() == points, r.where("values") + ": must have one value per grid point");
        out = std::move(s);
    }
    else
    {
        throw ConfigError(r.where("kind") + ": expected homogeneous, layered or sampled");
    }
    r.done();
    return out;
}

json layered_json(const LayeredSpec &s)
{
    return {{"kind", "layered"}, {"values", s.values}, {"interfaces", s.interfaces}, {"width", s.width}, {"axis", s.axis}};
}

json profile_json(const ProfileSpec &spec)
{
    if (const auto *h = std::get_if<HomogeneousSpec>(&spec))
    {
        return {{"kind", "homogeneous"}, {"value", h->value}};
    }
    if (const auto *l = std::get_if<LayeredSpec>(&spec))
    {
        return layered_json(*l);
    }
    return {{"kind", "sampled"}, {"values", std::get<SampledSpec>(spec).values}};
}

template <class T> json opt_json(const std::optional<T> &v)
{
    return v ? json(*v) : json(nullptr);
}

} // namespace

ExperimentConfig parse_config(const json &doc)
{
    ExperimentConfig c;
    ObjectReader root(doc, "$");
    c.experiment = root.get<std::string>("experiment");
    const auto &names = experiment_names();
    check(std::find(names.begin(), names.end(), c.experiment) != names.end(),
          "$.experiment: unknown experiment '" + c.experiment + "'");
    c.output = root.get<std::string>("output", "out");

    {
        ObjectReader g(root.raw("geometry"), "$.geometry");
        c.dims = g.get<Index3>("dims");
        c.lengths = g.get<Real3>("lengths");
        for (int a = 0; a < 3; ++a)
        {
            check(c.dims[a] >= 1, g.where("dims") + ": entries must be >= 1");
            check(positive(c.lengths[a]), g.where("lengths") + ": entries must be > 0");
        }
        g.done();
    }
    const std::size_t points = static_cast<std::size_t>(c.dims[0]) * c.dims[1] * c.dims[2];
    check(points >= 2, "$.geometry.dims: grid needs at least two points");

    c.epsilon_i = root.has("epsilon_i") ? parse_profile(root.raw("epsilon_i"), "$.epsilon_i", points)
                                        : ProfileSpec{HomogeneousSpec{1.0}};

    c.disorder.correlation_lengths = {c.lengths[0] / 8.0, c.lengths[1] / 8.0, c.lengths[2] / 8.0};
    if (root.has("disorder"))
    {
        ObjectReader d(root.raw("disorder"), "$.disorder");
        c.disorder.seed = d.get<std::uint64_t>("seed", 0);
        c.disorder.rms = d.get<double>("rms", 0.0);
        c.disorder.correlation_lengths = d.get<Real3>("correlation_lengths", c.disorder.correlation_lengths);
        check(std::isfinite(c.disorder.rms) && c.disorder.rms >= 0.0, d.where("rms") + ": must be >= 0");
        for (double l : c.disorder.correlation_lengths)
        {
            check(positive(l), d.where("correlation_lengths") + ": entries must be > 0");
        }
        if (d.has("region"))
        {
            ObjectReader b(d.raw("region"), d.where("region"));
            BoxRegion region;
            region.lower = b.get<Real3>("lower");
            region.upper = b.get<Real3>("upper");
            region.edge_width = b.get<double>("edge_width", 0.0);
            for (int a = 0; a < 3; ++a)
            {
                check(region.lower[a] < region.upper[a], b.where("upper") + ": must exceed lower");
            }
            check(region.edge_width >= 0.0, b.where("edge_width") + ": must be >= 0");
            b.done();
            c.disorder.region = region;
        }
        d.done();
    }

    if (root.has("solver"))
    {
        ObjectReader s(root.raw("solver"), "$.solver");
        auto &v = c.solver;
        v.mode_count = s.optional<std::size_t>("mode_count");
        v.degeneracy_tol = s.get<double>("degeneracy_tol", v.degeneracy_tol);
        v.omega_tol = s.optional<double>("omega_tol");
        v.eta = s.get<double>("eta", v.eta);
        v.resonance_tol = s.get<double>("resonance_tol", v.resonance_tol);
        v.eps_min = s.get<double>("eps_min", v.eps_min);
        v.band_limit = s.optional<Index3>("band_limit");
        const auto policy = s.get<std::string>("frequency_policy", "fixed");
        check(policy == "fixed" || policy == "self-consistent",
              s.where("frequency_policy") + ": expected fixed or self-consistent");
        v.frequency_policy = policy == "fixed" ? FrequencyPolicy::Fixed : FrequencyPolicy::SelfConsistent;
        check(positive(v.degeneracy_tol), s.where("degeneracy_tol") + ": must be > 0");
        check(!v.omega_tol || positive(*v.omega_tol), s.where("omega_tol") + ": must be > 0");
        check(std::isfinite(v.eta) && v.eta >= 0.0, s.where("eta") + ": must be >= 0");
        check(std::isfinite(v.resonance_tol) && v.resonance_tol >= 0.0, s.where("resonance_tol") + ": must be >= 0");
        check(positive(v.eps_min), s.where("eps_min") + ": must be > 0");
        check(!v.mode_count || (*v.mode_count >= 1 && *v.mode_count <= 2 * points - 2),
              s.where("mode_count") + ": must lie in [1, 2N-2]");
        s.done();
    }

    if (root.has("parameters"))
    {
        ObjectReader p(root.raw("parameters"), "$.parameters");
        const std::string e = c.experiment;
        if (e == "green-check")
        {
            c.green_check.frequencies = p.get<std::vector<double>>("frequencies", {});
            c.green_check.dense = p.optional<bool>("dense");
            for (double w : c.green_check.frequencies)
            {
                check(positive(w), p.where("frequencies") + ": entries must be > 0");
            }
        }
        else if (e == "born")
        {
            c.born.variant = p.get<std::string>("variant", c.born.variant);
            c.born.orders = p.get<int>("orders", c.born.orders);
            c.born.labels = p.get<std::vector<std::size_t>>("labels", {});
            c.born.mode_count = p.get<std::size_t>("mode_count", c.born.mode_count);
            check(c.born.variant == "G" || c.born.variant == "K" || c.born.variant == "both",
                  p.where("variant") + ": expected G, K or both");
            check(c.born.orders >= 0 && c.born.orders <= 100, p.where("orders") + ": must lie in [0, 100]");
        }
        else if (e == "gauge")
        {
            c.gauge.labels = p.get<std::vector<std::size_t>>("labels", {});
            c.gauge.mode_count = p.get<std::size_t>("mode_count", c.gauge.mode_count);
        }
        else if (e == "localfield")
        {
            c.localfield.eps = p.get<std::vector<double>>("eps", c.localfield.eps);
            for (double x : c.localfield.eps)
            {
                check(std::isfinite(x) && x >= 1.0, p.where("eps") + ": entries must be >= 1");
            }
        }
        else if (e == "couplings")
        {
            c.couplings.basis_sizes = p.get<std::vector<std::size_t>>("basis_sizes", {});
            c.couplings.write_matrix = p.get<bool>("write_matrix", false);
        }
        else if (e == "interface")
        {
            ObjectReader l(p.raw("epsilon_ii"), p.where("epsilon_ii"));
            check(l.get<std::string>("kind") == "layered", l.where("kind") + ": must be layered");
            c.interface.epsilon_ii = parse_layered(l);
            l.done();
            c.interface.labels = p.get<std::vector<std::size_t>>("labels", {});
        }
        p.done();
    }
    if (c.experiment == "interface" && c.interface.epsilon_ii.values.empty())
    {
        throw ConfigError("$.parameters.epsilon_ii: required for the interface experiment");
    }
    root.done();
    return c;
}

ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig &c)
{
    json j;
    j["experiment"] = c.experiment;
    j["output"] = c.output;
    j["geometry"] = {{"dims", c.dims}, {"lengths", c.lengths}};
    j["epsilon_i"] = profile_json(c.epsilon_i);
    json d = {{"seed", c.disorder.seed},
              {"rms", c.disorder.rms},
              {"correlation_lengths", c.disorder.correlation_lengths},
              {"region", nullptr}};
    if (c.disorder.region)
    {
        d["region"] = {{"lower", c.disorder.region->lower},
                       {"upper", c.disorder.region->upper},
                       {"edge_width", c.disorder.region->edge_width}};
    }
    j["disorder"] = d;
    j["solver"] = {{"mode_count", opt_json(c.solver.mode_count)},
                   {"degeneracy_tol", c.solver.degeneracy_tol},
                   {"omega_tol", opt_json(c.solver.omega_tol)},
                   {"eta", c.solver.eta},
                   {"resonance_tol", c.solver.resonance_tol},
                   {"frequency_policy", to_string(c.solver.frequency_policy)},
                   {"eps_min", c.solver.eps_min},
                   {"band_limit", opt_json(c.solver.band_limit)}};
    json p = json::object();
    const std::string &e = c.experiment;
    if (e == "green-check")
    {
        p = {{"frequencies", c.green_check.frequencies}, {"dense", opt_json(c.green_check.dense)}};
    }
    else if (e == "born")
    {
        p = {{"variant", c.born.variant},
             {"orders", c.born.orders},
             {"labels", c.born.labels},
             {"mode_count", c.born.mode_count}};
    }
    else if (e == "gauge")
    {
        p = {{"labels", c.gauge.labels}, {"mode_count", c.gauge.mode_count}};
    }
    else if (e == "localfield")
    {
        p = {{"eps", c.localfield.eps}};
    }
    else if (e == "couplings")
    {
        p = {{"basis_sizes", c.couplings.basis_sizes}, {"write_matrix", c.couplings.write_matrix}};
    }
    else if (e == "interface")
    {
        p = {{"epsilon_ii", layered_json(c.interface.epsilon_ii)}, {"labels", c.interface.labels}};
    }
    j["parameters"] = p;
    return j;
}

std::string sha256_hex(const std::string &bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    {
        throw Error("SHA-256 digest failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string config_hash(const ExperimentConfig &config)
{
    json j = to_json(config);
    j.erase("output");
    return sha256_hex(j.dump());
}

std::string mode_hash(const ExperimentConfig &config)
{
    const json j = {{"geometry", {{"dims", config.dims}, {"lengths", config.lengths}}},
                    {"epsilon_i", profile_json(config.epsilon_i)},
                    {"mode_count", opt_json(config.solver.mode_count)},
                    {"degeneracy_tol", config.solver.degeneracy_tol},
                    {"omega_tol", opt_json(config.solver.omega_tol)},
                    {"eps_min", config.solver.eps_min},
                    {"band_limit", opt_json(config.solver.band_limit)}};
    return sha256_hex(j.dump());
}

} // namespace epsmode::app
