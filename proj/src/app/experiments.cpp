#include "epsmode/app/experiments.hpp"

#include "epsmode/app/cache.hpp"
#include "epsmode/app/output.hpp"
#include "epsmode/born.hpp"
#include "epsmode/gauge.hpp"
#include "epsmode/localfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

namespace epsmode::app
{

namespace fs = std::filesystem;
using nlohmann::json;

unsigned resolve_threads(std::optional<unsigned> flag)
{
    if (flag && *flag > 0)
    {
        return *flag;
    }
    if (const char *env = std::getenv("EPSMODE_THREADS"))
    {
        try
        {
            const long n = std::stol(env);
            if (n > 0)
            {
                return static_cast<unsigned>(n);
            }
        }
        catch (const std::exception &)
        {
        }
    }
    return 1;
}

namespace
{

/// Runs task(i) for i in [0, count) on up to `threads` workers; the first
/// failure in index order is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &task)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++)
        {
            try
            {
                task(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool)
    {
        t.join();
    }
    for (auto &e : errors)
    {
        if (e)
        {
            std::rethrow_exception(e);
        }
    }
}

std::int64_t as_int(std::size_t x)
{
    return static_cast<std::int64_t>(x);
}

struct Context
{
    const ExperimentConfig &config;
    const RunOptions &options;
    Grid grid;
    fs::path dir;
    json metrics = json::object();
    std::vector<std::string> artifacts;

    void table(const std::string &name, const CsvTable &t)
    {
        t.write(dir / name);
        artifacts.push_back(name);
    }

    DielectricProfile eps_i() const { return build_profile(grid, config.epsilon_i, config.profile_options()); }

    DielectricProfile eps_ii(const DielectricProfile &base) const
    {
        return config.disorder.rms > 0.0 ? generate_disorder(base, config.disorder) : base;
    }

    ModeSolverOptions solver(bool full) const
    {
        ModeSolverOptions o;
        if (!full)
        {
            o.count = config.solver.mode_count;
        }
        o.degeneracy_tol = config.solver.degeneracy_tol;
        o.omega_tol = config.solver.omega_tol;
        return o;
    }
};

double worst_or_zero(const std::vector<double> &v)
{
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

void run_modes(Context &ctx)
{
    const auto eps = ctx.eps_i();
    const ModeSet modes = obtain_modes(ctx.config, eps, ctx.options);
    const auto &f = modes.matrix();
    const auto n3 = f.rows();
    Eigen::MatrixXcd bf(n3, f.cols());
    std::vector<double> transverse(modes.size()), eigen_res(modes.size());
    parallel_for(modes.size(), ctx.options.threads, [&](std::size_t l) {
        const VectorField fl = modes.field(l);
        const VectorField b = eps.multiply(fl);
        bf.col(static_cast<Eigen::Index>(l)) = Eigen::Map<const Eigen::VectorXcd>(b.data().data(), n3);
        transverse[l] = transversality_residual(fl, eps);
        const double w2 = modes.omega(l) * modes.omega(l);
        eigen_res[l] = norm(curl(curl(fl)) - w2 * b) / (w2 * norm(b));
    });
    const Eigen::MatrixXcd gram = ctx.grid.cell_volume() * (f.adjoint() * bf);
    const double gram_error =
        (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();

    CsvTable t({"label", "omega", "cluster_size", "transversality", "eigen_residual", "norm_error"});
    for (std::size_t l = 0; l < modes.size(); ++l)
    {
        const auto li = static_cast<Eigen::Index>(l);
        t.add({as_int(l), modes.omega(l), as_int(modes.cluster(l).size()), transverse[l], eigen_res[l],
               std::abs(gram(li, li) - 1.0)});
    }
    ctx.table("modes.csv", t);
    ctx.metrics = {{"count", modes.size()},
                   {"complete", modes.complete()},
                   {"expected_transverse_count", 2 * ctx.grid.size() - 2},
                   {"max_gram_error", gram_error},
                   {"max_transversality", worst_or_zero(transverse)},
                   {"max_eigen_residual", worst_or_zero(eigen_res)},
                   {"lowest_omega", modes.size() ? modes.omega(0) : 0.0},
                   {"cache", (fs::path(ctx.config.output) / "cache" / "modes_i.epsm").string()}};
}

std::vector<double> default_frequencies(const ModeSet &modes)
{
    std::vector<double> distinct;
    for (double w : modes.omegas())
    {
        if (distinct.empty() || w > distinct.back() * (1.0 + 1e-6))
        {
            distinct.push_back(w);
        }
        if (distinct.size() == 4)
        {
            break;
        }
    }
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
    {
        out.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    }
    if (out.empty() && !distinct.empty())
    {
        out.push_back(0.5 * distinct.front());
    }
    return out;
}

void run_green_check(Context &ctx)
{
    const auto eps = ctx.eps_i();
    const ModeSet modes = obtain_modes(ctx.config, eps, ctx.options);
    if (!modes.complete())
    {
        throw InvalidArgument("green-check needs the complete mode set (solver.mode_count unset)");
    }
    const auto freqs =
        ctx.config.green_check.frequencies.empty() ? default_frequencies(modes) : ctx.config.green_check.frequencies;
    const bool dense = ctx.config.green_check.dense.value_or(3 * ctx.grid.size() <= 3000);
    const auto probes = probe_fields(ctx.grid);

    std::vector<std::array<double, 3>> rows(freqs.size());
    parallel_for(freqs.size(), ctx.options.threads, [&](std::size_t i) {
        const double w = freqs[i];
        KernelOptions ko;
        ko.eta = ctx.config.solver.eta;
        ko.resonance_tol = ctx.config.solver.resonance_tol;
        const SpectralKernel k(modes, KernelKind::Reduced, w, ko);
        const SpectralKernel g(modes, KernelKind::Full, w, ko);
        double div = 0.0, direct = std::numeric_limits<double>::quiet_NaN();
        if (dense)
        {
            direct = 0.0;
        }
        for (std::size_t p = 0; p < probes.size(); ++p)
        {
            const auto &v = probes[p];
            div = std::max(div, norm(divergence(k.apply(v), eps.profile())) / norm(v));
            if (dense && p < 8)
            {
                direct = std::max(direct, norm(g.apply(v) - direct_inverse_apply(eps, w, v)) / norm(v));
            }
        }
        rows[i] = {kernel_identity_residual(modes, w), div, direct};
    });

    CsvTable t({"omega", "identity_residual", "k_divergence", "direct_residual"});
    double worst_identity = 0.0, worst_div = 0.0, worst_direct = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i)
    {
        t.add({freqs[i], rows[i][0], rows[i][1], rows[i][2]});
        worst_identity = std::max(worst_identity, rows[i][0]);
        worst_div = std::max(worst_div, rows[i][1]);
        if (dense)
        {
            worst_direct = std::max(worst_direct, rows[i][2]);
        }
    }
    ctx.table("green_check.csv", t);
    ctx.metrics = {{"frequencies", freqs},
                   {"max_identity_residual", worst_identity},
                   {"max_k_divergence", worst_div},
                   {"dense_oracle", dense},
                   {"max_direct_residual", dense ? json(worst_direct) : json(nullptr)}};
}

void run_born(Context &ctx)
{
    const auto eps = ctx.eps_i();
    const ModeSet modes = obtain_modes(ctx.config, eps, ctx.options);
    const auto eps2 = ctx.eps_ii(eps);
    const auto &p = ctx.config.born;
    const auto labels = p.labels.empty() ? lowest_nondegenerate(modes, p.mode_count) : p.labels;
    std::vector<BornVariant> variants;
    if (p.variant != "K")
    {
        variants.push_back(BornVariant::GBased);
    }
    if (p.variant != "G")
    {
        variants.push_back(BornVariant::KBased);
    }
    BornOptions bo;
    bo.policy = ctx.config.solver.frequency_policy;
    bo.degeneracy_tol = ctx.config.solver.degeneracy_tol;
    bo.resonance_tol = ctx.config.solver.resonance_tol;

    const std::size_t jobs = variants.size() * labels.size();
    std::vector<std::optional<BornTrace>> traces(jobs);
    parallel_for(jobs, ctx.options.threads, [&](std::size_t j) {
        traces[j] = born_series(variants[j / labels.size()], modes, eps2, labels[j % labels.size()], p.orders, bo);
    });

    CsvTable t({"variant", "label", "order", "omega", "transversality", "change_norm", "ls_residual"});
    double k_worst = 0.0;
    double g_least = std::numeric_limits<double>::infinity();
    for (const auto &trace : traces)
    {
        for (const auto &o : trace->orders)
        {
            t.add({std::string(to_string(trace->variant)), as_int(trace->label), std::int64_t{o.order}, o.omega,
                   o.transversality, o.change_norm, o.ls_residual});
            if (trace->variant == BornVariant::KBased)
            {
                k_worst = std::max(k_worst, o.transversality);
            }
            else if (o.order <= 1)
            {
                g_least = std::min(g_least, o.transversality);
            }
        }
    }
    ctx.table("born.csv", t);
    ctx.metrics = {{"labels", labels},
                   {"orders", p.orders},
                   {"frequency_policy", to_string(bo.policy)},
                   {"k_max_transversality", k_worst},
                   {"g_min_transversality_orders_0_1", std::isfinite(g_least) ? json(g_least) : json(nullptr)}};
}

void run_gauge(Context &ctx)
{
    const auto eps = ctx.eps_i();
    const ModeSet modes = obtain_modes(ctx.config, eps, ctx.options);
    const auto eps2 = ctx.eps_ii(eps);
    const ModeSet modes2 = solve_modes(eps2, ctx.solver(true));
    const auto &p = ctx.config.gauge;
    std::vector<std::size_t> labels = p.labels;
    if (p.labels.empty())
    {
        labels.resize(std::min(p.mode_count, modes.size()));
        for (std::size_t l = 0; l < labels.size(); ++l)
        {
            labels[l] = l;
        }
    }
    std::vector<std::array<double, 7>> rows(labels.size());
    parallel_for(labels.size(), ctx.options.threads, [&](std::size_t i) {
        const std::size_t l = labels.at(i);
        if (l >= modes.size())
        {
            throw InvalidArgument("gauge label out of range");
        }
        const VectorField f = modes.field(l);
        const GaugeTerm term = gauge_gradient(modes2, eps, f, modes.omega(l), l);
        const FieldProfiles prof = assemble_field_profiles(f, term, eps2);
        const double gn = norm(term.gradient_field);
        rows[i] = {modes.omega(l),
                   verify_gauge_condition(eps2, f, term),
                   verify_gauge_condition(eps2, f, zero_gauge(f, modes.omega(l), l)),
                   gn,
                   gn > 0.0 ? prof.curl_gauge / gn : 0.0,
                   gn > 0.0 ? norm(regradient(term) - term.gradient_field) / gn : 0.0,
                   prof.divergence_d};
    });
    CsvTable t({"label", "omega", "gauge_condition", "control_condition", "gradient_norm", "curl_relative",
                "regradient_relative", "divergence_d"});
    double worst = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        const auto &r = rows[i];
        t.add({as_int(labels[i]), r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
        worst = std::max(worst, r[1]);
    }
    ctx.table("gauge.csv", t);
    ctx.metrics = {{"labels", labels}, {"max_gauge_condition", worst}};
}

void run_localfield(Context &ctx)
{
    CsvTable t({"eps", "L", "emission", "route", "iterations", "solved_linearly"});
    double worst = 0.0;
    for (double e : ctx.config.localfield.eps)
    {
        for (auto route : {LocalFieldRoute::Closed, LocalFieldRoute::FixedPointG, LocalFieldRoute::FixedPointK})
        {
            const auto r = local_field_factor(e, route);
            t.add({e, r.l, r.emission, std::string(to_string(route)), std::int64_t{r.iterations},
                   std::int64_t{r.solved_linearly ? 1 : 0}});
            worst = std::max(worst, std::abs(r.l - 3.0 * e / (2.0 * e + 1.0)));
        }
    }
    ctx.table("localfield.csv", t);
    ctx.metrics = {{"max_route_deviation", worst}};
}

void run_couplings(Context &ctx)
{
    const auto eps = ctx.eps_i();
    const ModeSet modes = obtain_modes(ctx.config, eps, ctx.options);
    const auto eps2 = ctx.eps_ii(eps);
    const ModeSet modes2 = solve_modes(eps2, ctx.solver(true));
    auto sizes = ctx.config.couplings.basis_sizes;
    if (sizes.empty())
    {
        const std::size_t n = modes.size();
        sizes = {n, 3 * n / 4, n / 2, n / 4};
    }
    std::vector<std::optional<CouplingMatrix>> results(sizes.size());
    parallel_for(sizes.size(), ctx.options.threads,
                 [&](std::size_t i) { results[i] = coupling_matrix(modes, modes2, sizes[i]); });
    CsvTable t({"basis_size", "max_residual", "mean_residual", "gram_condition", "truncated"});
    for (const auto &r : results)
    {
        double mean = 0.0;
        for (double x : r->row_residuals)
        {
            mean += x / static_cast<double>(r->row_residuals.size());
        }
        t.add({as_int(r->basis_size), r->max_residual, mean, r->gram_condition,
               std::int64_t{r->truncated ? 1 : 0}});
    }
    ctx.table("couplings.csv", t);
    const auto &full = *results.front();
    if (ctx.config.couplings.write_matrix)
    {
        CsvTable m({"row", "column", "re", "im"});
        for (Eigen::Index r = 0; r < full.c.rows(); ++r)
        {
            for (Eigen::Index c = 0; c < full.c.cols(); ++c)
            {
                m.add({std::int64_t{r}, std::int64_t{c}, full.c(r, c).real(), full.c(r, c).imag()});
            }
        }
        ctx.table("coupling_matrix.csv", m);
    }
    ctx.metrics = {{"basis_size", full.basis_size},
                   {"max_residual", full.max_residual},
                   {"gram_condition", full.gram_condition},
                   {"max_divergence", full.max_divergence}};
}

void run_interface(Context &ctx)
{
    const auto eps = ctx.eps_i();
    const ModeSet modes = obtain_modes(ctx.config, eps, ctx.options);
    const auto eps2 = build_profile(ctx.grid, ctx.config.interface.epsilon_ii, ctx.config.profile_options());
    auto labels = ctx.config.interface.labels;
    if (labels.empty())
    {
        for (std::size_t l = 0; l < std::min<std::size_t>(8, modes.size()); ++l)
        {
            labels.push_back(l);
        }
    }
    std::vector<std::optional<InterfaceReport>> reports(labels.size());
    parallel_for(labels.size(), ctx.options.threads,
                 [&](std::size_t i) { reports[i] = interface_continuity_report(eps2, modes, labels[i]); });
    CsvTable t({"label", "position", "g_tangential_e", "k_tangential_e", "g_normal_d", "k_normal_d",
                "unperturbed_normal_d", "d_identity_residual"});
    double identity = 0.0;
    for (const auto &r : reports)
    {
        identity = std::max(identity, r->d_identity_residual);
        for (const auto &row : r->rows)
        {
            t.add({as_int(r->label), row.position, row.g_tangential_e, row.k_tangential_e, row.g_normal_d,
                   row.k_normal_d, row.unperturbed_normal_d, r->d_identity_residual});
        }
    }
    ctx.table("interface.csv", t);
    ctx.metrics = {{"labels", labels}, {"max_d_identity_residual", identity}};
}

void run_report(Context &ctx)
{
    const fs::path root(ctx.config.output);
    std::vector<std::string> names;
    if (fs::is_directory(root))
    {
        for (const auto &entry : fs::directory_iterator(root))
        {
            if (entry.is_directory() && entry.path().filename() != "report" &&
                fs::exists(entry.path() / "summary.json"))
            {
                names.push_back(entry.path().filename().string());
            }
        }
    }
    std::sort(names.begin(), names.end());
    json all = json::object();
    CsvTable t({"experiment", "metric", "value"});
    for (const auto &name : names)
    {
        std::ifstream in(root / name / "summary.json");
        json s;
        try
        {
            s = json::parse(in);
        }
        catch (const json::exception &e)
        {
            throw Error("unreadable summary for '" + name + "': " + e.what());
        }
        const json metrics = s.value("metrics", json::object());
        for (const auto &[key, value] : metrics.items())
        {
            if (value.is_number())
            {
                t.add({name, key, value.get<double>()});
            }
            else if (value.is_boolean())
            {
                t.add({name, key, std::int64_t{value.get<bool>() ? 1 : 0}});
            }
        }
        all[name] = {{"config_hash", s.value("config_hash", "")}, {"metrics", metrics}};
    }
    ctx.table("report.csv", t);
    ctx.metrics = {{"experiments", names}, {"summaries", all}};
}

} // namespace

ModeSet obtain_modes(const ExperimentConfig &config, const DielectricProfile &eps, const RunOptions &options)
{
    const fs::path path = fs::path(config.output) / "cache" / "modes_i.epsm";
    const std::string hash = mode_hash(config);
    if (fs::exists(path))
    {
        return load_mode_cache(path, eps, hash, options.force);
    }
    ModeSolverOptions o;
    o.count = config.solver.mode_count;
    o.degeneracy_tol = config.solver.degeneracy_tol;
    o.omega_tol = config.solver.omega_tol;
    ModeSet modes = solve_modes(eps, o);
    save_mode_cache(modes, path, hash);
    return modes;
}

json run_experiment(const ExperimentConfig &config, const RunOptions &options)
{
    Context ctx{config, options, config.grid(), fs::path(config.output) / config.experiment, {}, {}};
    fs::create_directories(ctx.dir);
    const json effective = to_json(config);
    write_json(ctx.dir / "effective_config.json", effective);

    const std::string &e = config.experiment;
    if (e == "modes")
    {
        run_modes(ctx);
    }
    else if (e == "green-check")
    {
        run_green_check(ctx);
    }
    else if (e == "born")
    {
        run_born(ctx);
    }
    else if (e == "gauge")
    {
        run_gauge(ctx);
    }
    else if (e == "localfield")
    {
        run_localfield(ctx);
    }
    else if (e == "couplings")
    {
        run_couplings(ctx);
    }
    else if (e == "interface")
    {
        run_interface(ctx);
    }
    else if (e == "report")
    {
        run_report(ctx);
    }
    else
    {
        throw ConfigError("unknown experiment '" + e + "'");
    }

    ctx.artifacts.push_back("effective_config.json");
    const json summary = {{"experiment", e},
                          {"config_hash", config_hash(config)},
                          {"mode_hash", mode_hash(config)},
                          {"generated", utc_timestamp()},
                          {"effective_config", effective},
                          {"metrics", ctx.metrics},
                          {"artifacts", ctx.artifacts}};
    write_json(ctx.dir / "summary.json", summary);
    return summary;
}

} // namespace epsmode::app
