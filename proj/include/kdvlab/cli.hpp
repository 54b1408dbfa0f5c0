#pragma once

// Scenario drivers behind the command-line tool. Each driver writes its CSV
// files into the output directory and records what goes into the manifest.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <fftw3.h>

#include "kdvlab/config.hpp"
#include "kdvlab/csv.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/error.hpp"
#include "kdvlab/interaction.hpp"
#include "kdvlab/nonlinearity.hpp"
#include "kdvlab/pde.hpp"
#include "kdvlab/profile.hpp"
#include "kdvlab/validation.hpp"

namespace kdv {

inline constexpr const char* version_string = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_schema = 2, exit_regime = 3, exit_numerical = 4 };

struct RunReport {
    std::string command;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::pair<std::string, double>> timings;  // seconds
};

class RunContext {
public:
    RunContext(std::filesystem::path out, bool verbose, std::ostream& log = std::cerr)
        : out_(std::move(out)), verbose_(verbose), log_(&log)
    {
        std::filesystem::create_directories(out_);
    }

    void write(RunReport& rep, const std::string& name, const CsvTable& t) const
    {
        t.write(out_ / name);
        rep.outputs.push_back(name);
        note("wrote " + name + " (" + std::to_string(t.rows()) + " rows)");
    }

    void note(const std::string& msg) const
    {
        if (verbose_) *log_ << "[kdvlab] " << msg << '\n';
    }

    template <class F>
    auto timed(RunReport& rep, const std::string& label, F&& f)
    {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rep.timings.emplace_back(label, s);
            note(label + ": " + format_number(s) + " s");
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    }

    [[nodiscard]] const std::filesystem::path& out() const { return out_; }

private:
    std::filesystem::path out_;
    bool verbose_;
    std::ostream* log_;
};

namespace detail {

inline std::string no_commas(std::string s)
{
    for (auto& ch : s)
        if (ch == ',' || ch == '\n') ch = ';';
    return s;
}

inline std::string amplitude_tag(std::size_t i) { return std::to_string(i); }

} // namespace detail

// ---------------------------------------------------------------------------

inline void run_validate_nl(const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    const auto report = validate_terms(cfg.terms, cfg.u_max);
    CsvTable checks({"check", "passed", "structural", "detail"});
    for (const auto& c : report.checks)
        checks.add_text_row({detail::no_commas(c.name), c.passed ? "1" : "0", c.structural ? "1" : "0",
                             detail::no_commas(c.detail)});
    ctx.write(rep, "admissibility.csv", checks);
    rep.summary.emplace_back("admissible", report.admissible() ? "true" : "false");
    rep.summary.emplace_back("delta1", format_number(report.delta1));
    rep.summary.emplace_back("delta2", format_number(report.delta2));
    if (!report.admissible()) throw ValidationError("inadmissible nonlinearity:\n" + report.summary());

    const auto nl = cfg.nonlinearity();
    CsvTable values({"u", "g1", "g1_prime", "g", "g_prime", "g2"});
    for (double u : num::linspace(0.0, cfg.u_max, 201)) {
        const auto d = nl.evaluate(u);
        values.add_row({u, d.g1, d.g1_prime, d.g, d.g_prime, d.g2});
    }
    ctx.write(rep, "derived.csv", values);
}

inline void run_profile(const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    const auto nl = cfg.nonlinearity();
    const ProfileGrid grid{cfg.profile.eta_max, cfg.profile.n_points};
    CsvTable mom({"amplitude", "speed", "beta", "a1", "a2", "a3", "a2_prime", "a_g", "a_gprime", "a_g2",
                  "identity_residual"});
    for (std::size_t i = 0; i < cfg.profile.amplitudes.size(); ++i) {
        const double a = cfg.profile.amplitudes[i];
        const auto p = ctx.timed(rep, "profile A=" + format_number(a), [&] { return solve_profile(nl, a, grid); });
        CsvTable t({"eta", "omega", "omega_prime"});
        for (std::size_t j = 0; j < p.eta().size(); ++j) t.add_row({p.eta()[j], p.omega()[j], p.omega_prime()[j]});
        ctx.write(rep, "profile_" + detail::amplitude_tag(i) + ".csv", t);
        const auto m = moments(nl, p);
        const auto id = identity_residuals(nl, a, m);
        mom.add_row({a, p.speed(), p.beta(), m.a1, m.a2, m.a3, m.a2_prime, m.a_g, m.a_gprime, m.a_g2,
                     id.max_relative()});
    }
    ctx.write(rep, "moments.csv", mom);
}

inline InteractionConfig interaction_config(const ExperimentConfig& cfg)
{
    InteractionConfig ic;
    ic.a1 = cfg.collision.a1;
    ic.a2 = cfg.collision.a2;
    ic.x1_0 = cfg.collision.x1_0;
    ic.x2_0 = cfg.collision.x2_0;
    ic.grid = ProfileGrid{cfg.profile.eta_max, cfg.profile.n_points};
    return ic;
}

inline void run_collide(const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    const auto nl = cfg.nonlinearity();
    const auto& c = cfg.collision;
    CollisionModel model(nl, interaction_config(cfg));
    for (const auto& w : model.warnings()) rep.warnings.push_back(w);
    for (const auto& w : rep.warnings) ctx.note("warning: " + w);

    SolveOptions opt;
    opt.tau_max = c.tau_max;
    opt.tau_step = c.tau_step;
    opt.sigma_step = c.sigma_step;
    const auto traj = ctx.timed(rep, "sigma dynamics", [&] { return solve_sigma(model, opt); });
    const auto sol = phase_corrections(model, traj);
    const auto& g = model.geometry();

    CsvTable tab({"sigma", "r0", "r1", "r21", "s1", "s2", "f", "F", "Q", "dQ", "forcing"});
    const auto& tb = traj.table;
    for (std::size_t k = 0; k < tb.sigma.size(); ++k)
        tab.add_row({tb.sigma[k], tb.r0[k], tb.r1[k], tb.r21[k], tb.s1[k], tb.s2[k], tb.f[k], tb.F[k], tb.Q[k],
                     tb.dQ[k], tb.forcing[k]});
    ctx.write(rep, "sigma_table.csv", tab);

    CsvTable fast({"tau", "sigma", "sigma_tilde", "s1", "s2", "phi11", "phi21"});
    for (std::size_t k = 0; k < sol.tau.size(); ++k)
        fast.add_row({sol.tau[k], sol.sigma[k], sol.sigma_tilde[k], sol.s1[k], sol.s2[k], sol.phi11[k], sol.phi21[k]});
    ctx.write(rep, "interaction.csv", fast);

    CsvTable sum({"quantity", "value"});
    const std::vector<std::pair<std::string, double>> items{
        {"theta", g.theta},           {"t_star", g.t_star},
        {"x_star", g.x_star},         {"psi_dot", g.psi_dot},
        {"v1", g.v1},                 {"v2", g.v2},
        {"phi11_inf", sol.phi11_inf}, {"phi21_inf", sol.phi21_inf},
        {"shift1", c.epsilon * sol.phi11_inf}, {"shift2", c.epsilon * sol.phi21_inf},
        {"sigma_tilde_minus", sol.sigma_tilde_minus}, {"sigma_tilde_plus", sol.sigma_tilde_plus},
        {"g1_at_zero", sol.g1_at_zero}, {"g2_at_zero", sol.g2_at_zero},
        {"max_eq1_residual", sol.max_eq1_residual}, {"max_eq2_residual", sol.max_eq2_residual},
        {"min_forcing", sol.min_forcing}, {"max_dQ", sol.max_dQ}};
    for (const auto& [k, v] : items) {
        sum.add_text_row({k, format_number(v)});
        rep.summary.emplace_back(k, format_number(v));
    }
    ctx.write(rep, "collision_summary.csv", sum);

    CsvTable snaps({"tau", "t", "x", "u"});
    for (double tau : c.snapshot_tau) {
        const double t = g.t_star + tau * c.epsilon / g.psi_dot;
        TwoSolitonAnsatz ans(model, sol, c.epsilon, true);
        const auto fr = ans.frame(t);
        for (std::size_t j = 0; j < c.n_points; ++j) {
            const double x = c.x0 + c.length * static_cast<double>(j) / static_cast<double>(c.n_points);
            snaps.add_row({tau, t, x, ans.value(fr, x)});
        }
    }
    ctx.write(rep, "ansatz.csv", snaps);
}

inline void run_simulate(const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    const auto nl = cfg.nonlinearity();
    const auto& s = cfg.simulate;
    const ProfileGrid grid{cfg.profile.eta_max, cfg.profile.n_points};
    WaveField init{s.x0, s.length, s.epsilon, 0.0, std::vector<double>(s.n_points, 0.0)};
    for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
        const auto p = solve_profile(nl, s.amplitudes[i], grid);
        const auto w = soliton_field(p, s.positions[i], s.epsilon, s.x0, s.length, s.n_points);
        for (std::size_t j = 0; j < s.n_points; ++j) init.u[j] += w.u[j];
    }
    SolverConfig sc;
    sc.scheme = s.scheme == "if_rk4" ? Scheme::if_rk4 : Scheme::etdrk4;
    sc.t_end = s.t_end;
    sc.courant = s.courant;
    sc.dt = s.dt;
    sc.snapshot_times = s.snapshots;
    const auto traj = ctx.timed(rep, "pde", [&] { return evolve(init, nl, sc); });

    CsvTable field({"t", "x", "u"});
    CsvTable inv({"t", "mass", "momentum", "relative_mass_drift"});
    CsvTable peaks({"t", "index", "position", "amplitude"});
    const double min_amp = 0.5 * *std::min_element(s.amplitudes.begin(), s.amplitudes.end());
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const auto& w = traj.snapshots[k];
        for (std::size_t j = 0; j < w.size(); ++j) field.add_row({w.t, w.x(j), w.u[j]});
        inv.add_row({w.t, traj.mass[k], traj.momentum[k], traj.mass[k] / traj.mass.front() - 1.0});
        const auto pk = extract_solitons(w, min_amp);
        for (std::size_t i = 0; i < pk.size(); ++i)
            peaks.add_row({w.t, static_cast<double>(i), pk[i].position, pk[i].amplitude});
    }
    ctx.write(rep, "field.csv", field);
    ctx.write(rep, "invariants.csv", inv);
    ctx.write(rep, "peaks.csv", peaks);
    rep.summary.emplace_back("dt", format_number(traj.dt));
    rep.summary.emplace_back("steps", std::to_string(traj.steps));
    rep.summary.emplace_back("max_undershoot", format_number(traj.max_undershoot));
}

inline void run_perturb(const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    const auto nl = cfg.nonlinearity();
    const auto& p = cfg.perturb;
    const auto force = LocalForce::logistic(p.mu, p.alpha);
    OnePhaseOptions opt;
    opt.t_end = p.t_end;
    opt.samples = p.samples;
    opt.grid = ProfileGrid{cfg.profile.eta_max, cfg.profile.n_points};
    const bool closed_form = nl.homogeneous_form() && nl.leading_exponent() == 0.5;

    CsvTable crit({"run", "a0", "estimate", "measured", "growth_rate", "final_amplitude"});
    for (std::size_t i = 0; i < p.amplitudes.size(); ++i) {
        const double a0 = p.amplitudes[i];
        const auto tr = ctx.timed(rep, "one-phase A0=" + format_number(a0),
                                  [&] { return evolve_one_phase(nl, force, a0, p.phi0, opt); });
        std::optional<LogisticLaw> law;
        if (closed_form) law = logistic_reference(a0, p.mu, p.alpha, nl, opt.grid);
        CsvTable t({"t", "amplitude", "beta", "speed", "phi", "f_bar", "amplitude_law"});
        for (std::size_t k = 0; k < tr.t.size(); ++k)
            t.add_row({tr.t[k], tr.amplitude[k], tr.beta[k], tr.beta[k] * tr.beta[k], tr.phi[k], tr.f_bar[k],
                       law ? (*law)(tr.t[k]) : std::numeric_limits<double>::quiet_NaN()});
        ctx.write(rep, "trajectory_" + detail::amplitude_tag(i) + ".csv", t);
        if (law && i == 0) rep.summary.emplace_back("a_star", format_number(law->a_star));

        double measured = std::numeric_limits<double>::quiet_NaN(), rate = 0.0;
        if (p.tail) {
            const double phi_end = tr.phi.back();
            auto xs = num::linspace(tr.phi.front(), phi_end, p.tail_points + 1);
            xs.erase(xs.begin());
            TailOptions to;
            to.time_samples = p.tail_time_samples;
            to.epsilon = p.epsilon;
            const auto tail = ctx.timed(rep, "tail A0=" + format_number(a0), [&] { return solve_tail(nl, force, tr, xs, to); });
            CsvTable tt({"t", "max_tail"});
            const auto mx = tail.max_profile();
            for (std::size_t k = 0; k < tail.t.size(); ++k) tt.add_row({tail.t[k], mx[k]});
            ctx.write(rep, "tail_" + detail::amplitude_tag(i) + ".csv", tt);
            const auto ct = critical_time(p.epsilon, p.mu, p.alpha, tr, tail);
            measured = ct.measured;
            rate = ct.growth_rate;
        }
        const double estimate = p.epsilon * p.mu < 1.0 ? critical_time_estimate(p.epsilon, p.mu, p.alpha)
                                                       : std::numeric_limits<double>::quiet_NaN();
        crit.add_row({static_cast<double>(i), a0, estimate, measured, rate, tr.amplitude.back()});
    }
    ctx.write(rep, "critical_time.csv", crit);
}

inline void run_validate(const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    const auto& v = cfg.validate;

    // moment identities over seeded random nonlinearities
    std::mt19937_64 rng(cfg.seed);
    CsvTable ids({"sample", "amplitude", "max_relative_residual"});
    double worst = 0.0;
    ctx.timed(rep, "moment identities", [&] {
        for (std::size_t s = 0; s < v.identity_samples; ++s) {
            const auto nl = random_power_sum(rng);
            for (double a : {0.5, 1.0, 5.0, 50.0}) {
                const double r = identity_residuals(nl, a, moments(nl, solve_profile(nl, a))).max_relative();
                worst = std::max(worst, r);
                ids.add_row({static_cast<double>(s), a, r});
            }
        }
    });
    ctx.write(rep, "identities.csv", ids);
    rep.summary.emplace_back("identity_worst", format_number(worst));

    const auto nl = cfg.nonlinearity();
    CollisionModel model(nl, interaction_config(cfg));
    for (const auto& w : model.warnings()) rep.warnings.push_back(w);
    const auto sol = ctx.timed(rep, "interaction", [&] { return solve_interaction(model); });
    const auto psis = collision_test_functions(model.geometry().x_star, v.test_scale);

    std::vector<WeakResidualReport> res;
    std::vector<BalanceReport> bal;
    CsvTable rt({"epsilon", "psi", "max_linear", "max_quadratic"});
    CsvTable bt({"epsilon", "law", "max_drift", "scale"});
    for (double eps : v.epsilons) {
        const auto fam = ansatz_family(model, sol, eps);
        const auto tg = interaction_time_grid(model, eps, v.time_points, v.half_window);
        ctx.timed(rep, "residuals eps=" + format_number(eps), [&] {
            res.push_back(weak_residual(fam, nl, psis, tg));
            bal.push_back(balance_laws(fam, nl, tg));
        });
        for (std::size_t j = 0; j < psis.size(); ++j)
            rt.add_row({eps, static_cast<double>(j), res.back().max_linear[j], res.back().max_quadratic[j]});
        for (std::size_t l = 0; l < bal.back().max_drift.size(); ++l)
            bt.add_row({eps, static_cast<double>(l), bal.back().max_drift[l], bal.back().scale[l]});
    }
    ctx.write(rep, "residuals.csv", rt);
    ctx.write(rep, "balance.csv", bt);

    const auto of = residual_orders(res);
    const auto bo = balance_orders(bal);
    CsvTable ot({"quantity", "index", "order"});
    for (std::size_t j = 0; j < psis.size(); ++j) {
        ot.add_text_row({"linear", std::to_string(j), format_number(of.linear[j])});
        ot.add_text_row({"quadratic", std::to_string(j), format_number(of.quadratic[j])});
    }
    for (std::size_t l = 0; l < bo.size(); ++l) ot.add_text_row({"law", std::to_string(l), format_number(bo[l])});
    ctx.write(rep, "orders.csv", ot);
}

// ---------------------------------------------------------------------------

inline std::string fftw_version_string()
{
    std::string s = fftw_version;
    return s;
}

/// Writes manifest.json: inputs, versions, outputs, warnings, summary and timings.
inline void write_manifest(const RunContext& ctx, const ExperimentConfig& cfg, const RunReport& rep,
                           const std::string& config_path, int status, const std::string& error = {})
{
    namespace pt = boost::property_tree;
    pt::ptree root;
    root.put("command", rep.command);
    root.put("status", status);
    if (!error.empty()) root.put("error", error);
    root.put("config", config_path);
    root.put("seed", cfg.seed);
    pt::ptree inputs;
    for (const auto& [k, v] : cfg.raw) inputs.put(pt::ptree::path_type(k, '/'), v);
    root.add_child("inputs", inputs);
    root.put("versions.kdvlab", version_string);
    root.put("versions.boost", BOOST_LIB_VERSION);
    root.put("versions.fftw", fftw_version_string());
#if defined(__VERSION__)
    root.put("versions.compiler", __VERSION__);
#endif
    pt::ptree outs, warns, sums, times;
    for (const auto& o : rep.outputs) outs.push_back({"", pt::ptree(o)});
    for (const auto& w : rep.warnings) warns.push_back({"", pt::ptree(w)});
    for (const auto& [k, v] : rep.summary) sums.put(pt::ptree::path_type(k, '/'), v);
    for (const auto& [k, v] : rep.timings) times.put(pt::ptree::path_type(k, '/'), format_number(v));
    root.add_child("outputs", outs);
    root.add_child("warnings", warns);
    root.add_child("summary", sums);
    root.add_child("timings_seconds", times);
    pt::write_json((ctx.out() / "manifest.json").string(), root);
}

/// Maps library exceptions to exit codes.
inline int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const RegimeError*>(&e)) return exit_regime;
    if (dynamic_cast<const ValidationError*>(&e)) return exit_schema;
    if (dynamic_cast<const NumericalError*>(&e)) return exit_numerical;
    return exit_numerical;
}

/// Runs one command; rep keeps whatever was produced if an exception escapes.
inline void run_scenario(const std::string& command, const ExperimentConfig& cfg, RunContext& ctx, RunReport& rep)
{
    rep.command = command;
    if (command == "validate-nl") return run_validate_nl(cfg, ctx, rep);
    if (command == "profile") return run_profile(cfg, ctx, rep);
    if (command == "collide") return run_collide(cfg, ctx, rep);
    if (command == "simulate") return run_simulate(cfg, ctx, rep);
    if (command == "perturb") return run_perturb(cfg, ctx, rep);
    if (command == "validate") return run_validate(cfg, ctx, rep);
    throw SchemaError("unknown command '" + command + "'");
}

} // namespace kdv
