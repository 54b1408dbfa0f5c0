#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kdvlab/error.hpp"
#include "kdvlab/nonlinearity.hpp"

namespace kdv {

/// Malformed or out-of-range configuration.
class SchemaError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class Scenario { profile, collide, simulate, perturb, validate };

inline const char* scenario_name(Scenario s)
{
    switch (s) {
    case Scenario::profile: return "profile";
    case Scenario::collide: return "collide";
    case Scenario::simulate: return "simulate";
    case Scenario::perturb: return "perturb";
    case Scenario::validate: return "validate";
    }
    return "?";
}

struct ProfileSection {
    std::vector<double> amplitudes{1.0};
    double eta_max = 40.0;
    std::size_t n_points = 4097;
};

struct CollisionSection {
    double a1 = 1.0, a2 = 10.0;
    double x1_0 = 1.0, x2_0 = 0.0;
    double tau_max = 0.0;
    double tau_step = 0.05;
    double sigma_step = 0.05;
    double epsilon = 0.05;            // for the ansatz snapshots
    std::vector<double> snapshot_tau{-10.0, 0.0, 10.0};
    double length = 20.0, x0 = -5.0;
    std::size_t n_points = 2048;
};

struct SimulateSection {
    std::vector<double> amplitudes{1.0};
    std::vector<double> positions{0.0};
    double epsilon = 0.05;
    double length = 20.0, x0 = -10.0;
    std::size_t n_points = 4096;
    double t_end = 1.0;
    std::vector<double> snapshots;
    std::string scheme = "etdrk4";
    double courant = 0.3;
    double dt = 0.0;
};

struct PerturbSection {
    double mu = 0.2, alpha = 1.0;
    std::vector<double> amplitudes{4.0, 2.0, 1.0, 0.5, 0.25};
    double phi0 = 0.0;
    double t_end = 10.0;
    std::size_t samples = 1001;
    double epsilon = 0.05;
    bool tail = true;
    std::size_t tail_points = 200;
    std::size_t tail_time_samples = 401;
};

struct ValidateSection {
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    double test_scale = 10.0;
    std::size_t time_points = 41;
    double half_window = 10.0;
    std::size_t identity_samples = 20;  // seeded random nonlinearities for the moment identities
};

struct ExperimentConfig {
    Scenario scenario = Scenario::profile;
    bool scenario_given = false;  // run.scenario present in the file
    std::vector<PowerTerm> terms{{1.0 / 3.0, 1.0}};
    double u_max = 100.0;
    std::uint64_t seed = 1;
    ProfileSection profile;
    CollisionSection collision;
    SimulateSection simulate;
    PerturbSection perturb;
    ValidateSection validate;
    std::vector<std::pair<std::string, std::string>> raw;  // section.key = value, in file order

    [[nodiscard]] Nonlinearity nonlinearity() const { return Nonlinearity::power_sum(terms, u_max); }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string::npos ? std::string::npos : p - start)));
        if (p == std::string::npos) break;
        start = p + 1;
    }
    return out;
}

/// A decimal number or a ratio "a/b".
inline double parse_number(const std::string& text, const std::string& key)
{
    const auto t = trim(text);
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
        const double num = parse_number(t.substr(0, slash), key);
        const double den = parse_number(t.substr(slash + 1), key);
        if (den == 0.0) throw SchemaError(key + ": zero denominator in '" + t + "'");
        return num / den;
    }
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw SchemaError(key + ": '" + t + "' is not a number");
    return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(parse_number(item, key));
    return out;
}

inline std::size_t parse_count(const std::string& text, const std::string& key)
{
    const double v = parse_number(text, key);
    if (v < 0.0 || v != std::floor(v) || v > 1e9) throw SchemaError(key + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& text, const std::string& key)
{
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw SchemaError(key + ": expected true or false");
}

/// "c:q, c:q" pairs describing g1(z) = sum c z^q.
inline std::vector<PowerTerm> parse_terms(const std::string& text)
{
    std::vector<PowerTerm> out;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw SchemaError("nonlinearity.terms: expected coefficient:exponent, got '" + item + "'");
        out.push_back({parse_number(parts[0], "nonlinearity.terms"), parse_number(parts[1], "nonlinearity.terms")});
    }
    return out;
}

inline Scenario parse_scenario(const std::string& s)
{
    for (auto sc : {Scenario::profile, Scenario::collide, Scenario::simulate, Scenario::perturb, Scenario::validate})
        if (s == scenario_name(sc)) return sc;
    throw SchemaError("run.scenario: unknown scenario '" + s + "'");
}

inline void positive(double v, const std::string& key)
{
    if (!(v > 0.0)) throw SchemaError(key + ": must be positive");
}

} // namespace detail

/// Range and consistency checks that need no computation. The nonlinearity
/// check can be skipped by callers that report admissibility themselves.
inline void check_schema(const ExperimentConfig& c, bool check_nonlinearity = true)
{
    using detail::positive;
    if (check_nonlinearity) {
        const auto rep = validate_terms(c.terms, c.u_max);
        if (!rep.admissible()) throw SchemaError("nonlinearity: " + rep.summary());
    }

    if (c.profile.amplitudes.empty()) throw SchemaError("profile.amplitudes: empty list");
    for (double a : c.profile.amplitudes) positive(a, "profile.amplitudes");
    positive(c.profile.eta_max, "profile.eta_max");
    if (c.profile.n_points < 17 || c.profile.n_points % 2 == 0)
        throw SchemaError("profile.n_points: must be odd and at least 17");

    const auto& k = c.collision;
    positive(k.a1, "collision.a1");
    if (!(k.a2 > k.a1)) throw SchemaError("collision: a2 must exceed a1");
    if (!(k.x1_0 > k.x2_0)) throw SchemaError("collision: x1_0 must exceed x2_0");
    if (k.tau_max < 0.0) throw SchemaError("collision.tau_max: must be non-negative");
    positive(k.tau_step, "collision.tau_step");
    positive(k.sigma_step, "collision.sigma_step");
    positive(k.epsilon, "collision.epsilon");
    positive(k.length, "collision.length");
    if (k.n_points < 16) throw SchemaError("collision.n_points: at least 16");

    const auto& s = c.simulate;
    if (s.amplitudes.empty() || s.amplitudes.size() != s.positions.size())
        throw SchemaError("simulate: amplitudes and positions must be non-empty lists of equal length");
    for (double a : s.amplitudes) positive(a, "simulate.amplitudes");
    positive(s.epsilon, "simulate.epsilon");
    positive(s.length, "simulate.length");
    positive(s.t_end, "simulate.t_end");
    positive(s.courant, "simulate.courant");
    if (s.dt < 0.0) throw SchemaError("simulate.dt: must be non-negative");
    if (s.scheme != "etdrk4" && s.scheme != "if_rk4") throw SchemaError("simulate.scheme: etdrk4 or if_rk4");
    for (double t : s.snapshots)
        if (t < 0.0 || t > s.t_end) throw SchemaError("simulate.snapshots: times must lie in [0, t_end]");

    const auto& p = c.perturb;
    positive(p.mu, "perturb.mu");
    positive(p.alpha, "perturb.alpha");
    if (p.amplitudes.empty()) throw SchemaError("perturb.amplitudes: empty list");
    for (double a : p.amplitudes) positive(a, "perturb.amplitudes");
    positive(p.t_end, "perturb.t_end");
    positive(p.epsilon, "perturb.epsilon");
    if (p.samples < 9) throw SchemaError("perturb.samples: at least 9");
    if (p.tail && (p.tail_points < 2 || p.tail_time_samples < 2))
        throw SchemaError("perturb: tail_points and tail_time_samples must be at least 2");

    const auto& v = c.validate;
    if (v.epsilons.size() < 3) throw SchemaError("validate.epsilons: at least three values for an order fit");
    for (double e : v.epsilons) positive(e, "validate.epsilons");
    positive(v.test_scale, "validate.test_scale");
    positive(v.half_window, "validate.half_window");
    if (v.time_points < 2) throw SchemaError("validate.time_points: at least 2");
}

/// Parses an INI document; unknown sections or keys are schema errors.
inline ExperimentConfig parse_config(std::istream& is, bool check_nonlinearity = true)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }

    ExperimentConfig c;
    using namespace detail;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw SchemaError("config: key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            const std::string name = section + "." + key;
            const std::string val = trim(node.data());
            c.raw.emplace_back(name, val);
            if (name == "run.scenario") {
                c.scenario = parse_scenario(val);
                c.scenario_given = true;
            } else if (name == "run.seed") {
                c.seed = parse_count(val, name);
            } else if (name == "nonlinearity.terms") {
                c.terms = parse_terms(val);
            } else if (name == "nonlinearity.u_max") {
                c.u_max = parse_number(val, name);
            } else if (name == "profile.amplitudes") {
                c.profile.amplitudes = parse_list(val, name);
            } else if (name == "profile.eta_max") {
                c.profile.eta_max = parse_number(val, name);
            } else if (name == "profile.n_points") {
                c.profile.n_points = parse_count(val, name);
            } else if (name == "collision.a1") {
                c.collision.a1 = parse_number(val, name);
            } else if (name == "collision.a2") {
                c.collision.a2 = parse_number(val, name);
            } else if (name == "collision.x1_0") {
                c.collision.x1_0 = parse_number(val, name);
            } else if (name == "collision.x2_0") {
                c.collision.x2_0 = parse_number(val, name);
            } else if (name == "collision.tau_max") {
                c.collision.tau_max = parse_number(val, name);
            } else if (name == "collision.tau_step") {
                c.collision.tau_step = parse_number(val, name);
            } else if (name == "collision.sigma_step") {
                c.collision.sigma_step = parse_number(val, name);
            } else if (name == "collision.epsilon") {
                c.collision.epsilon = parse_number(val, name);
            } else if (name == "collision.snapshot_tau") {
                c.collision.snapshot_tau = parse_list(val, name);
            } else if (name == "collision.length") {
                c.collision.length = parse_number(val, name);
            } else if (name == "collision.x0") {
                c.collision.x0 = parse_number(val, name);
            } else if (name == "collision.n_points") {
                c.collision.n_points = parse_count(val, name);
            } else if (name == "simulate.amplitudes") {
                c.simulate.amplitudes = parse_list(val, name);
            } else if (name == "simulate.positions") {
                c.simulate.positions = parse_list(val, name);
            } else if (name == "simulate.epsilon") {
                c.simulate.epsilon = parse_number(val, name);
            } else if (name == "simulate.length") {
                c.simulate.length = parse_number(val, name);
            } else if (name == "simulate.x0") {
                c.simulate.x0 = parse_number(val, name);
            } else if (name == "simulate.n_points") {
                c.simulate.n_points = parse_count(val, name);
            } else if (name == "simulate.t_end") {
                c.simulate.t_end = parse_number(val, name);
            } else if (name == "simulate.snapshots") {
                c.simulate.snapshots = parse_list(val, name);
            } else if (name == "simulate.scheme") {
                c.simulate.scheme = val;
            } else if (name == "simulate.courant") {
                c.simulate.courant = parse_number(val, name);
            } else if (name == "simulate.dt") {
                c.simulate.dt = parse_number(val, name);
            } else if (name == "perturb.mu") {
                c.perturb.mu = parse_number(val, name);
            } else if (name == "perturb.alpha") {
                c.perturb.alpha = parse_number(val, name);
            } else if (name == "perturb.amplitudes") {
                c.perturb.amplitudes = parse_list(val, name);
            } else if (name == "perturb.phi0") {
                c.perturb.phi0 = parse_number(val, name);
            } else if (name == "perturb.t_end") {
                c.perturb.t_end = parse_number(val, name);
            } else if (name == "perturb.samples") {
                c.perturb.samples = parse_count(val, name);
            } else if (name == "perturb.epsilon") {
                c.perturb.epsilon = parse_number(val, name);
            } else if (name == "perturb.tail") {
                c.perturb.tail = parse_bool(val, name);
            } else if (name == "perturb.tail_points") {
                c.perturb.tail_points = parse_count(val, name);
            } else if (name == "perturb.tail_time_samples") {
                c.perturb.tail_time_samples = parse_count(val, name);
            } else if (name == "validate.epsilons") {
                c.validate.epsilons = parse_list(val, name);
            } else if (name == "validate.test_scale") {
                c.validate.test_scale = parse_number(val, name);
            } else if (name == "validate.time_points") {
                c.validate.time_points = parse_count(val, name);
            } else if (name == "validate.half_window") {
                c.validate.half_window = parse_number(val, name);
            } else if (name == "validate.identity_samples") {
                c.validate.identity_samples = parse_count(val, name);
            } else {
                throw SchemaError("config: unknown key '" + name + "'");
            }
        }
    }
    check_schema(c, check_nonlinearity);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, bool check_nonlinearity = true)
{
    std::ifstream is(path);
    if (!is) throw SchemaError("config: cannot open " + path.string());
    return parse_config(is, check_nonlinearity);
}

} // namespace kdv
