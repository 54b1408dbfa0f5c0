#pragma once

// Nonlinearities of the form g(u) = u^2 g1(u) with a power-sum factor
// g1(z) = sum_k c_k z^{q_k}, 0 < q_1 < ... < q_n < 4.

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kdvlab/error.hpp"

namespace kdv {

struct PowerTerm {
    double coefficient = 0.0;
    double exponent = 0.0;
};

/// g1, g1', g, g', g2 = g - u g' at one point.
struct DerivedValues {
    double g1 = 0.0;
    double g1_prime = 0.0;
    double g = 0.0;
    double g_prime = 0.0;
    double g2 = 0.0;
};

struct AdmissibilityCheck {
    std::string name;
    bool passed = false;
    bool structural = true; // false: report-only (growth envelope)
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCheck> checks;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double growth_lower_min = 0.0;  // min over grid of g'(u)/u^{1+delta1}
    double growth_upper_max = 0.0;  // max over grid of g'(u)/u^{5-delta2}

    /// True when every structural condition holds (the growth envelope is informational).
    [[nodiscard]] bool admissible() const
    {
        for (const auto& c : checks)
            if (c.structural && !c.passed) return false;
        return !checks.empty();
    }

    [[nodiscard]] std::string summary() const
    {
        std::ostringstream os;
        for (const auto& c : checks)
            os << (c.passed ? "PASS " : "FAIL ") << c.name << (c.structural ? "" : " (report-only)")
               << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
        return os.str();
    }
};

namespace detail {

/// z^q with multiplication chains for small integer and half-integer exponents.
inline double fast_pow(double z, double q)
{
    const double q2 = 2.0 * q;
    if (q2 == std::floor(q2) && q2 >= 0.0 && q2 <= 16.0) {
        const int n = static_cast<int>(q2);
        double r = (n % 2 == 1) ? std::sqrt(z) : 1.0;
        double b = z;
        for (int e = n / 2; e > 0; e >>= 1) {
            if (e & 1) r *= b;
            b *= b;
        }
        return r;
    }
    return std::pow(z, q);
}

inline double term_power(double z, double q)
{
    return z > 0.0 ? fast_pow(z, q) : 0.0;
}

/// 1024 log-spaced samples over (0, u_max].
inline std::vector<double> validation_grid(double u_max)
{
    constexpr std::size_t n = 1024;
    std::vector<double> u(n);
    const double lo = std::log(u_max) - 8.0 * std::log(10.0);
    const double hi = std::log(u_max);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    u.back() = u_max;
    return u;
}

} // namespace detail

class Nonlinearity;
AdmissibilityReport validate_terms(const std::vector<PowerTerm>& terms, double u_max);

class Nonlinearity {
public:
    /// Validated power-sum nonlinearity; throws ValidationError listing failed conditions.
    static Nonlinearity power_sum(std::vector<PowerTerm> terms, double u_max)
    {
        auto report = validate_terms(terms, u_max);
        if (!report.admissible()) throw ValidationError("inadmissible nonlinearity:\n" + report.summary());
        return Nonlinearity(std::move(terms), u_max);
    }

    /// g'(u) = u^kappa, i.e. g1(u) = u^{kappa-1}/(kappa+1).
    static Nonlinearity homogeneous(double kappa, double u_max = 100.0)
    {
        require(kappa > 1.0 && kappa < 5.0, "homogeneous nonlinearity needs 1 < kappa < 5");
        return power_sum({{1.0 / (kappa + 1.0), kappa - 1.0}}, u_max);
    }

    [[nodiscard]] const std::vector<PowerTerm>& terms() const { return terms_; }
    [[nodiscard]] double u_max() const { return u_max_; }
    /// Single-term g1: profile and moments do not depend on the amplitude.
    [[nodiscard]] bool homogeneous_form() const { return terms_.size() == 1; }
    [[nodiscard]] double leading_exponent() const { return terms_.back().exponent; }
    [[nodiscard]] double leading_coefficient() const { return terms_.back().coefficient; }

    [[nodiscard]] double g1(double u) const
    {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coefficient * detail::term_power(u, t.exponent);
        return s;
    }

    [[nodiscard]] double g1_prime(double u) const
    {
        if (u <= 0.0) return 0.0;
        double s = 0.0;
        for (const auto& t : terms_) s += t.coefficient * t.exponent * std::pow(u, t.exponent - 1.0);
        return s;
    }

    [[nodiscard]] double g(double u) const
    {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coefficient * detail::term_power(u, t.exponent + 2.0);
        return s;
    }

    /// g'(u) = 2u g1 + u^2 g1'. Negative arguments are clamped to zero.
    [[nodiscard]] double g_prime(double u) const
    {
        double s = 0.0;
        for (const auto& t : terms_)
            s += t.coefficient * (t.exponent + 2.0) * detail::term_power(u, t.exponent + 1.0);
        return s;
    }

    [[nodiscard]] double g_second(double u) const
    {
        double s = 0.0;
        for (const auto& t : terms_)
            s += t.coefficient * (t.exponent + 2.0) * (t.exponent + 1.0) * detail::term_power(u, t.exponent);
        return s;
    }

    /// g2 = g - u g' = -u^2 (g1 + u g1').
    [[nodiscard]] double g2(double u) const
    {
        double s = 0.0;
        for (const auto& t : terms_)
            s -= t.coefficient * (t.exponent + 1.0) * detail::term_power(u, t.exponent + 2.0);
        return s;
    }

    [[nodiscard]] DerivedValues evaluate(double u) const
    {
        require(u >= 0.0, "nonlinearity evaluated at negative u");
        if (u == 0.0) return {};
        return {g1(u), g1_prime(u), g(u), g_prime(u), g2(u)};
    }

    /// 1 - g1(A z)/g1(A) given log z, evaluated term by term so that the
    /// cancellation near z = 1 stays relative.
    [[nodiscard]] double ratio_gap(double amplitude, double log_z) const
    {
        double num = 0.0, den = 0.0;
        for (const auto& t : terms_) {
            const double w = t.coefficient * std::pow(amplitude, t.exponent);
            den += w;
            num += -w * std::expm1(t.exponent * log_z);
        }
        return num / den;
    }

    /// A g1'(A)/g1(A): curvature of the gap at z = 1, gap ~ slope * (1 - z).
    [[nodiscard]] double gap_slope(double amplitude) const
    {
        return amplitude * g1_prime(amplitude) / g1(amplitude);
    }

private:
    Nonlinearity(std::vector<PowerTerm> terms, double u_max) : terms_(std::move(terms)), u_max_(u_max) {}

    std::vector<PowerTerm> terms_;
    double u_max_ = 0.0;
};

inline AdmissibilityReport validate_terms(const std::vector<PowerTerm>& terms, double u_max)
{
    AdmissibilityReport rep;
    auto add = [&](std::string name, bool ok, std::string detail, bool structural = true) {
        rep.checks.push_back({std::move(name), ok, structural, std::move(detail)});
    };

    const bool nonempty = !terms.empty();
    add("nonempty terms", nonempty, nonempty ? "" : "no (coefficient, exponent) pairs");
    const bool range_ok = std::isfinite(u_max) && u_max > 0.0;
    add("u_max > 0", range_ok, range_ok ? "" : "validation range must be positive");
    if (!nonempty || !range_ok) return rep;

    bool ordered = terms.front().exponent > 0.0 && terms.back().exponent < 4.0;
    std::string why;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (!std::isfinite(terms[k].coefficient) || !std::isfinite(terms[k].exponent)) {
            ordered = false;
            why = "non-finite term";
        }
        if (k > 0 && !(terms[k].exponent > terms[k - 1].exponent)) {
            ordered = false;
            why = "exponents not strictly increasing at term " + std::to_string(k);
        }
    }
    if (terms.front().exponent <= 0.0) why = "q_1 must be positive";
    if (terms.back().exponent >= 4.0) why = "q_n must be below 4";
    add("exponent ordering 0 < q_1 < ... < q_n < 4", ordered, why);

    rep.delta1 = terms.front().exponent;
    rep.delta2 = 4.0 - terms.back().exponent;

    // Pointwise checks work on the raw terms; build a throwaway evaluator.
    auto g1 = [&](double u) {
        double s = 0.0;
        for (const auto& t : terms) s += t.coefficient * std::pow(u, t.exponent);
        return s;
    };
    auto g1p = [&](double u) {
        double s = 0.0;
        for (const auto& t : terms) s += t.coefficient * t.exponent * std::pow(u, t.exponent - 1.0);
        return s;
    };
    auto gp = [&](double u) {
        double s = 0.0;
        for (const auto& t : terms) s += t.coefficient * (t.exponent + 2.0) * std::pow(u, t.exponent + 1.0);
        return s;
    };

    const auto grid = detail::validation_grid(u_max);
    bool pos = true, mono = true;
    double fail_pos = 0.0, fail_mono = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double u : grid) {
        if (!(g1(u) > 0.0) && pos) {
            pos = false;
            fail_pos = u;
        }
        if (!(g1p(u) > 0.0) && mono) {
            mono = false;
            fail_mono = u;
        }
        lo = std::min(lo, gp(u) / std::pow(u, 1.0 + rep.delta1));
        hi = std::max(hi, gp(u) / std::pow(u, 5.0 - rep.delta2));
    }
    add("g1(u) > 0 on validation grid", pos, pos ? "" : "fails at u = " + std::to_string(fail_pos));
    add("g1'(u) > 0 on validation grid", mono, mono ? "" : "fails at u = " + std::to_string(fail_mono));

    rep.growth_lower_min = lo;
    rep.growth_upper_max = hi;
    {
        std::ostringstream os;
        os << "delta1=" << rep.delta1 << " min g'/u^(1+delta1)=" << lo;
        add("growth lower bound c1 u^(1+delta1) <= g'(u)", lo > 0.0 && std::isfinite(lo), os.str(), false);
    }
    {
        std::ostringstream os;
        os << "delta2=" << rep.delta2 << " max g'/u^(5-delta2)=" << hi;
        add("growth upper bound g'(u) <= c2 u^(5-delta2)", std::isfinite(hi) && hi < 1e12, os.str(), false);
    }
    return rep;
}

inline AdmissibilityReport validate(const Nonlinearity& nl)
{
    return validate_terms(nl.terms(), nl.u_max());
}

/// Speed and inverse width of the solitary wave of amplitude A: V = 2 g1(A), beta = sqrt(V).
struct SpeedWidth {
    double speed = 0.0;
    double beta = 0.0;
};

inline SpeedWidth speed_and_width(const Nonlinearity& nl, double amplitude)
{
    require(amplitude > 0.0, "amplitude must be positive");
    const double v = 2.0 * nl.g1(amplitude);
    return {v, std::sqrt(v)};
}

} // namespace kdv
