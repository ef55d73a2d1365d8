// Proper scoring rules, Bregman divergences, V-shaped rules, and the
// decomposition of a smooth Bregman divergence into V-Bregman components.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "cdl/format.hpp"

namespace cdl {

inline constexpr double kReportMergeTol = 1e-12;

// Scores s(q, theta) on a finite ordered report set, binary states.
// Proper iff for all q, q': q*s(q,1) + (1-q)*s(q,0) >= q*s(q',1) + (1-q)*s(q',0).
struct TabularScoringRule {
    std::vector<double> reports;               // sorted ascending, distinct
    std::vector<std::array<double, 2>> scores; // scores[j] = {s(q_j,0), s(q_j,1)}

    int index_of(double q) const {
        for (std::size_t j = 0; j < reports.size(); ++j)
            if (std::fabs(reports[j] - q) <= kReportMergeTol) return static_cast<int>(j);
        return -1;
    }

    double score(double q, int theta) const {
        int j = index_of(q);
        if (j < 0) throw std::domain_error("report value not in rule's report set");
        return scores[static_cast<std::size_t>(j)][static_cast<std::size_t>(theta)];
    }

    // Expected score under belief Pr[theta=1] = belief when reporting `report`.
    double expected_score(double belief, double report) const {
        int j = index_of(report);
        if (j < 0) throw std::domain_error("report value not in rule's report set");
        const auto& s = scores[static_cast<std::size_t>(j)];
        return belief * s[1] + (1.0 - belief) * s[0];
    }

    bool is_proper(double tol = 1e-9) const {
        for (std::size_t a = 0; a < reports.size(); ++a)
            for (std::size_t b = 0; b < reports.size(); ++b) {
                double own = reports[a] * scores[a][1] + (1.0 - reports[a]) * scores[a][0];
                double other = reports[a] * scores[b][1] + (1.0 - reports[a]) * scores[b][0];
                if (own < other - tol) return false;
            }
        return true;
    }

    bool scores_in_unit_range(double tol = 1e-9) const {
        for (const auto& s : scores)
            if (s[0] < -tol || s[0] > 1.0 + tol || s[1] < -tol || s[1] > 1.0 + tol)
                return false;
        return true;
    }
};

// Two-action decision task with threshold mu; induces the V-Bregman divergence.
struct VShapedRule {
    double kink = 0.5;
};

// Convex u on [0,1] given as (value, derivative, second derivative) evaluators.
// Valid when u'' >= 0 and the induced scores stay bounded (|u'| <= 1 at 0, 1).
struct SmoothConvexRule {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::function<double(double)> second;
};

// S_mu(p, theta). The branch switches at p = mu, with p >= mu taking the
// upper branch (the sub-gradient convention); for mu > 1/2 this is the
// mirror image S_{1-mu}(1-p, 1-theta) of the mu <= 1/2 rule.
inline double score_v(const VShapedRule& rule, double p, int theta) {
    double mu = rule.kink;
    double scale = std::max(mu, 1.0 - mu);
    double delta = (theta - mu) / (2.0 * scale);
    return p >= mu ? 0.5 + delta : 0.5 - delta;
}

// VBreg_mu(q, qhat): zero when q and qhat sit on the same side of the kink,
// else |qhat - mu| / max(1-mu, mu). "Same side" uses q < mu with qhat <= mu,
// or q >= mu with qhat >= mu.
inline double vbreg(double mu, double q, double qhat) {
    bool below = q < mu && qhat <= mu;
    bool above = q >= mu && qhat >= mu;
    if (below || above) return 0.0;
    return std::fabs(qhat - mu) / std::max(mu, 1.0 - mu);
}

// Breg(q, qhat) = u(qhat) - u(q) + u'(q)(q - qhat), the payoff loss of
// reporting q when the conditional distribution is qhat.
inline double breg(const SmoothConvexRule& rule, double q, double qhat) {
    return rule.value(qhat) - rule.value(q) + rule.deriv(q) * (q - qhat);
}

inline double breg(const VShapedRule& rule, double q, double qhat) {
    return vbreg(rule.kink, q, qhat);
}

// Tabular form: Breg_S(q, qhat) = E_{theta~qhat}[S(qhat,theta) - S(q,theta)].
inline double breg(const TabularScoringRule& rule, double q, double qhat) {
    return rule.expected_score(qhat, qhat) - rule.expected_score(qhat, q);
}

struct DecomposeResult {
    double lhs = 0.0;  // Breg(q, qhat) from the evaluators
    double rhs = 0.0;  // integral of u''(mu) * max(1-mu,mu) * VBreg_mu(q,qhat)
};

// Checks the identity Breg(q,qhat) = int u''(mu) max(1-mu,mu) VBreg_mu(q,qhat) dmu.
// The integrand vanishes outside the interval between q and qhat, so the
// composite midpoint rule runs over that interval only (open formula: the
// integrand jumps at the endpoints).
inline DecomposeResult decompose_check(const SmoothConvexRule& rule, double q,
                                       double qhat, long quadrature_nodes) {
    if (quadrature_nodes <= 0) throw std::invalid_argument("quadrature_nodes must be positive");
    DecomposeResult res;
    res.lhs = breg(rule, q, qhat);
    double lo = std::min(q, qhat), hi = std::max(q, qhat);
    if (hi - lo <= 0.0) { res.rhs = 0.0; return res; }
    double h = (hi - lo) / static_cast<double>(quadrature_nodes);
    double sum = 0.0;
    for (long j = 0; j < quadrature_nodes; ++j) {
        double mu = lo + (static_cast<double>(j) + 0.5) * h;
        double dd = rule.second(mu);
        if (dd < -1e-12) throw std::invalid_argument("u is not convex (u'' < 0)");
        sum += dd * std::max(mu, 1.0 - mu) * vbreg(mu, q, qhat);
    }
    res.rhs = sum * h;
    return res;
}

// Tabulates S_mu on the given report values.
inline TabularScoringRule v_rule_as_tabular(double mu, std::vector<double> reports) {
    std::sort(reports.begin(), reports.end());
    reports.erase(std::unique(reports.begin(), reports.end(),
                              [](double a, double b) { return std::fabs(a - b) <= kReportMergeTol; }),
                  reports.end());
    VShapedRule rule{mu};
    TabularScoringRule tab;
    tab.reports = std::move(reports);
    tab.scores.reserve(tab.reports.size());
    for (double r : tab.reports)
        tab.scores.push_back({score_v(rule, r, 0), score_v(rule, r, 1)});
    return tab;
}

// Quadratic scoring rule S_2(p, theta) = 1 - (p - theta)^2 on a grid.
inline TabularScoringRule quadratic_rule_on(std::vector<double> reports) {
    std::sort(reports.begin(), reports.end());
    reports.erase(std::unique(reports.begin(), reports.end(),
                              [](double a, double b) { return std::fabs(a - b) <= kReportMergeTol; }),
                  reports.end());
    TabularScoringRule tab;
    tab.reports = std::move(reports);
    tab.scores.reserve(tab.reports.size());
    for (double r : tab.reports)
        tab.scores.push_back({1.0 - r * r, 1.0 - (r - 1.0) * (r - 1.0)});
    return tab;
}

// JSON schema: {reports:[...], scores:{"<q>":[s0, s1]}}.
inline nlohmann::json to_json(const TabularScoringRule& rule) {
    nlohmann::json scores = nlohmann::json::object();
    for (std::size_t j = 0; j < rule.reports.size(); ++j)
        scores[detail::format_double(rule.reports[j])] = {rule.scores[j][0], rule.scores[j][1]};
    return nlohmann::json{{"reports", rule.reports}, {"scores", std::move(scores)}};
}

}  // namespace cdl
