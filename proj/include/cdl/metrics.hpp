// Calibration error metrics: ECE, l2, smooth calibration (LP), the CDL
// family (CFDL / VCDL / CDL via LP), U-calibration, and the bucket-wise
// deviation statistic with its attribution bound.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdl/lp.hpp"
#include "cdl/scoring.hpp"
#include "cdl/transcript.hpp"

namespace cdl {

// ECE = (1/T) sum_i n_i |q_i - qhat_i| = (1/T) sum_i G_i.
inline double ece(const BucketProfile& prof) {
    double sum = 0.0;
    for (int i = 1; i <= prof.size(); ++i) sum += prof.bias(i);
    return sum / static_cast<double>(prof.total);
}

// l2 = (1/T) sum_i n_i (q_i - qhat_i)^2.
inline double l2cal(const BucketProfile& prof) {
    double sum = 0.0;
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        double d = prof.q(i) - prof.qhat(i);
        sum += static_cast<double>(prof.count(i)) * d * d;
    }
    return sum / static_cast<double>(prof.total);
}

struct SmcalResult {
    double value = 0.0;
    std::vector<double> points;  // distinct prediction values, sorted
    std::vector<double> sigma;   // optimal 1-Lipschitz weights at the points
};

// smCal = sup over 1-Lipschitz sigma: [0,1] -> [-1,1] of
// (1/T) sum_t sigma(p_t)(p_t - theta_t). Any assignment at the distinct
// prediction values that is [-1,1]-bounded and Lipschitz across adjacent
// points extends piecewise-linearly to a 1-Lipschitz function, so the
// finite LP below computes the supremum exactly.
inline SmcalResult smcal_detail(const Transcript& t) {
    std::map<double, double> bias;  // value -> sum of (v - theta)
    for (std::size_t r = 0; r < t.size(); ++r)
        bias[t.predictions[r]] += t.predictions[r] - t.states[r];

    SmcalResult res;
    std::vector<double> b;
    for (const auto& [v, g] : bias) {
        res.points.push_back(v);
        b.push_back(g);
    }
    const std::size_t J = res.points.size();

    LinearProgram lp;
    lp.objective = b;
    lp.lower.assign(J, -1.0);
    lp.upper.assign(J, 1.0);
    for (std::size_t j = 0; j + 1 < J; ++j) {
        double gap = res.points[j + 1] - res.points[j];
        std::vector<double> row(J, 0.0);
        row[j] = -1.0;
        row[j + 1] = 1.0;
        lp.rows.push_back(row);
        lp.rhs.push_back(gap);
        for (auto& v : row) v = -v;
        lp.rows.push_back(std::move(row));
        lp.rhs.push_back(gap);
    }
    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("smcal: LP did not reach optimality");
    // sigma = 0 is feasible, so the supremum is nonnegative
    res.value = std::max(0.0, sol.value / static_cast<double>(t.size()));
    res.sigma = std::move(sol.x);
    return res;
}

inline double smcal(const Transcript& t) { return smcal_detail(t).value; }

// Upper bound on the distance to calibration: distCal <= sqrt(32 * smCal).
inline double distcal_upper(const Transcript& t) {
    return std::sqrt(32.0 * smcal(t));
}

// CFDL_S = (1/T) sum_i n_i Breg_S(q_i, qhat_i).
inline double cfdl(const BucketProfile& prof, const TabularScoringRule& rule) {
    double sum = 0.0;
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        sum += static_cast<double>(prof.count(i)) * breg(rule, prof.q(i), prof.qhat(i));
    }
    return sum / static_cast<double>(prof.total);
}

// CFDL_mu = (1/T) sum_i n_i VBreg_mu(q_i, qhat_i).
inline double cfdl_v(const BucketProfile& prof, double mu) {
    double sum = 0.0;
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        sum += static_cast<double>(prof.count(i)) * vbreg(mu, prof.q(i), prof.qhat(i));
    }
    return sum / static_cast<double>(prof.total);
}

struct VcdlResult {
    double value = 0.0;
    double kink = 0.0;      // maximizing mu (nudged off the breakpoint when
                            // the supremum is a one-sided limit)
    bool attained = true;
};

namespace metrics_detail {

// One-sided / pointwise CFDL_mu at breakpoint b. side < 0 evaluates the
// limit from below, side > 0 from above, side == 0 the value at b itself.
inline double cfdl_v_at(const BucketProfile& prof, double b, int side) {
    double scale = std::max(b, 1.0 - b);
    double sum = 0.0;
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        double q = prof.q(i), qh = prof.qhat(i);
        bool active;
        if (side > 0) active = (q > b && qh <= b) || (q <= b && qh > b);
        else if (side < 0) active = (q >= b && qh < b) || (q < b && qh >= b);
        else active = (q >= b && qh < b) || (q < b && qh > b);
        if (active) sum += static_cast<double>(prof.count(i)) * std::fabs(qh - b) / scale;
    }
    return sum / static_cast<double>(prof.total);
}

}  // namespace metrics_detail

// VCDL = sup_mu CFDL_mu. On each open cell between breakpoints
// {q_i} U {qhat_i} U {1/2} the active set is fixed and CFDL_mu is a ratio
// of linear functions, hence monotone, so the supremum over the cell is a
// one-sided limit at a breakpoint. All breakpoints and both limits are
// enumerated; the supremum may be unattained, in which case the reported
// kink approaches the breakpoint from the maximizing side.
inline VcdlResult vcdl(const BucketProfile& prof) {
    std::vector<double> brk = {0.0, 0.5, 1.0};
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        brk.push_back(prof.q(i));
        brk.push_back(prof.qhat(i));
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    VcdlResult best;
    best.value = -1.0;
    for (double b : brk) {
        struct Cand { int side; bool attained; };
        for (Cand c : {Cand{0, true}, Cand{-1, false}, Cand{+1, false}}) {
            double v = metrics_detail::cfdl_v_at(prof, b, c.side);
            bool better = v > best.value + 1e-15 ||
                          (v > best.value - 1e-15 && c.attained && !best.attained);
            if (!better) continue;
            best.value = v;
            best.attained = c.attained;
            best.kink = std::clamp(b + c.side * 1e-13, 0.0, 1.0);
        }
    }
    if (best.value < 0.0) best.value = 0.0;
    return best;
}

enum class PropernessConstraints { Adjacent, AllPairs };

// Report set for the CDL / UCal linear programs:
// {q_i : n_i > 0} U {qhat_i : n_i > 0} U {0, 1}, plus any extras,
// deduplicated at 1e-12 to keep the LP nondegenerate.
inline std::vector<double> cdl_report_set(const BucketProfile& prof,
                                          const std::vector<double>& extra = {}) {
    std::vector<double> pts = {0.0, 1.0};
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        pts.push_back(prof.q(i));
        pts.push_back(prof.qhat(i));
    }
    pts.insert(pts.end(), extra.begin(), extra.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::fabs(a - b) <= kReportMergeTol; }),
              pts.end());
    return pts;
}

namespace metrics_detail {

inline int report_index(const std::vector<double>& reports, double q) {
    auto it = std::lower_bound(reports.begin(), reports.end(), q - kReportMergeTol);
    if (it != reports.end() && std::fabs(*it - q) <= kReportMergeTol)
        return static_cast<int>(it - reports.begin());
    throw std::logic_error("report value missing from LP report set");
}

// Variables s_{q,theta} in [0,1], indexed var(j,theta) = 2j + theta.
// Properness rows: belief r_a prefers reporting r_a over r_b. For reports
// on a line with binary states the expected score is affine in the belief,
// so adjacent-pair constraints already imply every ordered pair; AllPairs
// emits the full quadratic family for cross-checking.
inline LinearProgram scoring_rule_lp(const std::vector<double>& reports,
                                     PropernessConstraints mode) {
    const std::size_t K = reports.size();
    LinearProgram lp;
    lp.objective.assign(2 * K, 0.0);
    lp.lower.assign(2 * K, 0.0);
    lp.upper.assign(2 * K, 1.0);

    auto add_pair = [&](std::size_t a, std::size_t b) {
        std::vector<double> row(2 * K, 0.0);
        double r = reports[a];
        row[2 * b + 1] += r;
        row[2 * b + 0] += 1.0 - r;
        row[2 * a + 1] -= r;
        row[2 * a + 0] -= 1.0 - r;
        lp.rows.push_back(std::move(row));
        lp.rhs.push_back(0.0);
    };
    if (mode == PropernessConstraints::AllPairs) {
        for (std::size_t a = 0; a < K; ++a)
            for (std::size_t b = 0; b < K; ++b)
                if (a != b) add_pair(a, b);
    } else {
        for (std::size_t j = 0; j + 1 < K; ++j) {
            add_pair(j, j + 1);
            add_pair(j + 1, j);
        }
    }
    return lp;
}

inline TabularScoringRule rule_from_solution(const std::vector<double>& reports,
                                             const std::vector<double>& x) {
    TabularScoringRule rule;
    rule.reports = reports;
    rule.scores.resize(reports.size());
    for (std::size_t j = 0; j < reports.size(); ++j) {
        rule.scores[j][0] = std::clamp(x[2 * j + 0], 0.0, 1.0);
        rule.scores[j][1] = std::clamp(x[2 * j + 1], 0.0, 1.0);
    }
    return rule;
}

}  // namespace metrics_detail

struct CdlResult {
    double value = 0.0;
    TabularScoringRule witness;
};

// CDL = max over [0,1]-bounded proper scoring rules of
// (1/T) sum_i n_i [ qhat_i (s_{qhat_i,1} - s_{q_i,1})
//                 + (1 - qhat_i)(s_{qhat_i,0} - s_{q_i,0}) ].
inline CdlResult cdl(const BucketProfile& prof,
                     PropernessConstraints mode = PropernessConstraints::Adjacent) {
    std::vector<double> reports = cdl_report_set(prof);
    LinearProgram lp = metrics_detail::scoring_rule_lp(reports, mode);
    double T = static_cast<double>(prof.total);
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        double w = static_cast<double>(prof.count(i)) / T;
        double qh = prof.qhat(i);
        int jh = metrics_detail::report_index(reports, qh);
        int jq = metrics_detail::report_index(reports, prof.q(i));
        lp.objective[2 * jh + 1] += w * qh;
        lp.objective[2 * jh + 0] += w * (1.0 - qh);
        lp.objective[2 * jq + 1] -= w * qh;
        lp.objective[2 * jq + 0] -= w * (1.0 - qh);
    }
    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("cdl: LP did not reach optimality");
    return CdlResult{sol.value, metrics_detail::rule_from_solution(reports, sol.x)};
}

// UCal = max over bounded proper scoring rules of the external regret of
// best-responding to the predictions instead of the overall mean pbar,
// clamped at zero (the all-zero rule achieves zero).
inline double ucal(const BucketProfile& prof, double overall_mean,
                   PropernessConstraints mode = PropernessConstraints::Adjacent) {
    std::vector<double> reports = cdl_report_set(prof, {overall_mean});
    LinearProgram lp = metrics_detail::scoring_rule_lp(reports, mode);
    double T = static_cast<double>(prof.total);
    int jbar = metrics_detail::report_index(reports, overall_mean);
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        double w = static_cast<double>(prof.count(i)) / T;
        double qh = prof.qhat(i);
        int jq = metrics_detail::report_index(reports, prof.q(i));
        lp.objective[2 * jbar + 1] += w * qh;
        lp.objective[2 * jbar + 0] += w * (1.0 - qh);
        lp.objective[2 * jq + 1] -= w * qh;
        lp.objective[2 * jq + 0] -= w * (1.0 - qh);
    }
    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("ucal: LP did not reach optimality");
    return std::max(0.0, sol.value);
}

inline double overall_mean(const BucketProfile& prof) {
    long long ones = 0;
    for (long long o : prof.ones) ones += o;
    return static_cast<double>(ones) / static_cast<double>(prof.total);
}

// D = max_i [G_i - alpha sqrt(n_i) - beta n_i]_+.
inline double deviation_stat(const BucketProfile& prof, double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0)
        throw std::invalid_argument("deviation_stat: alpha, beta must be >= 0");
    double best = 0.0;
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        double n = static_cast<double>(prof.count(i));
        double v = prof.bias(i) - alpha * std::sqrt(n) - beta * n;
        best = std::max(best, v);
    }
    return best;
}

// Bucket-wise attribution bound: CFDL_mu <= (2/T) sum_i (G_i - n_i|q_i - mu|)_+.
inline double attribute_bound(const BucketProfile& prof, double mu) {
    double sum = 0.0;
    for (int i = 1; i <= prof.size(); ++i) {
        if (prof.empty(i)) continue;
        double hinge = prof.bias(i) -
                       static_cast<double>(prof.count(i)) * std::fabs(prof.q(i) - mu);
        if (hinge > 0.0) sum += hinge;
    }
    return 2.0 * sum / static_cast<double>(prof.total);
}

// ---- metric report -----------------------------------------------------

struct MetricSelection {
    bool ece = true, l2 = true, smcal = true, vcdl = true, cdl = true, ucal = true;

    static MetricSelection parse(const std::string& csv) {
        MetricSelection sel{false, false, false, false, false, false};
        std::size_t start = 0;
        while (start <= csv.size()) {
            std::size_t comma = csv.find(',', start);
            std::string name = csv.substr(start, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - start);
            if (name == "ece") sel.ece = true;
            else if (name == "l2") sel.l2 = true;
            else if (name == "smcal") sel.smcal = true;
            else if (name == "vcdl") sel.vcdl = true;
            else if (name == "cdl") sel.cdl = true;
            else if (name == "ucal") sel.ucal = true;
            else if (!name.empty())
                throw std::invalid_argument("unknown metric: " + name);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return sel;
    }
};

struct MetricReport {
    long long T = 0;
    int m = 0;
    std::optional<double> ece, l2, smcal, distcal_upper, vcdl, cdl, ucal;
    std::optional<double> mu_star;
    bool mu_star_attained = true;
    std::optional<TabularScoringRule> cdl_rule;
    std::optional<SmcalResult> smcal_witness;
};

// Computes the selected metrics. Bucketed metrics (ece, l2, vcdl, cdl, ucal)
// use the grid-snapped transcript; smcal uses the exact prediction values.
// The sandwich relations between the computed metrics are asserted here.
inline MetricReport compute_report(const Transcript& t, const Grid& g,
                                   MetricSelection sel = {}, bool witness = false) {
    BucketProfile prof = bucketize(t, g);
    MetricReport rep;
    rep.T = prof.total;
    rep.m = g.m;
    if (sel.ece) rep.ece = ece(prof);
    if (sel.l2) rep.l2 = l2cal(prof);
    if (sel.smcal) {
        SmcalResult s = smcal_detail(t);
        rep.smcal = s.value;
        rep.distcal_upper = std::sqrt(32.0 * s.value);
        if (witness) rep.smcal_witness = std::move(s);
    }
    if (sel.vcdl) {
        VcdlResult v = vcdl(prof);
        rep.vcdl = v.value;
        rep.mu_star = v.kink;
        rep.mu_star_attained = v.attained;
    }
    if (sel.cdl) {
        CdlResult c = cdl(prof);
        rep.cdl = c.value;
        if (witness) rep.cdl_rule = std::move(c.witness);
    }
    if (sel.ucal) rep.ucal = ucal(prof, overall_mean(prof));

    const double tol = 1e-6;
    if (rep.cdl) {
        if (rep.ece && (*rep.ece * *rep.ece > *rep.cdl + tol || *rep.cdl > 2.0 * *rep.ece + tol))
            throw std::logic_error("metric report violates the ECE/CDL sandwich");
        if (rep.l2 && (*rep.l2 > *rep.cdl + tol || *rep.cdl > 2.0 * std::sqrt(*rep.l2) + tol))
            throw std::logic_error("metric report violates the l2/CDL sandwich");
        if (rep.vcdl && (*rep.vcdl > *rep.cdl + tol || *rep.cdl > 2.0 * *rep.vcdl + tol))
            throw std::logic_error("metric report violates the VCDL/CDL sandwich");
        if (rep.ucal && *rep.ucal > *rep.cdl + tol)
            throw std::logic_error("metric report violates UCal <= CDL");
    }
    return rep;
}

inline nlohmann::json to_json(const MetricReport& rep) {
    nlohmann::json j;
    j["T"] = rep.T;
    j["m"] = rep.m;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("ece", rep.ece);
    put("l2", rep.l2);
    put("smcal", rep.smcal);
    put("distcal_upper", rep.distcal_upper);
    put("vcdl", rep.vcdl);
    put("cdl", rep.cdl);
    put("ucal", rep.ucal);
    if (rep.mu_star) {
        j["witness"]["mu_star"] = *rep.mu_star;
        j["witness"]["mu_star_attained"] = rep.mu_star_attained;
    }
    if (rep.cdl_rule) j["witness"]["cdl_rule"] = to_json(*rep.cdl_rule);
    if (rep.smcal_witness) {
        j["witness"]["smcal_sigma"]["points"] = rep.smcal_witness->points;
        j["witness"]["smcal_sigma"]["values"] = rep.smcal_witness->sigma;
    }
    return j;
}

}  // namespace cdl
