// Online CDL minimization: per-round construction of a low-bias prediction
// distribution from the oracle's weights, the full simulation loop, and the
// truthful baseline for stochastic opponents with known conditional means.
#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cdl/adversary.hpp"
#include "cdl/expert_oracle.hpp"
#include "cdl/online.hpp"
#include "cdl/transcript.hpp"

namespace cdl {

struct PredictorConfig {
    long T = 2;
    int m = 2;
    double eps = 0.5;
    std::uint64_t seed = 0;

    // m = ceil(sqrt(T)/ln T) clamped to >= 2, eps = 1/T.
    static PredictorConfig defaults(long T, std::uint64_t seed = 0) {
        if (T < 2) throw std::invalid_argument("predictor requires T >= 2");
        PredictorConfig c;
        c.T = T;
        double m = std::ceil(std::sqrt(static_cast<double>(T)) / std::log(static_cast<double>(T)));
        c.m = m < 2.0 ? 2 : static_cast<int>(m);
        c.eps = 1.0 / static_cast<double>(T);
        c.seed = seed;
        return c;
    }

    void validate() const {
        if (T < 2 || m < 2 || !(eps > 0.0))
            throw std::invalid_argument("predictor config requires T >= 2, m >= 2, eps > 0");
    }
};

// Per-bucket weighted-bias coefficients c_i = w_{i,+1} - w_{i,-1}.
inline std::vector<double> bucket_coefficients(const std::vector<double>& weights, int m) {
    std::vector<double> c(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i)
        c[static_cast<std::size_t>(i - 1)] =
            weights[ExpertOracle::expert_index(i, +1)] - weights[ExpertOracle::expert_index(i, -1)];
    return c;
}

// Expert gains l_{i,sigma}(p, theta) = sigma * 1{p in I_i} * (p - theta):
// nonzero only for the bucket containing p.
inline std::vector<double> expert_gains(double p, int theta, const Grid& g) {
    std::vector<double> gains(2 * static_cast<std::size_t>(g.m), 0.0);
    int i = g.bucket_index(p);
    gains[ExpertOracle::expert_index(i, +1)] = p - theta;
    gains[ExpertOracle::expert_index(i, -1)] = -(p - theta);
    return gains;
}

// h_t(s) = max_theta E_{p~s} sum_{i,sigma} w_{i,sigma} l_{i,sigma}(p, theta),
// evaluated directly from the definition.
inline double h_value(const std::vector<double>& weights, const Grid& g,
                      const PredictionDistribution& dist) {
    std::vector<double> c = bucket_coefficients(weights, g.m);
    double h = -1.0;
    for (int theta = 0; theta <= 1; ++theta) {
        double v = 0.0;
        for (int s = 0; s < dist.count; ++s) {
            double p = dist.point[static_cast<std::size_t>(s)];
            v += dist.prob[static_cast<std::size_t>(s)] *
                 c[static_cast<std::size_t>(g.bucket_index(p) - 1)] * (p - theta);
        }
        h = std::max(h, v);
    }
    return h;
}

// Closed-form choice of s_t with h_t(s_t) <= eps:
//   (a) some c_i = 0: point mass at q_i (h = 0);
//   (b) all c_i > 0: point mass at 0   (h = 0);
//   (c) all c_i < 0: point mass at 1   (h = 0);
//   (d) otherwise mix the first adjacent sign change: p_a = i/m in I_i with
//       mass |c_{i+1}|/(|c_i|+|c_{i+1}|) and p_b = i/m + delta in I_{i+1},
//       delta = min(eps, 1/(2m)). The mix zeroes the theta-dependence and
//       leaves |h| <= delta.
inline PredictionDistribution round_distribution(const std::vector<double>& weights,
                                                 const Grid& g, double eps) {
    std::vector<double> c = bucket_coefficients(weights, g.m);
    for (int i = 0; i < g.m; ++i)
        if (c[static_cast<std::size_t>(i)] == 0.0)
            return PredictionDistribution::point_mass(g.value(i + 1));
    bool all_pos = true, all_neg = true;
    for (double v : c) {
        all_pos = all_pos && v > 0.0;
        all_neg = all_neg && v < 0.0;
    }
    if (all_pos) return PredictionDistribution::point_mass(0.0);
    if (all_neg) return PredictionDistribution::point_mass(1.0);
    for (int i = 0; i + 1 < g.m; ++i) {
        double ca = c[static_cast<std::size_t>(i)], cb = c[static_cast<std::size_t>(i + 1)];
        if ((ca > 0.0) == (cb > 0.0)) continue;
        double pa = g.value(i + 1);
        double delta = std::min(eps, 0.5 / g.m);
        double lambda = std::fabs(cb) / (std::fabs(ca) + std::fabs(cb));
        return PredictionDistribution::two_point(pa, lambda, pa + delta);
    }
    throw std::logic_error("round_distribution: no sign change found");
}

struct TraceRow {
    long t = 0;
    PredictionDistribution dist;
    double ptilde = 0.0;
    double p = 0.0;
    int theta = 0;
    double h = 0.0;
};

struct RunResult {
    Transcript transcript;
    double max_h = 0.0;       // max over rounds of independently recomputed h_t(s_t)
    double eps = 0.0;
    int m = 0;
    std::vector<TraceRow> trace;
};

inline RunResult run_algorithm1(const PredictorConfig& config, Adversary& adversary,
                                bool keep_trace = false) {
    config.validate();
    Grid grid(config.m);
    ExpertOracle oracle(config.m, config.T);
    Rng rng(splitmix64(config.seed ^ 0x70726564ull));
    History history;
    history.predictions.reserve(static_cast<std::size_t>(config.T));
    history.states.reserve(static_cast<std::size_t>(config.T));

    RunResult result;
    result.eps = config.eps;
    result.m = config.m;
    if (keep_trace) result.trace.reserve(static_cast<std::size_t>(config.T));

    for (long t = 1; t <= config.T; ++t) {
        std::vector<double> w = oracle.weights();
        PredictionDistribution s = round_distribution(w, grid, config.eps);
        double h = h_value(w, grid, s);
        result.max_h = std::max(result.max_h, h);
        assert(h <= config.eps + 1e-15);

        RoundStrategy view;
        view.dist = s;
        std::vector<double> c = bucket_coefficients(w, grid.m);
        for (int k = 0; k < s.count; ++k)
            view.support_coeff[static_cast<std::size_t>(k)] =
                c[static_cast<std::size_t>(grid.bucket_index(s.point[static_cast<std::size_t>(k)]) - 1)];

        // State committed before the draw: predictor and adversary act
        // simultaneously.
        int theta = adversary.next_state(history, view);

        double ptilde = s.count == 1 || rng.uniform() < s.prob[0] ? s.point[0] : s.point[1];
        double p = grid.snap(ptilde);

        oracle.update(expert_gains(ptilde, theta, grid));
        history.predictions.push_back(p);
        history.states.push_back(theta);
        if (keep_trace) result.trace.push_back(TraceRow{t, s, ptilde, p, theta, h});
    }
    result.transcript = Transcript(std::move(history.predictions), std::move(history.states));
    return result;
}

struct TruthfulResult {
    Transcript transcript;
    double deviation = 0.0;  // D at alpha = 2 sqrt(log(Tm)), beta = 1/m
    double alpha = 0.0;
    double beta = 0.0;
};

// Truthful baseline: each round predict the grid value nearest to the
// opponent's conditional mean. Only defined for adversaries that expose
// conditional means.
inline TruthfulResult run_truthful_baseline(const PredictorConfig& config, Adversary& adversary) {
    config.validate();
    Grid grid(config.m);
    History history;

    for (long t = 1; t <= config.T; ++t) {
        std::optional<double> mean = adversary.conditional_mean(history);
        if (!mean)
            throw std::runtime_error("truthful baseline: adversary does not expose conditional means");
        int i = static_cast<int>(std::llround(*mean * grid.m));
        if (i < 1) i = 1;
        if (i > grid.m) i = grid.m;
        double p = grid.value(i);

        RoundStrategy view;
        view.dist = PredictionDistribution::point_mass(p);
        int theta = adversary.next_state(history, view);
        history.predictions.push_back(p);
        history.states.push_back(theta);
    }

    TruthfulResult result;
    result.transcript = Transcript(std::move(history.predictions), std::move(history.states));
    result.alpha = 2.0 * std::sqrt(std::log(static_cast<double>(config.T) * config.m));
    result.beta = 1.0 / config.m;
    BucketProfile prof = bucketize(result.transcript, grid);
    double best = 0.0;
    for (int i = 1; i <= grid.m; ++i) {
        if (prof.empty(i)) continue;
        double n = static_cast<double>(prof.count(i));
        best = std::max(best, prof.bias(i) - result.alpha * std::sqrt(n) - result.beta * n);
    }
    result.deviation = best;
    return result;
}

inline void write_trace(const std::vector<TraceRow>& trace, std::ostream& out) {
    out << "t,pa,wa,pb,wb,ptilde,p,theta,h\n";
    for (const auto& row : trace) {
        out << row.t << ',' << detail::format_double(row.dist.point[0]) << ','
            << detail::format_double(row.dist.prob[0]) << ',';
        if (row.dist.count > 1)
            out << detail::format_double(row.dist.point[1]) << ','
                << detail::format_double(row.dist.prob[1]);
        else
            out << ',';
        out << ',' << detail::format_double(row.ptilde) << ','
            << detail::format_double(row.p) << ',' << row.theta << ','
            << detail::format_double(row.h) << '\n';
    }
}

}  // namespace cdl
