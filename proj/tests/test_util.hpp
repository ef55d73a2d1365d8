// Shared generators and independent oracles for the test suites. Everything
// here stays independent of the implementation paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "cdl/scoring.hpp"
#include "cdl/transcript.hpp"

namespace testutil {

struct RandomTranscript {
    cdl::Transcript transcript;
    cdl::Grid grid;
};

// Uniform random predictions on the grid, states Bernoulli with a random
// per-bucket mean.
inline RandomTranscript random_transcript(std::mt19937_64& rng, long max_T = 200,
                                          int max_m = 12) {
    std::uniform_int_distribution<int> m_dist(2, max_m);
    std::uniform_int_distribution<long> t_dist(1, max_T);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    int m = m_dist(rng);
    long T = t_dist(rng);
    cdl::Grid grid(m);
    std::vector<double> mean(static_cast<std::size_t>(m));
    for (auto& v : mean) v = unif(rng);

    std::vector<double> preds;
    std::vector<int> states;
    std::uniform_int_distribution<int> bucket(1, m);
    for (long t = 0; t < T; ++t) {
        int i = bucket(rng);
        preds.push_back(grid.value(i));
        states.push_back(unif(rng) < mean[static_cast<std::size_t>(i - 1)] ? 1 : 0);
    }
    return RandomTranscript{cdl::Transcript(std::move(preds), std::move(states)), grid};
}

// Random proper scoring rule with scores in [0,1] on the given report set:
// sorted random subgradients define a convex sequence u_j, scores are the
// tangent values at the states, then everything is rescaled into [0,1]
// (affine maps preserve properness).
inline cdl::TabularScoringRule random_proper_rule(std::mt19937_64& rng,
                                                  std::vector<double> reports) {
    std::sort(reports.begin(), reports.end());
    reports.erase(std::unique(reports.begin(), reports.end()), reports.end());
    const std::size_t K = reports.size();
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    std::vector<double> g(K);
    for (auto& v : g) v = unif(rng);
    std::sort(g.begin(), g.end());

    std::vector<double> u(K);
    u[0] = 0.0;
    for (std::size_t j = 1; j < K; ++j)
        u[j] = u[j - 1] + 0.5 * (g[j - 1] + g[j]) * (reports[j] - reports[j - 1]);

    cdl::TabularScoringRule rule;
    rule.reports = reports;
    rule.scores.resize(K);
    double lo = 1e300, hi = -1e300;
    for (std::size_t j = 0; j < K; ++j) {
        rule.scores[j][1] = u[j] + g[j] * (1.0 - reports[j]);
        rule.scores[j][0] = u[j] - g[j] * reports[j];
        lo = std::min({lo, rule.scores[j][0], rule.scores[j][1]});
        hi = std::max({hi, rule.scores[j][0], rule.scores[j][1]});
    }
    for (std::size_t j = 0; j < K; ++j) {
        for (int th = 0; th < 2; ++th) {
            auto& s = rule.scores[j][static_cast<std::size_t>(th)];
            s = hi - lo < 1e-9 ? 0.5 : (s - lo) / (hi - lo);
        }
    }
    return rule;
}

// Literal prediction swap regret: enumerate every map from the rule's report
// set to itself and take the best total improvement.
inline double brute_force_pswap(const cdl::BucketProfile& prof,
                                const cdl::TabularScoringRule& rule) {
    const std::size_t K = rule.reports.size();
    struct Bucket { double n, q, qhat; };
    std::vector<Bucket> buckets;
    for (int i = 1; i <= prof.size(); ++i)
        if (!prof.empty(i))
            buckets.push_back({static_cast<double>(prof.count(i)), prof.q(i), prof.qhat(i)});

    std::size_t total_maps = 1;
    for (std::size_t j = 0; j < K; ++j) total_maps *= K;

    double best = -1e300;
    std::vector<std::size_t> map(K, 0);
    for (std::size_t code = 0; code < total_maps; ++code) {
        std::size_t c = code;
        for (std::size_t j = 0; j < K; ++j) {
            map[j] = c % K;
            c /= K;
        }
        double gain = 0.0;
        for (const auto& b : buckets) {
            int j = rule.index_of(b.q);
            double target = rule.reports[map[static_cast<std::size_t>(j)]];
            gain += b.n * (rule.expected_score(b.qhat, target) -
                           rule.expected_score(b.qhat, b.q));
        }
        best = std::max(best, gain);
    }
    return best / static_cast<double>(prof.total);
}

// ECE over the exact (unsnapped) prediction values.
inline double exact_value_ece(const cdl::Transcript& t) {
    std::map<double, double> bias;
    for (std::size_t r = 0; r < t.size(); ++r)
        bias[t.predictions[r]] += t.predictions[r] - t.states[r];
    double sum = 0.0;
    for (const auto& [v, g] : bias) sum += std::fabs(g);
    return sum / static_cast<double>(t.size());
}

}  // namespace testutil
