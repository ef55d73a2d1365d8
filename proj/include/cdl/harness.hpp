// Experiment driver: fixture transcripts for the worked examples, T-sweeps
// of the online algorithm with a full metric panel, rate fitting, and CSV /
// JSON persistence.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cdl/adversary.hpp"
#include "cdl/metrics.hpp"
#include "cdl/predictor.hpp"
#include "cdl/transcript.hpp"

namespace cdl {

// Constant for the oracle's regret bound C*(log(mT) + sqrt(n_i log(mT))),
// measured once on the adversarial audit suite and frozen (observed max
// 0.53 across the audit grid); also used for the deviation statistic's
// alpha = C*sqrt(log(mT)) in sweep records.
inline constexpr double kOracleRegretConstant = 1.0;

// ---- fixtures ----------------------------------------------------------

namespace harness_detail {

// Rounds alternate between two prediction values; within each value the
// first `ones` rounds carry state 1, realizing the conditional means exactly.
inline Transcript two_value_fixture(double pa, long na, long ones_a,
                                    double pb, long nb, long ones_b) {
    std::vector<double> preds;
    std::vector<int> states;
    long ia = 0, ib = 0;
    while (ia < na || ib < nb) {
        if (ia < na) {
            preds.push_back(pa);
            states.push_back(ia < ones_a ? 1 : 0);
            ++ia;
        }
        if (ib < nb) {
            preds.push_back(pb);
            states.push_back(ib < ones_b ? 1 : 0);
            ++ib;
        }
    }
    return Transcript(std::move(preds), std::move(states));
}

}  // namespace harness_detail

struct FixtureParams {
    long T = 0;
    double eps = 0.1;
};

// Deterministic transcripts realizing the worked examples' bucket profiles
// exactly. Names: intro_miscal, intro_cal, ex41a, ex41b, ex42b, ex43.
inline Transcript fixture(const std::string& name, const FixtureParams& params) {
    long T = params.T;
    if (T < 1) throw std::invalid_argument("fixture: T must be >= 1");
    if (name == "intro_miscal" || name == "intro_cal") {
        if (T % 10 != 0)
            throw std::invalid_argument(name + " requires T divisible by 10");
        long half = T / 2;
        if (name == "intro_miscal")
            return harness_detail::two_value_fixture(0.4, half, T / 10, 0.6, half, 2 * T / 5);
        return harness_detail::two_value_fixture(0.2, half, T / 10, 0.8, half, 2 * T / 5);
    }
    if (name == "ex41a") {
        if (!(params.eps > 0.0 && params.eps < 1.0))
            throw std::invalid_argument("ex41a requires eps in (0,1)");
        std::vector<double> preds(static_cast<std::size_t>(T), 1.0 - params.eps);
        std::vector<int> states(static_cast<std::size_t>(T), 1);
        return Transcript(std::move(preds), std::move(states));
    }
    if (name == "ex41b") {
        long m = std::llround(std::sqrt(static_cast<double>(T)));
        if (m * m != T || m < 2)
            throw std::invalid_argument("ex41b requires T to be a perfect square >= 4");
        std::vector<double> preds;
        std::vector<int> states;
        for (long period = 0; period < m; ++period) {
            double p = static_cast<double>(period + 1) / static_cast<double>(m);
            for (long r = 0; r < m; ++r) {
                preds.push_back(p);
                states.push_back(r < period ? 1 : 0);
            }
        }
        return Transcript(std::move(preds), std::move(states));
    }
    if (name == "ex42b") {
        if (T % 2 != 0) throw std::invalid_argument("ex42b requires even T");
        if (!(params.eps > 0.0 && params.eps < 0.5))
            throw std::invalid_argument("ex42b requires eps in (0, 0.5)");
        long half = T / 2;
        return harness_detail::two_value_fixture(0.5 + params.eps, half, half,
                                                 0.5 - params.eps, half, 0);
    }
    if (name == "ex43") {
        if (T % 2 != 0) throw std::invalid_argument("ex43 requires even T");
        long half = T / 2;
        return harness_detail::two_value_fixture(0.75, half, half, 0.25, half, 0);
    }
    throw std::invalid_argument("unknown fixture: " + name);
}

// ---- sweep -------------------------------------------------------------

struct SweepOverrides {
    std::optional<int> m;
    std::optional<double> eps;
};

struct SweepRecord {
    long T = 0;
    std::string adversary;
    std::uint64_t seed = 0;
    int m = 0;
    double eps = 0.0;
    double cdl = 0.0, vcdl = 0.0, ece = 0.0, l2 = 0.0, deviation = 0.0, max_h = 0.0;
    double runtime_ms = 0.0;  // informational; not persisted (reruns must be
                              // byte-identical)
};

struct SweepCell {
    long T = 0;
    std::string adversary;
    long seeds = 0;
    double mean_cdl = 0.0, sem_cdl = 0.0;
    double mean_vcdl = 0.0, mean_ece = 0.0, mean_l2 = 0.0, mean_deviation = 0.0;
    double max_h = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;           // sorted by (T, adversary, seed)
    std::vector<SweepCell> cells;               // per (T, adversary)
    std::vector<std::pair<long, double>> portfolio;  // per T: max over adversaries of mean cdl
    std::optional<double> slope;                // log-log slope of portfolio cdl vs T
    std::vector<std::string> failures;
};

namespace harness_detail {

inline void aggregate(SweepResult& res) {
    std::sort(res.records.begin(), res.records.end(),
              [](const SweepRecord& a, const SweepRecord& b) {
                  return std::tie(a.T, a.adversary, a.seed) < std::tie(b.T, b.adversary, b.seed);
              });
    res.cells.clear();
    res.portfolio.clear();
    res.slope.reset();

    for (std::size_t lo = 0; lo < res.records.size();) {
        std::size_t hi = lo;
        while (hi < res.records.size() && res.records[hi].T == res.records[lo].T &&
               res.records[hi].adversary == res.records[lo].adversary)
            ++hi;
        SweepCell cell;
        cell.T = res.records[lo].T;
        cell.adversary = res.records[lo].adversary;
        cell.seeds = static_cast<long>(hi - lo);
        for (std::size_t r = lo; r < hi; ++r) {
            cell.mean_cdl += res.records[r].cdl;
            cell.mean_vcdl += res.records[r].vcdl;
            cell.mean_ece += res.records[r].ece;
            cell.mean_l2 += res.records[r].l2;
            cell.mean_deviation += res.records[r].deviation;
            cell.max_h = std::max(cell.max_h, res.records[r].max_h);
        }
        double n = static_cast<double>(cell.seeds);
        cell.mean_cdl /= n;
        cell.mean_vcdl /= n;
        cell.mean_ece /= n;
        cell.mean_l2 /= n;
        cell.mean_deviation /= n;
        if (cell.seeds > 1) {
            double ss = 0.0;
            for (std::size_t r = lo; r < hi; ++r) {
                double d = res.records[r].cdl - cell.mean_cdl;
                ss += d * d;
            }
            cell.sem_cdl = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
        res.cells.push_back(std::move(cell));
        lo = hi;
    }

    std::map<long, double> per_t;
    for (const auto& cell : res.cells) {
        auto it = per_t.find(cell.T);
        if (it == per_t.end()) per_t[cell.T] = cell.mean_cdl;
        else it->second = std::max(it->second, cell.mean_cdl);
    }
    for (const auto& [T, v] : per_t) res.portfolio.emplace_back(T, v);

    if (res.portfolio.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double n = static_cast<double>(res.portfolio.size());
        for (const auto& [T, v] : res.portfolio) {
            double x = std::log(static_cast<double>(T));
            double y = std::log(std::max(v, 1e-300));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
}

}  // namespace harness_detail

// Runs Algorithm 1 for one sweep cell and computes the metric panel.
inline SweepRecord run_cell(long T, const std::string& adversary_spec, std::uint64_t seed,
                            const SweepOverrides& overrides = {}) {
    auto start = std::chrono::steady_clock::now();
    PredictorConfig config = PredictorConfig::defaults(T, splitmix64(seed));
    if (overrides.m) config.m = *overrides.m;
    if (overrides.eps) config.eps = *overrides.eps;

    AdversarySpec spec = AdversarySpec::parse(adversary_spec, static_cast<std::size_t>(T));
    spec.seed = splitmix64(seed ^ 0x5245564441ull);
    Adversary adversary(spec);

    RunResult run = run_algorithm1(config, adversary);
    BucketProfile prof = bucketize(run.transcript, Grid(config.m));

    SweepRecord rec;
    rec.T = T;
    rec.adversary = adversary_spec;
    rec.seed = seed;
    rec.m = config.m;
    rec.eps = config.eps;
    rec.cdl = cdl(prof).value;
    rec.vcdl = vcdl(prof).value;
    rec.ece = ece(prof);
    rec.l2 = l2cal(prof);
    double log_mt = std::log(static_cast<double>(config.m) * static_cast<double>(T));
    rec.deviation = deviation_stat(prof, kOracleRegretConstant * std::sqrt(log_mt), 1.0 / config.m);
    rec.max_h = run.max_h;
    rec.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start).count();
    return rec;
}

inline SweepResult sweep(const std::vector<long>& T_list,
                         const std::vector<std::string>& adversaries,
                         const std::vector<std::uint64_t>& seeds,
                         const SweepOverrides& overrides = {},
                         unsigned threads = std::thread::hardware_concurrency()) {
    if (T_list.empty() || adversaries.empty() || seeds.empty())
        throw std::invalid_argument("sweep: empty T list, adversary list, or seed list");

    struct Job { long T; std::string adv; std::uint64_t seed; };
    std::vector<Job> jobs;
    for (long T : T_list)
        for (const auto& adv : adversaries)
            for (std::uint64_t seed : seeds) jobs.push_back(Job{T, adv, seed});

    std::vector<std::optional<SweepRecord>> slots(jobs.size());
    std::vector<std::string> errors(jobs.size());
    if (threads < 1) threads = 1;
    auto worker = [&](unsigned tid) {
        for (std::size_t j = tid; j < jobs.size(); j += threads) {
            try {
                slots[j] = run_cell(jobs[j].T, jobs[j].adv, jobs[j].seed, overrides);
            } catch (const std::exception& ex) {
                errors[j] = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned tid = 1; tid < threads; ++tid) pool.emplace_back(worker, tid);
    worker(0);
    for (auto& th : pool) th.join();

    SweepResult res;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (slots[j]) res.records.push_back(std::move(*slots[j]));
        else
            res.failures.push_back("T=" + std::to_string(jobs[j].T) + " adversary=" + jobs[j].adv +
                                   " seed=" + std::to_string(jobs[j].seed) + ": " + errors[j]);
    }
    if (res.records.empty()) throw std::runtime_error("sweep: every cell failed");
    harness_detail::aggregate(res);
    return res;
}

// ---- persistence -------------------------------------------------------

inline void write_sweep_csv(const SweepResult& res, std::ostream& out) {
    out << "T,adversary,seed,m,eps,cdl,vcdl,ece,l2,deviation,max_h\n";
    for (const auto& r : res.records) {
        out << r.T << ',' << r.adversary << ',' << r.seed << ',' << r.m << ','
            << detail::format_double(r.eps) << ',' << detail::format_double(r.cdl) << ','
            << detail::format_double(r.vcdl) << ',' << detail::format_double(r.ece) << ','
            << detail::format_double(r.l2) << ',' << detail::format_double(r.deviation) << ','
            << detail::format_double(r.max_h) << '\n';
    }
}

inline SweepResult read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("sweep csv: empty file");
    SweepResult res;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_row(line);
        if (f.size() != 11) throw std::runtime_error("sweep csv: expected 11 fields");
        SweepRecord r;
        r.T = std::stol(f[0]);
        r.adversary = f[1];
        r.seed = std::stoull(f[2]);
        r.m = std::stoi(f[3]);
        r.eps = std::strtod(f[4].c_str(), nullptr);
        r.cdl = std::strtod(f[5].c_str(), nullptr);
        r.vcdl = std::strtod(f[6].c_str(), nullptr);
        r.ece = std::strtod(f[7].c_str(), nullptr);
        r.l2 = std::strtod(f[8].c_str(), nullptr);
        r.deviation = std::strtod(f[9].c_str(), nullptr);
        r.max_h = std::strtod(f[10].c_str(), nullptr);
        res.records.push_back(std::move(r));
    }
    if (res.records.empty()) throw std::runtime_error("sweep csv: no records");
    harness_detail::aggregate(res);
    return res;
}

inline nlohmann::json sweep_summary_json(const SweepResult& res) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : res.cells) {
        cells.push_back({{"T", c.T},
                         {"adversary", c.adversary},
                         {"seeds", c.seeds},
                         {"mean_cdl", c.mean_cdl},
                         {"sem_cdl", c.sem_cdl},
                         {"mean_vcdl", c.mean_vcdl},
                         {"mean_ece", c.mean_ece},
                         {"mean_l2", c.mean_l2},
                         {"mean_deviation", c.mean_deviation},
                         {"max_h", c.max_h}});
    }
    nlohmann::json portfolio = nlohmann::json::array();
    for (const auto& [T, v] : res.portfolio) portfolio.push_back({{"T", T}, {"cdl", v}});
    nlohmann::json j{{"cells", std::move(cells)}, {"portfolio", std::move(portfolio)}};
    if (res.slope) j["slope"] = *res.slope;
    if (!res.failures.empty()) j["failures"] = res.failures;
    return j;
}

// ---- rate report -------------------------------------------------------

struct RateReport {
    std::optional<double> slope;
    std::vector<std::pair<long, double>> normalized;  // cdl * sqrt(T) / log2(T)
    bool slope_ok = false;
    bool bounded_ok = false;
    long ref_T = 0, top_T = 0;
    double ratio = 0.0;

    bool pass() const { return slope_ok && bounded_ok; }
};

// Scale-free rate check: fitted slope <= -0.40, and the normalized statistic
// at the largest T at most 1.5x its value at the reference T (2^10 when
// present, otherwise the smallest T).
inline RateReport rate_report(const SweepResult& res) {
    if (res.portfolio.empty()) throw std::invalid_argument("rate_report: empty sweep");
    RateReport rep;
    rep.slope = res.slope;
    for (const auto& [T, v] : res.portfolio)
        rep.normalized.emplace_back(
            T, v * std::sqrt(static_cast<double>(T)) / std::log2(static_cast<double>(T)));
    rep.ref_T = rep.normalized.front().first;
    for (const auto& [T, v] : rep.normalized)
        if (T == 1024) rep.ref_T = T;
    rep.top_T = rep.normalized.back().first;
    double ref = 0.0, top = 0.0;
    for (const auto& [T, v] : rep.normalized) {
        if (T == rep.ref_T) ref = v;
        if (T == rep.top_T) top = v;
    }
    rep.ratio = ref > 0.0 ? top / ref : (top > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.slope_ok = rep.slope.has_value() && *rep.slope <= -0.40;
    rep.bounded_ok = rep.top_T == rep.ref_T || rep.ratio <= 1.5;
    return rep;
}

inline nlohmann::json to_json(const RateReport& rep) {
    nlohmann::json norm = nlohmann::json::array();
    for (const auto& [T, v] : rep.normalized) norm.push_back({{"T", T}, {"stat", v}});
    nlohmann::json j{{"normalized", std::move(norm)},
                     {"ref_T", rep.ref_T},
                     {"top_T", rep.top_T},
                     {"ratio", rep.ratio},
                     {"slope_ok", rep.slope_ok},
                     {"bounded_ok", rep.bounded_ok},
                     {"pass", rep.pass()}};
    if (rep.slope) j["slope"] = *rep.slope;
    else j["slope"] = nullptr;
    return j;
}

}  // namespace cdl
