// Core data model: prediction/state sequences, the uniform prediction grid,
// per-bucket profiles, and CSV / JSON plumbing.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdl/format.hpp"

namespace cdl {

// Paired sequences (p_1..p_T, theta_1..theta_T). Predictions in [0,1],
// states in {0,1}, both of identical length T >= 1.
struct Transcript {
    std::vector<double> predictions;
    std::vector<int> states;

    Transcript() = default;
    Transcript(std::vector<double> p, std::vector<int> s)
        : predictions(std::move(p)), states(std::move(s)) {
        validate();
    }

    std::size_t size() const { return predictions.size(); }

    void validate() const {
        if (predictions.empty()) throw std::invalid_argument("empty transcript");
        if (predictions.size() != states.size())
            throw std::invalid_argument("prediction/state length mismatch");
        for (double p : predictions)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("prediction outside [0,1]");
        for (int s : states)
            if (s != 0 && s != 1)
                throw std::invalid_argument("state not in {0,1}");
    }

    bool operator==(const Transcript& o) const {
        return predictions == o.predictions && states == o.states;
    }
};

// Uniform grid q_i = i/m for i = 1..m, with the interval partition
// I_1 = [0, 1/m], I_j = ((j-1)/m, j/m] for j >= 2. Right-closed by
// convention, so p = j/m lands in bucket j.
struct Grid {
    int m = 2;

    Grid() = default;
    explicit Grid(int m_) : m(m_) {
        if (m < 2) throw std::invalid_argument("grid size m must be >= 2");
    }

    double value(int i) const { return static_cast<double>(i) / m; }

    // 1-based bucket index of p in [0,1]. Values within 1e-9/m of a grid
    // point snap to that point's bucket.
    int bucket_index(double p) const {
        double scaled = p * m;
        int k = static_cast<int>(std::floor(scaled));
        if (k >= 1 && scaled - k <= 1e-9) return std::min(k, m);
        return std::min(std::max(k + 1, 1), m);
    }

    double snap(double p) const { return value(bucket_index(p)); }
};

// Per-bucket counts n_i, one-counts (so qhat_i = ones_i / n_i stays an exact
// rational), and biases G_i = n_i * |q_i - qhat_i| = |n_i*i - ones_i*m| / m.
struct BucketProfile {
    Grid grid;
    std::vector<long long> counts;  // indexed 0..m-1 for buckets 1..m
    std::vector<long long> ones;
    long long total = 0;

    int size() const { return grid.m; }
    bool empty(int i) const { return counts[i - 1] == 0; }
    long long count(int i) const { return counts[i - 1]; }

    double q(int i) const { return grid.value(i); }

    double qhat(int i) const {
        if (empty(i)) throw std::logic_error("qhat undefined for empty bucket");
        return static_cast<double>(ones[i - 1]) / counts[i - 1];
    }

    // G_i, computed in integer arithmetic: |n_i*i - ones_i*m| / m.
    double bias(int i) const {
        if (empty(i)) return 0.0;
        long long num = counts[i - 1] * i - ones[i - 1] * grid.m;
        return static_cast<double>(std::llabs(num)) / grid.m;
    }
};

inline BucketProfile bucketize(const Transcript& t, const Grid& g) {
    BucketProfile prof;
    prof.grid = g;
    prof.counts.assign(g.m, 0);
    prof.ones.assign(g.m, 0);
    prof.total = static_cast<long long>(t.size());
    for (std::size_t r = 0; r < t.size(); ++r) {
        int i = g.bucket_index(t.predictions[r]);
        ++prof.counts[i - 1];
        prof.ones[i - 1] += t.states[r];
    }
    return prof;
}

// ---- CSV I/O ----------------------------------------------------------
// Format: header "t,p,theta", one row per round, rounds in order.

inline Transcript read_transcript(std::istream& in, const std::string& name = "transcript") {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(name + ": empty transcript");
    auto hdr = detail::split_csv_row(line);
    if (hdr.size() != 3 || hdr[0] != "t" || hdr[1] != "p" || hdr[2] != "theta")
        throw std::runtime_error(name + ":1: expected header \"t,p,theta\"");

    std::vector<double> preds;
    std::vector<int> states;
    long expected_round = 1;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_row(line);
        if (fields.size() != 3)
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": expected 3 fields");
        char* end = nullptr;
        long t = std::strtol(fields[0].c_str(), &end, 10);
        if (end == fields[0].c_str() || *end != '\0' || t != expected_round)
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": bad round index");
        double p = std::strtod(fields[1].c_str(), &end);
        if (end == fields[1].c_str() || *end != '\0')
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": bad prediction");
        if (!(p >= 0.0 && p <= 1.0))
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": prediction outside [0,1]");
        long th = std::strtol(fields[2].c_str(), &end, 10);
        if (end == fields[2].c_str() || *end != '\0' || (th != 0 && th != 1))
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": state not in {0,1}");
        preds.push_back(p);
        states.push_back(static_cast<int>(th));
        ++expected_round;
    }
    if (preds.empty()) throw std::runtime_error(name + ": empty transcript");
    return Transcript(std::move(preds), std::move(states));
}

inline Transcript read_transcript_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_transcript(in, path);
}

inline void write_transcript(const Transcript& t, std::ostream& out) {
    out << "t,p,theta\n";
    for (std::size_t r = 0; r < t.size(); ++r)
        out << (r + 1) << ',' << detail::format_double(t.predictions[r]) << ','
            << t.states[r] << '\n';
}

inline void write_transcript_file(const Transcript& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_transcript(t, out);
}

// JSON schema: {m, buckets:[{i, q, n, qhat, G}]}; qhat is null for empty buckets.
inline nlohmann::json to_json(const BucketProfile& prof) {
    nlohmann::json buckets = nlohmann::json::array();
    for (int i = 1; i <= prof.size(); ++i) {
        nlohmann::json b;
        b["i"] = i;
        b["q"] = prof.q(i);
        b["n"] = prof.count(i);
        if (prof.empty(i)) b["qhat"] = nullptr;
        else b["qhat"] = prof.qhat(i);
        b["G"] = prof.bias(i);
        buckets.push_back(std::move(b));
    }
    return nlohmann::json{{"m", prof.grid.m}, {"buckets", std::move(buckets)}};
}

}  // namespace cdl
