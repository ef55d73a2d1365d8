// State-choosing opponents for the online prediction game. An adversary
// sees the public history and the predictor's per-round strategy view,
// never the realized draw.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdl/online.hpp"
#include "cdl/transcript.hpp"

namespace cdl {

struct AdversarySpec {
    enum class Kind { Iid, Scripted, Greedy };
    Kind kind = Kind::Iid;
    double rho = 0.5;             // iid
    std::vector<int> script;      // scripted
    std::uint64_t seed = 0;
    std::string label;            // CLI spelling, for reports

    static AdversarySpec iid(double rho, std::uint64_t seed = 0) {
        if (!(rho >= 0.0 && rho <= 1.0))
            throw std::invalid_argument("iid adversary: rho outside [0,1]");
        AdversarySpec s;
        s.kind = Kind::Iid;
        s.rho = rho;
        s.seed = seed;
        s.label = "iid:" + detail::format_double(rho);
        return s;
    }

    static AdversarySpec scripted(std::vector<int> script) {
        for (int v : script)
            if (v != 0 && v != 1)
                throw std::invalid_argument("scripted adversary: state not in {0,1}");
        AdversarySpec s;
        s.kind = Kind::Scripted;
        s.script = std::move(script);
        s.label = "script";
        return s;
    }

    static AdversarySpec alternating(std::size_t length) {
        std::vector<int> sc(length);
        for (std::size_t i = 0; i < length; ++i) sc[i] = static_cast<int>(i % 2);
        AdversarySpec s = scripted(std::move(sc));
        s.label = "alt";
        return s;
    }

    static AdversarySpec greedy() {
        AdversarySpec s;
        s.kind = Kind::Greedy;
        s.label = "greedy";
        return s;
    }

    // CLI spellings: "iid:0.5", "script:path.csv", "alt", "greedy".
    // Script files carry a "t,theta" CSV header.
    static AdversarySpec parse(const std::string& text, std::size_t horizon = 0) {
        if (text.rfind("iid:", 0) == 0) {
            return iid(std::stod(text.substr(4)));
        }
        if (text == "greedy") return greedy();
        if (text == "alt" || text == "alternating") {
            if (horizon == 0) throw std::invalid_argument("alternating adversary needs a horizon");
            return alternating(horizon);
        }
        if (text.rfind("script:", 0) == 0) {
            std::string path = text.substr(7);
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open script " + path);
            std::string line;
            if (!std::getline(in, line) || detail::split_csv_row(line) != std::vector<std::string>{"t", "theta"})
                throw std::runtime_error(path + ":1: expected header \"t,theta\"");
            std::vector<int> sc;
            long line_no = 1;
            while (std::getline(in, line)) {
                ++line_no;
                if (line.empty() || line == "\r") continue;
                auto fields = detail::split_csv_row(line);
                if (fields.size() != 2)
                    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 2 fields");
                int v = std::stoi(fields[1]);
                if (v != 0 && v != 1)
                    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": state not in {0,1}");
                sc.push_back(v);
            }
            AdversarySpec s = scripted(std::move(sc));
            s.label = text;
            return s;
        }
        throw std::invalid_argument("unknown adversary spec: " + text);
    }
};

class Adversary {
  public:
    explicit Adversary(AdversarySpec spec)
        : spec_(std::move(spec)), rng_(splitmix64(spec_.seed ^ 0x61647665ull)) {}

    const AdversarySpec& spec() const { return spec_; }

    int next_state(const History& history, const RoundStrategy& view) {
        (void)history;
        switch (spec_.kind) {
            case AdversarySpec::Kind::Iid:
                return rng_.bernoulli(spec_.rho);
            case AdversarySpec::Kind::Scripted: {
                if (cursor_ >= spec_.script.size())
                    throw std::runtime_error("scripted adversary: script exhausted");
                return spec_.script[cursor_++];
            }
            case AdversarySpec::Kind::Greedy: {
                // One-step best response: pick the state maximizing the
                // predictor's expected weighted bias this round. Ties -> 1.
                double v0 = 0.0, v1 = 0.0;
                for (int s = 0; s < view.dist.count; ++s) {
                    double c = view.support_coeff[static_cast<std::size_t>(s)];
                    double p = view.dist.point[static_cast<std::size_t>(s)];
                    double pr = view.dist.prob[static_cast<std::size_t>(s)];
                    v0 += pr * c * p;
                    v1 += pr * c * (p - 1.0);
                }
                return v0 > v1 ? 0 : 1;
            }
        }
        throw std::logic_error("unreachable adversary kind");
    }

    // Conditional mean of the next state given the history; nullopt when the
    // adversary does not expose one (greedy).
    std::optional<double> conditional_mean(const History& history) const {
        (void)history;
        switch (spec_.kind) {
            case AdversarySpec::Kind::Iid:
                return spec_.rho;
            case AdversarySpec::Kind::Scripted: {
                if (cursor_ >= spec_.script.size())
                    throw std::runtime_error("scripted adversary: script exhausted");
                return static_cast<double>(spec_.script[cursor_]);
            }
            case AdversarySpec::Kind::Greedy:
                return std::nullopt;
        }
        throw std::logic_error("unreachable adversary kind");
    }

  private:
    AdversarySpec spec_;
    Rng rng_;
    std::size_t cursor_ = 0;
};

}  // namespace cdl
