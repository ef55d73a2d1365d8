// Shared types for the online prediction game: public history, the
// predictor's per-round strategy view, and seeded RNG helpers.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace cdl {

// Distribution with at most two support points in [0,1].
struct PredictionDistribution {
    int count = 0;
    std::array<double, 2> point{{0.0, 0.0}};
    std::array<double, 2> prob{{0.0, 0.0}};

    static PredictionDistribution point_mass(double p) {
        return PredictionDistribution{1, {p, 0.0}, {1.0, 0.0}};
    }
    static PredictionDistribution two_point(double pa, double la, double pb) {
        return PredictionDistribution{2, {pa, pb}, {la, 1.0 - la}};
    }
};

// Public history: realized predictions and states of past rounds. The
// realized random draws stay private to the predictor.
struct History {
    std::vector<double> predictions;
    std::vector<int> states;
    std::size_t rounds() const { return predictions.size(); }
};

// What the opponent may observe before committing to a state: the round's
// prediction distribution and the predictor's weighted-bias coefficient at
// each support point's bucket. Never the realized draw.
struct RoundStrategy {
    PredictionDistribution dist;
    std::array<double, 2> support_coeff{{0.0, 0.0}};
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// mt19937_64 with explicit draw helpers, so streams are identical across
// standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace cdl
