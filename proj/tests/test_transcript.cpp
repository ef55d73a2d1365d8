#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "cdl/transcript.hpp"
#include "test_util.hpp"

using namespace cdl;

namespace {
// The ten observed rows of the miscalibrated predictor from the overview
// example: half the predictions 0.4 with conditional mean 0.2, half 0.6
// with conditional mean 0.8.
Transcript intro_rows() {
    return Transcript({0.4, 0.6, 0.4, 0.4, 0.6, 0.4, 0.6, 0.6, 0.4, 0.6},
                      {0, 1, 1, 0, 1, 0, 1, 0, 0, 1});
}
}  // namespace

TEST_CASE("transcript invariants") {
    CHECK_THROWS_AS(Transcript({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(Transcript({0.5}, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Transcript({1.2}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(Transcript({0.5}, {2}), std::invalid_argument);
    CHECK_NOTHROW(Transcript({0.0, 1.0}, {0, 1}));
}

TEST_CASE("grid intervals are right-closed") {
    Grid g(5);
    CHECK(g.value(1) == 0.2);
    CHECK(g.value(5) == 1.0);
    CHECK(g.bucket_index(0.0) == 1);      // I_1 closed at 0
    CHECK(g.bucket_index(0.2) == 1);      // p = j/m snaps to q_j
    CHECK(g.bucket_index(0.2000001) == 2);
    CHECK(g.bucket_index(0.4) == 2);
    CHECK(g.bucket_index(1.0) == 5);
    CHECK(g.snap(0.35) == g.value(2));
    CHECK_THROWS_AS(Grid(1), std::invalid_argument);

    // snapping is the identity on grid values
    for (int m = 2; m <= 12; ++m) {
        Grid grid(m);
        for (int i = 1; i <= m; ++i)
            CHECK(grid.snap(grid.value(i)) == grid.value(i));
    }
}

TEST_CASE("bucketize: intro example profile") {
    BucketProfile prof = bucketize(intro_rows(), Grid(5));
    CHECK(prof.count(2) == 5);
    CHECK(prof.count(3) == 5);
    CHECK(prof.qhat(2) == 0.2);
    CHECK(prof.qhat(3) == 0.8);
    CHECK(prof.count(1) == 0);
    CHECK(prof.empty(1));
}

TEST_CASE("bucketize: point masses and direct counting") {
    Transcript ones({1.0, 1.0, 1.0}, {1, 1, 1});
    BucketProfile p1 = bucketize(ones, Grid(2));
    CHECK(p1.count(2) == 3);
    CHECK(p1.qhat(2) == 1.0);
    CHECK(p1.bias(2) == 0.0);

    Transcript t({0.5, 0.5, 1.0, 1.0}, {1, 0, 1, 1});
    BucketProfile p2 = bucketize(t, Grid(2));
    CHECK(p2.count(1) == 2);
    CHECK(p2.qhat(1) == 0.5);
    CHECK(p2.bias(1) == 0.0);
    CHECK(p2.count(2) == 2);
    CHECK(p2.qhat(2) == 1.0);
    CHECK(p2.bias(2) == 0.0);
}

TEST_CASE("bucketize is permutation-covariant and conserves ones") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto [t, g] = testutil::random_transcript(rng);
        BucketProfile prof = bucketize(t, g);

        long long ones = 0;
        for (int s : t.states) ones += s;
        long long bucket_ones = 0;
        for (long long o : prof.ones) bucket_ones += o;
        CHECK(bucket_ones == ones);

        std::vector<std::size_t> perm(t.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> preds;
        std::vector<int> states;
        for (std::size_t i : perm) {
            preds.push_back(t.predictions[i]);
            states.push_back(t.states[i]);
        }
        BucketProfile shuffled = bucketize(Transcript(preds, states), g);
        CHECK(shuffled.counts == prof.counts);
        CHECK(shuffled.ones == prof.ones);
    }
}

TEST_CASE("transcript csv format") {
    std::istringstream in("t,p,theta\n1,0.4,0\n2,0.6,1\n");
    Transcript t = read_transcript(in);
    CHECK(t == Transcript({0.4, 0.6}, {0, 1}));

    std::istringstream empty_body("t,p,theta\n");
    CHECK_THROWS_WITH(read_transcript(empty_body), Catch::Matchers::ContainsSubstring("empty transcript"));

    std::istringstream bad_p("t,p,theta\n1,1.2,0\n");
    CHECK_THROWS_WITH(read_transcript(bad_p), Catch::Matchers::ContainsSubstring("outside [0,1]"));

    std::istringstream bad_row("t,p,theta\n1,0.4\n");
    CHECK_THROWS_WITH(read_transcript(bad_row), Catch::Matchers::ContainsSubstring(":2:"));

    std::istringstream bad_theta("t,p,theta\n1,0.4,3\n");
    CHECK_THROWS_AS(read_transcript(bad_theta), std::runtime_error);
}

TEST_CASE("transcript csv round-trip identity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> preds;
        std::vector<int> states;
        std::uniform_int_distribution<long> t_dist(1, 80);
        long T = t_dist(rng);
        for (long i = 0; i < T; ++i) {
            preds.push_back(unif(rng));  // full-precision values
            states.push_back(unif(rng) < 0.5);
        }
        Transcript t(preds, states);
        std::ostringstream out;
        write_transcript(t, out);
        std::istringstream in(out.str());
        CHECK(read_transcript(in) == t);
    }
}

TEST_CASE("bucket profile json") {
    BucketProfile prof = bucketize(intro_rows(), Grid(5));
    nlohmann::json j = to_json(prof);
    CHECK(j["m"] == 5);
    CHECK(j["buckets"].size() == 5);
    CHECK(j["buckets"][0]["qhat"].is_null());
    CHECK(j["buckets"][1]["n"] == 5);
    CHECK(j["buckets"][1]["qhat"] == 0.2);
    CHECK(j["buckets"][1]["G"] == 1.0);
}
