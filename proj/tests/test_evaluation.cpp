#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "tmix/evaluation.hpp"

using Catch::Approx;

namespace {

// brute force over all pairs, straight from the definition
double rand_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    long agree = 0, total = 0;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = i + 1; j < a.size(); ++j) {
            ++total;
            if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
        }
    return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("contingency_table counts co-memberships", "[evaluation]") {
    std::vector<int> a{0, 0, 1, 1};
    std::vector<int> b{0, 1, 1, 1};
    const auto t = tmix::contingency_table(a, b);
    REQUIRE(t.counts.size() == 2);
    REQUIRE(t.counts[0].size() == 2);
    CHECK(t.counts[0][0] == 1);
    CHECK(t.counts[0][1] == 1);
    CHECK(t.counts[1][0] == 0);
    CHECK(t.counts[1][1] == 2);
    CHECK(t.row_marginals == std::vector<std::int64_t>{2, 2});
    CHECK(t.col_marginals == std::vector<std::int64_t>{1, 3});
    CHECK(t.n == 4);
    CHECK_THROWS(tmix::contingency_table(a, std::vector<int>{0}));
}

TEST_CASE("rand_index on small fixtures", "[evaluation]") {
    std::vector<int> a{0, 0, 1, 1};
    CHECK(tmix::rand_index(a, a) == 1.0);
    std::vector<int> b{0, 1, 0, 1};
    // agreeing pairs: (0,2),(0,3) vs ... direct count gives 2 of 6
    CHECK(tmix::rand_index(a, b) == Approx(2.0 / 6.0));
    std::vector<int> c{1, 1, 0, 0};  // same partition, relabeled
    CHECK(tmix::rand_index(a, c) == 1.0);
}

TEST_CASE("rand_index matches the pairwise definition on random labelings", "[evaluation]") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> lab(0, 3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<int> a(40), b(40);
        for (size_t i = 0; i < a.size(); ++i) {
            a[i] = lab(rng);
            b[i] = lab(rng);
        }
        CHECK(tmix::rand_index(a, b) == Approx(rand_by_pairs(a, b)).margin(1e-12));
    }
}

TEST_CASE("adjusted_rand_index basics", "[evaluation]") {
    std::vector<int> a{0, 0, 1, 1, 2, 2};
    CHECK(tmix::adjusted_rand_index(a, a) == 1.0);
    std::vector<int> relabeled{2, 2, 0, 0, 1, 1};
    CHECK(tmix::adjusted_rand_index(a, relabeled) == 1.0);
    // a known disagreement fixture
    std::vector<int> x{0, 0, 1, 1};
    std::vector<int> y{0, 1, 0, 1};
    // sum_cells = 0, expected = 1*... -> ARI = -expected/(max-expected)
    const double expected = 2.0 * 2.0 / 6.0;
    const double maximum = 2.0;
    CHECK(tmix::adjusted_rand_index(x, y) == Approx((0.0 - expected) / (maximum - expected)));
}

TEST_CASE("adjusted_rand_index degenerate partitions", "[evaluation]") {
    std::vector<int> ones{0, 0, 0, 0};
    CHECK(tmix::adjusted_rand_index(ones, ones) == 1.0);
    std::vector<int> singles{0, 1, 2, 3};
    CHECK(tmix::adjusted_rand_index(singles, singles) == 1.0);
    // all-singletons vs one block: trivial pair, no agreement possible
    CHECK(tmix::adjusted_rand_index(ones, singles) == 0.0);
}

TEST_CASE("adjusted_rand_index is near zero for independent labelings", "[evaluation]") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> lab(0, 2);
    double acc = 0.0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<int> a(60), b(60);
        for (size_t i = 0; i < a.size(); ++i) {
            a[i] = lab(rng);
            b[i] = lab(rng);
        }
        acc += tmix::adjusted_rand_index(a, b);
    }
    CHECK(std::abs(acc / reps) < 0.02);
}

TEST_CASE("indices reject undersized inputs", "[evaluation]") {
    std::vector<int> one{0};
    CHECK_THROWS(tmix::rand_index(one, one));
    CHECK_THROWS(tmix::adjusted_rand_index(one, one));
}
