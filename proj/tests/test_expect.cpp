#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gt2/expect.hpp"
#include "gt2/parallel.hpp"
#include "gt2/rng.hpp"

using namespace gt2;

TEST_CASE("counter rng is a pure function with frozen values") {
    const u64 a = counter_rng(0, 0, 0);
    const u64 b = counter_rng(0, 0, 0);
    CHECK(a == b);
    CHECK(counter_rng(0, 0, 0) != counter_rng(0, 0, 1));
    CHECK(counter_rng(0, 0, 0) != counter_rng(0, 1, 0));
    CHECK(counter_rng(0, 0, 0) != counter_rng(1, 0, 0));
    // uniform reduction stays in range
    for (u64 i = 0; i < 1000; ++i) CHECK(counter_uniform(3, 1, i, 17) < 17);
}

TEST_CASE("exact expectation of the constant kernel") {
    const auto rep = expectation_exact(1000, [](u64) { return 1.0; });
    CHECK(rep.exact);
    CHECK(rep.estimate == 1.0);
    CHECK(rep.stderr_est == 0.0);
    CHECK_THROWS_AS(expectation_exact(0, [](u64) { return 1.0; }), ValidationError);
    CHECK_THROWS_AS(expectation_exact(kExactDomainBudget + 1, [](u64) { return 1.0; }),
                    ResourceError);
}

TEST_CASE("Monte Carlo estimates a known residue-class density") {
    const u64 q = 7;
    const u64 N = 1'000'003;
    const auto rep = expectation_mc(200'000, 5, [&](u64 i) {
        const u64 x = counter_uniform(5, 0, i, N);
        return x % q == 3 ? 1.0 : 0.0;
    });
    CHECK(std::abs(rep.estimate - 1.0 / double(q)) <= 3.0 * rep.stderr_est + 1e-6);
    CHECK(rep.stderr_est > 0.0);
}

TEST_CASE("exact and Monte Carlo agree on a 1e4 domain") {
    const u64 domain = 10'000;
    auto kernel = [&](u64 i) { return double((i * i) % 97) / 97.0; };
    const auto ex = expectation_exact(domain, kernel);
    const auto mc = expectation_mc(400'000, 9, [&](u64 i) {
        return kernel(counter_uniform(9, 0, i, domain));
    });
    CHECK(std::abs(ex.estimate - mc.estimate) <= 3.0 * mc.stderr_est);
}

TEST_CASE("results are bit-identical across thread counts") {
    auto term = [](u64 i) { return std::sin(double(i)) / (1.0 + double(i % 1000)); };
    const double one = parallel_sum(1'000'000, 4096, term, 1);
    const double two = parallel_sum(1'000'000, 4096, term, 2);
    const double many = parallel_sum(1'000'000, 4096, term, 8);
    CHECK(one == two);
    CHECK(one == many);

    const auto a = expectation_mc(300'000, 11, [&](u64 i) {
        return double(counter_uniform(11, 0, i, 1000)) / 1000.0;
    });
    const auto b = expectation_mc(300'000, 11, [&](u64 i) {
        return double(counter_uniform(11, 0, i, 1000)) / 1000.0;
    });
    CHECK(a.estimate == b.estimate);
    CHECK(a.stderr_est == b.stderr_est);
}

TEST_CASE("budget validation") {
    CHECK_THROWS_AS(expectation_mc(0, 0, [](u64) { return 1.0; }), ValidationError);
}
