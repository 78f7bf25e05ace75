#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "gt2/sieve.hpp"

using namespace gt2;

namespace {

// Independent simple sieve (no segmentation, no shared code path).
std::vector<u64> naive_primes(u64 n) {
    std::vector<bool> comp(n + 1, false);
    std::vector<u64> out;
    for (u64 i = 2; i <= n; ++i)
        if (!comp[i]) {
            out.push_back(i);
            for (u64 j = i * i; j <= n; j += i) comp[j] = true;
        }
    return out;
}

// Brute-force P2 by enumerating x^2 + y^2 + 1 values directly.
std::set<u64> brute_p2(u64 x_max, bool zero_allowed) {
    std::set<u64> out;
    const u64 lo = zero_allowed ? 0 : 1;
    for (u64 x = lo; x * x + 1 <= x_max; ++x)
        for (u64 y = lo; x * x + y * y + 1 <= x_max; ++y) {
            const u64 p = x * x + y * y + 1;
            if (is_prime(p)) out.insert(p);
        }
    return out;
}

}  // namespace

TEST_CASE("sieve_primes basics") {
    CHECK(sieve_primes(10) == std::vector<u64>{2, 3, 5, 7});
    CHECK(sieve_primes(2) == std::vector<u64>{2});
    CHECK(sieve_primes(1).empty());
    CHECK(sieve_primes(1'000'000).size() == 78498);  // classical pi(1e6)
    CHECK(sieve_primes(1'000'000) == naive_primes(1'000'000));
    CHECK_THROWS_AS(sieve_primes(2'000'000'000ull), ResourceError);
}

TEST_CASE("admissibility sieve agrees with per-integer factorization") {
    const auto base = sieve_primes(1100);
    for (auto [lo, hi] : std::vector<std::pair<u64, u64>>{{1, 5001}, {1'000'000, 1'004'096}}) {
        const auto adm = admissibility_sieve(lo, hi, base);
        for (u64 n = lo; n < hi; ++n) {
            const auto f = factorize(n);
            CHECK(adm.representable(n, true) == sum_two_squares_admissible(f, true));
            CHECK(adm.representable(n, false) == sum_two_squares_admissible(f, false));
            CHECK(adm.primitive(n, true) == primitive_two_squares_admissible(f, true));
            CHECK(adm.primitive(n, false) == primitive_two_squares_admissible(f, false));
        }
    }
}

TEST_CASE("sieve_p2 examples") {
    const auto t = sieve_p2(20);
    CHECK(t.members == std::vector<u64>{2, 3, 5, 11, 17, 19});
    CHECK_FALSE(sieve_p2(30).contains(29));  // 28 = 2^2 * 7, odd power of 7
    CHECK(sieve_p2(1).members.empty());
}

TEST_CASE("sieve_p2 complete against brute-force enumeration up to 1e4") {
    for (bool zero : {true, false}) {
        const auto brute = brute_p2(10'000, zero);
        const auto t = sieve_p2(10'000, zero);
        CHECK(std::set<u64>(t.members.begin(), t.members.end()) == brute);
    }
}

TEST_CASE("sieve_p2 respects segment boundaries") {
    const auto a = sieve_p2(50'000, true, /*segment=*/1024);
    const auto b = sieve_p2(50'000, true, /*segment=*/50'000);
    CHECK(a.members == b.members);
}

TEST_CASE("membership_rq examples") {
    auto c = membership_rq(11, 1);
    REQUIRE(c.has_value());
    CHECK(c->x == 1);
    CHECK(c->y == 3);
    CHECK(c->primitive);

    CHECK_FALSE(membership_rq(11, 2).has_value());  // 10 / 4 not integral

    auto c41 = membership_rq(41, 2);
    REQUIRE(c41.has_value());
    CHECK(c41->x == 1);
    CHECK(c41->y == 3);  // 40 / 4 = 10 = 1 + 9

    CHECK(in_rq(11, 1));
    CHECK_FALSE(in_rq(11, 2));
    CHECK(in_rq(41, 2));
    CHECK_FALSE(in_rq(41, 1));  // 40 = 2^3 * 5 is divisible by 4
}

TEST_CASE("density_report q=1 matches brute force at 1e3") {
    const auto rep = density_report(1, {1000}, WindowKind::UnitToX);
    REQUIRE(rep.checkpoints.size() == 1);
    u64 brute = 0;
    for (u64 p = 2; p <= 1000; ++p) {
        if (!is_prime(p)) continue;
        bool found = false;
        for (u64 x = 0; x * x <= p - 1 && !found; ++x) {
            const u64 rest = p - 1 - x * x;
            const u64 y = isqrt_u64(rest);
            if (y * y == rest && gcd_u64(x, y) == 1) found = true;
        }
        if (found) ++brute;
    }
    CHECK(rep.checkpoints[0].count == brute);
    CHECK(rep.checkpoints[0].fitted_c > 0.0);
}

TEST_CASE("density_report edge cases and windows") {
    CHECK(density_report(1, {}, WindowKind::UnitToX).checkpoints.empty());
    CHECK_THROWS_AS(density_report(1, {10, 5}, WindowKind::UnitToX), ValidationError);
    const auto rep = density_report(0, {100, 1000, 10000}, WindowKind::UnitToX);
    REQUIRE(rep.checkpoints.size() == 3);
    CHECK(rep.checkpoints[0].count <= rep.checkpoints[1].count);
    CHECK(rep.checkpoints[1].count <= rep.checkpoints[2].count);
    // dyadic window counts the [X, 2X] slice
    const auto dy = density_report(0, {100}, WindowKind::Dyadic);
    const auto all200 = sieve_p2(200).members;
    u64 cnt = 0;
    for (u64 p : all200) cnt += (p >= 100 && p <= 200);
    CHECK(dy.checkpoints[0].count == cnt);
}

TEST_CASE("density_report q=2 against direct membership") {
    const auto rep = density_report(2, {2000}, WindowKind::UnitToX);
    u64 brute = 0;
    for (u64 p = 2; p <= 2000; ++p)
        if (is_prime(p) && in_rq(p, 2)) ++brute;
    CHECK(rep.checkpoints[0].count == brute);
}

TEST_CASE("R_1 fitted constants stay within 25% from 1e6 to 1e7") {
    const auto rep = density_report(1, {1'000'000, 10'000'000}, WindowKind::UnitToX);
    REQUIRE(rep.checkpoints.size() == 2);
    const double a = rep.checkpoints[0].fitted_c, b = rep.checkpoints[1].fitted_c;
    CHECK(std::abs(a - b) / std::min(a, b) < 0.25);
}
