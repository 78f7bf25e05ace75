#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <numeric>
#include <vector>

#include "gt2/arith.hpp"
#include "gt2/rng.hpp"

using namespace gt2;

namespace {

// Independent oracle: trial division primality.
bool trial_division_prime(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Independent oracle: trial division factorization as a map.
std::map<u64, u32> trial_division_factor(u64 n) {
    std::map<u64, u32> f;
    for (u64 d = 2; d * d <= n; ++d)
        while (n % d == 0) {
            ++f[d];
            n /= d;
        }
    if (n > 1) ++f[n];
    return f;
}

}  // namespace

TEST_CASE("is_prime matches trial division") {
    CHECK(is_prime(2));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(0));
    CHECK(is_prime(1000003));  // trial division up to 1001 confirms
    CHECK(trial_division_prime(1000003));
    for (u64 n = 0; n <= 2000; ++n) CHECK(is_prime(n) == trial_division_prime(n));
    // a few 64-bit-scale cases
    CHECK(is_prime(2147483647ull));            // 2^31 - 1
    CHECK_FALSE(is_prime(2147483647ull * 3));  // composite
    CHECK(is_prime(18446744073709551557ull));  // largest 64-bit prime
}

TEST_CASE("factorize examples and validity") {
    auto f28 = factorize(28);
    REQUIRE(f28.factors.size() == 2);
    CHECK(f28.factors[0].prime == 2);
    CHECK(f28.factors[0].exponent == 2);
    CHECK(f28.factors[1].prime == 7);
    CHECK(f28.factors[1].exponent == 1);
    CHECK(f28.valid());

    auto f1 = factorize(1);
    CHECK(f1.factors.empty());
    CHECK(f1.valid());

    auto f9991 = factorize(9991);
    REQUIRE(f9991.factors.size() == 2);
    CHECK(f9991.factors[0].prime == 97);
    CHECK(f9991.factors[1].prime == 103);

    CHECK_THROWS_AS(factorize(0), ValidationError);

    // repeated calls identical
    auto again = factorize(9991);
    CHECK(again.factors == f9991.factors);
}

TEST_CASE("factorize round-trips against trial division and re-multiplication") {
    for (u64 trial = 0; trial < 300; ++trial) {
        // assemble n from random small prime powers
        static const u64 pool[] = {2, 3, 5, 7, 11, 13, 17, 97, 101, 257, 65537, 999983};
        u64 n = 1;
        for (int j = 0; j < 4; ++j) {
            const u64 p = pool[counter_uniform(42, trial, j, 12)];
            const u32 e = u32(counter_uniform(43, trial, j, 3));
            for (u32 k = 0; k < e && n < (1ull << 40); ++k) n *= p;
        }
        auto f = factorize(n);
        CHECK(f.valid());
        u64 back = 1;
        for (const auto& pe : f.factors)
            for (u32 k = 0; k < pe.exponent; ++k) back *= pe.prime;
        CHECK(back == n);
        if (n <= 1'000'000) {
            auto oracle = trial_division_factor(n);
            std::map<u64, u32> got;
            for (const auto& pe : f.factors) got[pe.prime] = pe.exponent;
            CHECK(got == oracle);
        }
    }
    // deterministic rho fallback on a semiprime beyond the trial range
    const u64 p = 1000003, q = 1000033;
    auto f = factorize(p * q);
    REQUIRE(f.factors.size() == 2);
    CHECK(f.factors[0].prime == p);
    CHECK(f.factors[1].prime == q);
}

TEST_CASE("euler_phi examples") {
    CHECK(euler_phi(factorize(1)) == 1);
    CHECK(euler_phi(factorize(9)) == 6);  // count of units mod 9
    {
        u64 units = 0;
        for (u64 k = 1; k <= 9; ++k) units += gcd_u64(k, 9) == 1;
        CHECK(units == 6);
    }
    CHECK(euler_phi(factorize(36)) == 12);  // phi(q^2) for q = 6
}

TEST_CASE("mobius and mobius3 examples") {
    CHECK(mobius(factorize(1)) == 1);
    CHECK(mobius(factorize(6)) == 1);
    CHECK(mobius(factorize(12)) == 0);
    CHECK(mobius3(factorize(1)) == 1);
    CHECK(mobius3(factorize(3)) == -1);
    CHECK(mobius3(factorize(5)) == 0);   // 5 = 1 mod 4
    CHECK(mobius3(factorize(21)) == 1);  // 3 * 7, both = 3 mod 4
    CHECK(mobius3(factorize(9)) == 0);   // square
}

TEST_CASE("mobius3 supported on squarefree numbers up to 1e5") {
    for (u64 n = 1; n <= 100'000; ++n) {
        auto f = factorize(n);
        if (mobius(f) == 0) CHECK(mobius3(f) == 0);
    }
}

TEST_CASE("two_squares certificates and examples") {
    auto c2 = two_squares(2, true);
    REQUIRE(c2.has_value());
    CHECK(c2->x == 1);
    CHECK(c2->y == 1);
    CHECK(c2->check());

    CHECK_FALSE(two_squares(28, false).has_value());  // 7 | 28 to an odd power

    auto c10 = two_squares(10, true);
    REQUIRE(c10.has_value());
    CHECK(c10->x == 1);
    CHECK(c10->y == 3);
    CHECK(c10->primitive);

    // canonical: minimal x
    auto c25 = two_squares(25, false);
    REQUIRE(c25.has_value());
    CHECK(c25->x == 0);  // 0^2 + 5^2 with zero allowed
    auto c25p = two_squares(25, true);
    REQUIRE(c25p.has_value());
    CHECK(c25p->x == 3);
    CHECK(c25p->y == 4);
}

TEST_CASE("two_squares convention flag") {
    // zero excluded: 1, 4, 9, 16 lose their only representations
    CHECK(two_squares(1, false, true).has_value());
    CHECK_FALSE(two_squares(1, false, false).has_value());
    CHECK(two_squares(4, false, true).has_value());
    CHECK_FALSE(two_squares(4, false, false).has_value());
    CHECK(two_squares(2, false, false).has_value());   // 1 + 1
    CHECK(two_squares(18, false, false).has_value());  // 9 + 9
    CHECK_FALSE(two_squares(16, false, false).has_value());
    // primitive with zero excluded: only n = 1 changes
    CHECK(two_squares(1, true, true).has_value());
    CHECK_FALSE(two_squares(1, true, false).has_value());
    CHECK(two_squares(5, true, false).has_value());
}

TEST_CASE("two_squares criterion agrees with exhaustive search up to 1e5") {
    const u64 LIM = 100'000;
    // exhaustive marks, both conventions, plain and primitive
    std::vector<u8> any_z(LIM + 1, 0), any_p(LIM + 1, 0), prim_z(LIM + 1, 0), prim_p(LIM + 1, 0);
    for (u64 x = 0; x * x <= LIM; ++x)
        for (u64 y = x; x * x + y * y <= LIM; ++y) {
            const u64 n = x * x + y * y;
            any_z[n] = 1;
            if (x >= 1) any_p[n] = 1;
            if (gcd_u64(x, y) == 1) {
                prim_z[n] = 1;
                if (x >= 1) prim_p[n] = 1;
            }
        }
    for (u64 n = 1; n <= LIM; ++n) {
        auto f = factorize(n);
        CHECK(sum_two_squares_admissible(f, true) == bool(any_z[n]));
        CHECK(sum_two_squares_admissible(f, false) == bool(any_p[n]));
        CHECK(primitive_two_squares_admissible(f, true) == bool(prim_z[n]));
        CHECK(primitive_two_squares_admissible(f, false) == bool(prim_p[n]));
    }
}

TEST_CASE("mobius3 Dirichlet series matches the restricted Euler product at s=2") {
    // mu3 via a smallest-prime-factor sieve (independent of factorize)
    const u64 LIM = 1'000'000;
    std::vector<u32> spf(LIM + 1, 0);
    for (u64 i = 2; i <= LIM; ++i) {
        if (spf[i] == 0)
            for (u64 j = i; j <= LIM; j += i)
                if (spf[j] == 0) spf[j] = u32(i);
    }
    long double series = 0.0L;
    for (u64 n = 1; n <= LIM; ++n) {
        u64 m = n;
        int mu3 = 1;
        while (m > 1) {
            const u32 p = spf[m];
            m /= p;
            if (m % p == 0 || p % 4 != 3) {
                mu3 = 0;
                break;
            }
            mu3 = -mu3;
        }
        if (mu3 != 0) series += (long double)mu3 / ((long double)n * (long double)n);
    }
    long double prod = 1.0L;
    for (u64 p = 3; p <= LIM; p += 4)
        if (spf[p] == p) prod *= (1.0L - 1.0L / ((long double)p * (long double)p));
    CHECK(std::abs(double(series - prod)) < 1e-6);
    // spot-check the sieve's mu3 against the library on a sample
    for (u64 n = 1; n <= 3000; ++n) {
        u64 m = n;
        int mu3 = 1;
        while (m > 1) {
            const u32 p = spf[m];
            m /= p;
            if (m % p == 0 || p % 4 != 3) {
                mu3 = 0;
                break;
            }
            mu3 = -mu3;
        }
        CHECK(mu3 == mobius3(factorize(n)));
    }
}
