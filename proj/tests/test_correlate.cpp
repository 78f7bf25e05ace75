#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gt2/correlate.hpp"
#include "gt2/sieve.hpp"

using namespace gt2;

namespace {

LinearFormSystem sys_x() {
    LinearFormSystem s;
    s.h = 1;
    s.forms.push_back({{1}, 0});
    return s;
}

LinearFormSystem sys_xy() {
    LinearFormSystem s;
    s.h = 2;
    s.forms.push_back({{1, 0}, 0});
    s.forms.push_back({{0, 1}, 0});
    return s;
}

LinearFormSystem sys_x_xpy() {
    LinearFormSystem s;
    s.h = 2;
    s.forms.push_back({{1, 0}, 0});
    s.forms.push_back({{1, 1}, 0});
    return s;
}

Box box1(u64 len, i64 start = 1) {
    Box b;
    b.start = {start};
    b.len = {len};
    return b;
}

Box box2(u64 len, i64 start = 1) {
    Box b;
    b.start = {start, start};
    b.len = {len, len};
    return b;
}

// Independent naive evaluation: divisor sums by trial division over all
// divisors (no shared code with TruncatedDivisorSums).
double naive_lambda(u64 n, double R, bool mu3) {
    double acc = 0.0;
    for (u64 d = 1; d <= n && double(d) <= R; ++d) {
        if (n % d != 0) continue;
        const auto f = factorize(d);
        const int mu = mu3 ? mobius3(f) : mobius(f);
        if (mu == 0) continue;
        acc += mu * (d == 1 ? 1.0 : chi_eval(std::log(double(d)) / std::log(R)));
    }
    return acc;
}

}  // namespace

TEST_CASE("gy_lhs collapses to 1 when R < 2") {
    const auto theta = attach_wtrick(sys_x(), 5, 30, 1, 10);
    CHECK(gy_lhs(theta, 1.5, box1(1000)) == 1.0);
}

TEST_CASE("gy_lhs equals an independent naive double loop") {
    const auto theta = attach_wtrick(sys_x(), 2, 2, 1, 2);
    const double R = 5.0;
    const u64 L = 4000;
    double naive = 0.0;
    for (u64 x = 1; x <= L; ++x) {
        const double l = naive_lambda(2 * x + 3, R, false);
        const double ls = naive_lambda(2 * x + 2, R, true);
        naive += l * l * ls * ls;
    }
    naive /= double(L);
    CHECK(gy_lhs(theta, R, box1(L)) == Catch::Approx(naive).epsilon(1e-12));
}

TEST_CASE("gy_rhs closed forms") {
    CHECK(gy_rhs(2, std::exp(2.0), 1.3447, 0.45, 0) == 1.0);  // m = 0: empty product
    const double R = std::exp(2.0), a0 = 1.3447728, C = 0.4336;
    CHECK(gy_rhs(1, R, a0, C, 1) ==
          Catch::Approx(C * std::sqrt(a0) / std::pow(2.0, 1.5)).epsilon(1e-12));
    CHECK(gy_rhs(2, R, a0, C, 1) ==
          Catch::Approx(C * std::sqrt(a0) / std::pow(2.0, 1.5) * 2.0).epsilon(1e-12));
}

TEST_CASE("rearrangement identity: R < 2 trivial") {
    const auto theta = attach_wtrick(sys_x(), 5, 30, 1, 10);
    const auto rr = rearrangement_check(theta, 1.2, box1(100));
    CHECK(rr.ok);
    CHECK(rr.lhs == 1.0);
    CHECK(rr.rhs == 1.0);
}

TEST_CASE("rearrangement identity: m = 1 toys") {
    const auto theta = attach_wtrick(sys_x(), 5, 30, 1, 10);
    for (double R : {10.0, 30.0}) {
        const auto rr = rearrangement_check(theta, R, box1(100'000));
        INFO("R = " << R << " deviation " << rr.deviation);
        CHECK(rr.ok);
        CHECK(rr.deviation <= 1e-9);
    }
    // W = 2 flavor
    const auto t2 = attach_wtrick(sys_x(), 2, 2, 1, 2);
    const auto rr = rearrangement_check(t2, 12.0, box1(100'000));
    CHECK(rr.ok);
}

TEST_CASE("rearrangement identity: m = 2 separable toy") {
    const auto theta = attach_wtrick(sys_xy(), 5, 30, 1, 10);
    const auto rr = rearrangement_check(theta, 30.0, box2(1000));
    INFO("deviation " << rr.deviation << " tuples " << rr.tuples);
    CHECK(rr.ok);
}

TEST_CASE("rearrangement identity: m = 2 coupled toy") {
    const auto theta = attach_wtrick(sys_x_xpy(), 5, 30, 1, 10);
    const auto rr = rearrangement_check(theta, 10.0, box2(1000));
    INFO("deviation " << rr.deviation << " tuples " << rr.tuples);
    CHECK(rr.ok);
}

TEST_CASE("rearrangement negative control: corrupted chi breaks the identity") {
    const auto theta = attach_wtrick(sys_x(), 5, 30, 1, 10);
    const auto rr = rearrangement_check(theta, 10.0, box1(10'000), 1e-9, /*corrupt_chi=*/0.01);
    CHECK_FALSE(rr.ok);
    CHECK(rr.deviation > 1e-6);
}

TEST_CASE("cfz expectations: empty product and single factor") {
    MeasureParams mp = build_measure_params(930, 3, 5, 30, 1, 10, 0.1);
    NormalizationConstants c;
    c.alpha0 = 1.3447728;
    c.c_chi = calibrate_empirical_c_chi(mp, c.alpha0);
    c.c_chi_variant = CChiVariant::Empirical;
    NuEvaluator nu(mp, c);

    const auto forms = cfz_forms(3);
    const auto empty = cfz_expectation(nu, forms, {{}, "rho{}"}, 1000, 0);
    CHECK(empty.exact);
    CHECK(empty.estimate == 1.0);

    const auto single = cfz_expectation(nu, forms, {{0}, "rho{0}"}, 50'000, 0);
    CHECK(single.estimate == Catch::Approx(1.0).margin(0.01));
    CHECK(single.form_count == 1);

    // determinism: same seed, same answer
    const auto again = cfz_expectation(nu, forms, {{0}, "rho{0}"}, 50'000, 0);
    CHECK(again.estimate == single.estimate);
}

TEST_CASE("cfz sampled mode works at m = 4") {
    MeasureParams mp = build_measure_params(930, 4, 5, 30, 1, 10, 0.1);
    NormalizationConstants c;
    c.alpha0 = 1.3447728;
    c.c_chi = calibrate_empirical_c_chi(mp, c.alpha0);
    NuEvaluator nu(mp, c);
    const auto reports = check_linear_forms(nu, 4, 10'000, 3, RhoMode::Sampled);
    CHECK(reports.size() == 64);
    for (const auto& r : reports) CHECK(std::abs(r.estimate - 1.0) < 0.05);
}

TEST_CASE("rho enumeration") {
    const auto acc = enumerate_rho(12, RhoMode::Acceptance, 0, 4);
    // 1 empty + 12 singles + 66 pairs + 1 full + 4 samples
    CHECK(acc.size() == 1 + 12 + 66 + 1 + 4);
    const auto ex = enumerate_rho(4, RhoMode::Exhaustive, 0);
    CHECK(ex.size() == 16);
    CHECK_THROWS_AS(enumerate_rho(24, RhoMode::Exhaustive, 0), ResourceError);
}

TEST_CASE("lemma31 ratio: all-zero constants give ratio 1") {
    const auto primes = sieve_primes(100'000);
    LemmaCTable t;
    t.c = {0.0};
    const auto pts = lemma31_ratio(t, true, {0.1, 0.01}, 100'000, primes);
    for (const auto& pt : pts) CHECK(pt.ratio == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lemma31 ratio: k=1 c=2 class 3 mod 4 converges") {
    const auto primes = sieve_primes(1'000'000);
    LemmaCTable t;
    t.c = {2.0};
    const auto pts = lemma31_ratio(t, true, {0.1, 0.03, 0.01}, 1'000'000, primes);
    REQUIRE(pts.size() == 3);
    CHECK(std::abs(pts[0].ratio - 1.0) > std::abs(pts[1].ratio - 1.0));
    CHECK(std::abs(pts[1].ratio - 1.0) > std::abs(pts[2].ratio - 1.0));
    CHECK(std::abs(pts[2].ratio - 1.0) < 0.05);
}

TEST_CASE("lemma31 H-proxy: 1/p perturbation pushes the ratio away from 1") {
    const auto primes = sieve_primes(1'000'000);
    LemmaCTable clean, dirty;
    clean.c = {2.0};
    dirty.c = {2.0};
    dirty.perturb_first = true;
    const auto a = lemma31_ratio(clean, true, {0.01}, 1'000'000, primes);
    const auto b = lemma31_ratio(dirty, true, {0.01}, 1'000'000, primes);
    CHECK(std::abs(b[0].ratio - 1.0) > std::abs(a[0].ratio - 1.0));
}

TEST_CASE("lemma31 domain errors") {
    const auto primes = sieve_primes(10'000);
    LemmaCTable t;
    t.c = {5.0};  // 1 - 5/3^s < 0 at the first class prime
    CHECK_THROWS_AS(lemma31_ratio(t, true, {0.01}, 10'000, primes), ValidationError);
    LemmaCTable empty;
    CHECK_THROWS_AS(lemma31_ratio(empty, true, {0.01}, 10'000, primes), ValidationError);
}

TEST_CASE("lemma31 complement class") {
    const auto primes = sieve_primes(1'000'000);
    LemmaCTable t;
    t.c = {1.0};
    const auto pts = lemma31_ratio(t, false, {0.05, 0.01}, 1'000'000, primes);
    CHECK(std::abs(pts[1].ratio - 1.0) < std::abs(pts[0].ratio - 1.0) + 1e-9);
    CHECK(std::abs(pts[1].ratio - 1.0) < 0.1);
}

#ifdef GT2_FIXTURE_DIR
TEST_CASE("shipped toy fixtures load, validate, and satisfy the identity") {
    const std::string dir = GT2_FIXTURE_DIR;
    const auto m1 = load_form_system(dir + "/toy_m1_x.forms");
    CHECK(m1.h == 1);
    CHECK(m1.forms.size() == 1);
    const auto m2s = load_form_system(dir + "/toy_m2_separable.forms");
    CHECK(m2s.h == 2);
    const auto m2c = load_form_system(dir + "/toy_m2_coupled.forms");
    CHECK(m2c.forms.size() == 2);

    Box b;
    b.start = {1, 1};
    b.len = {500, 500};
    const auto rr = rearrangement_check(attach_wtrick(m2c, 5, 30, 1, 10), 10.0, b);
    CHECK(rr.ok);
}
#endif
