#include <doctest.h>

#include <cmath>

#include "koblitz/constants.hpp"
#include "koblitz/errors.hpp"

using namespace koblitz::constants;
namespace gl = koblitz::galois;
namespace nt = koblitz::numtheory;

namespace {

constexpr long double kE = 0.505166168239435774L;
constexpr long double kCM = 1.067350894L;

Rational q(long a, long b) { return Rational(a, b); }

// composite Simpson in s = log u with a fixed fine grid
long double reference_integral(u64 t, long double x, bool drop) {
    const long double a = std::log(static_cast<long double>(t) + 1), b = std::log(x);
    const long double lt = std::log(static_cast<long double>(t));
    auto g = [&](long double s) {
        const long double u = std::exp(s);
        return u / ((std::log1p(u) - (drop ? 0 : lt)) * s);
    };
    const int n = 2000000;
    const long double h = (b - a) / n;
    long double sum = g(a) + g(b);
    for (int i = 1; i < n; ++i) sum += g(a + i * h) * (i % 2 ? 4 : 2);
    return sum * h / 3;
}

}  // namespace

TEST_CASE("local factors") {
    CHECK(universal_factor(2) == q(2, 3));
    CHECK(universal_defect(3) == q(5, 32));
    CHECK(cm_factor(nt::KroneckerChar{-4}, 3) == 1 + q(5, 16));
    CHECK(cm_factor(nt::KroneckerChar{-4}, 5) == 1 - q(19, 64));
}

TEST_CASE("per-factor log bounds behind the tail majorants") {
    for (u64 l = 3; l < 200000; ++l) {
        const long double L = static_cast<long double>(l);
        const long double f = (L * L - L - 1) / ((L - 1) * (L - 1) * (L - 1) * (L + 1));
        REQUIRE(std::fabs(std::log1p(-f)) <= 2 / (L * L));
        if (l >= 1000) {
            const long double g = 1 - 1 / ((L - 1) * (L - 1));
            REQUIRE(std::fabs(2 * std::log(g)) <= 2.5L / (L * L));
            REQUIRE(std::fabs(std::log1p(-1 / ((L * L - 1) * (L * L - 1)))) <= 2.5L / (L * L));
        }
    }
}

TEST_CASE("universal Euler product") {
    long double prev = 1;
    for (u64 lim : {1000ull, 10000ull, 100000ull, 1000000ull, 10000000ull}) {
        const EulerProduct e = universal_euler(lim);
        CHECK(e.value < prev);
        CHECK(e.value > 0.5L);
        CHECK(e.tail_bound > 0);
        CHECK(std::fabs(e.value - kE) <= e.tail_bound);
        prev = e.value;
    }
    const EulerProduct e7 = universal_euler(10000000);
    CHECK(std::fabs(e7.value - kE) < 1e-6L);
    const EulerProduct e8 = universal_euler(100000000);
    CHECK(std::fabs(e7.value - e8.value) < e7.tail_bound);
    CHECK(std::fabs(e8.value - kE) <= e8.tail_bound);
    CHECK(e8.value > 0.505166L);
    CHECK(e8.value < 0.505167L);
    CHECK_THROWS_AS(universal_euler(10), koblitz::DomainError);
}

TEST_CASE("CM Euler product: accelerated and naive paths") {
    const nt::KroneckerChar chi{-4};
    CHECK(std::fabs(l_one(-4) - std::acos(-1.0L) / 4) < 1e-18L);
    for (u64 lim : {10000ull, 100000ull, 1000000ull}) {
        const EulerProduct fast = cm_euler(chi, lim);
        const EulerProduct slow = cm_euler_naive(chi, lim);
        CHECK(slow.heuristic);
        CHECK_FALSE(fast.heuristic);
        CHECK(std::fabs(fast.value - slow.value) <= slow.tail_bound);
        CHECK(std::fabs(fast.value - kCM) <= fast.tail_bound + 1e-9L);
    }
    const EulerProduct e8 = cm_euler(chi, 100000000);
    CHECK(std::fabs(e8.value - kCM) < 1e-8L);
    CHECK(e8.tail_bound < 1e-8L);
}

TEST_CASE("non-CM prefactors") {
    CHECK(noncm_prefactor(gl::builtin_spec("serre(-3)"), 1) == q(10, 9));
    const gl::GroupSpec j = gl::builtin_spec("jones_x3_9x_18");
    CHECK(noncm_prefactor(j, 2) == q(154, 219));
    CHECK(noncm_prefactor(j, 3) == q(6160, 5913));
    CHECK(noncm_prefactor(j, 6) == q(308, 657));
    CHECK(noncm_prefactor(j, 1) == 0);
    CHECK(noncm_prefactor(gl::builtin_spec("x0_11"), 5) == q(62208, 78913));
    for (u64 m : {1ull, 2ull, 6ull, 30ull})
        CHECK(noncm_prefactor(gl::full_gl2_spec(m), 1) == 1);
    const KoblitzConstant c = assemble_noncm(gl::builtin_spec("serre(-3)"), 1);
    CHECK(std::fabs(c.value - 0.5612957424882619712979385L) <= c.tail_bound);
    CHECK(c.truncation_limit == kDefaultEulerLimit);
}

TEST_CASE("Serre closed form agrees with generic assembly") {
    for (i64 D : {-3, -4, -7, -8, -11}) {
        const KoblitzConstant a = serre_closed_form(D);
        const KoblitzConstant b = assemble_noncm(gl::serre_spec(D), 1);
        INFO("D = " << D);
        CHECK(a.rational_prefactor == b.rational_prefactor);
        CHECK(std::fabs(a.value - b.value) <= a.tail_bound + b.tail_bound);
    }
    CHECK(serre_closed_form(-3).rational_prefactor == q(10, 9));
    CHECK(serre_closed_form(-4).rational_prefactor == 1);
    CHECK(serre_closed_form(-7).rational_prefactor == q(242, 241));
    CHECK_THROWS_AS(serre_closed_form(-5), koblitz::InvalidDiscriminant);
    CHECK_THROWS_AS(serre_closed_form(-12), koblitz::InvalidDiscriminant);
}

TEST_CASE("CM assembly") {
    const KoblitzConstant c = assemble_cm({4, 3}, 8);
    CHECK(c.rational_prefactor == 1);
    CHECK(std::fabs(c.value - kCM) < 1e-8L);
    CHECK(std::fabs(c.value / 2 - 0.533675447L) < 1e-9L);
    CHECK_THROWS_AS(assemble_cm({4, 3}, 6), koblitz::DomainError);
    CHECK_THROWS_AS(assemble_cm({5, 3}, 8), koblitz::ConfigError);
}

TEST_CASE("obstructions") {
    const gl::GroupSpec j = gl::builtin_spec("jones_x3_9x_18");
    CHECK(obstruction_check(j, 1, {36}));
    CHECK(obstruction_check(j, 1));
    CHECK_FALSE(obstruction_check(j, 6));
    CHECK_FALSE(obstruction_check(j, 2));
    CHECK_FALSE(obstruction_check(gl::full_gl2_spec(2), 1));
    CHECK_FALSE(obstruction_check(gl::builtin_spec("x0_11"), 5));
    CHECK(obstruction_check(gl::builtin_spec("x0_11"), 1));
    // obstructed pairs assemble to zero
    CHECK(assemble_noncm(j, 1, 1000).value == 0);
    CHECK(assemble_noncm(gl::builtin_spec("x0_11"), 1, 1000).rational_prefactor == 0);
}

TEST_CASE("expected counts") {
    const KoblitzConstant s3 = assemble_noncm(gl::builtin_spec("serre(-3)"), 1);
    CHECK(expected_count(s3, 1, 2e7L).rounded == 45592);
    CHECK(expected_count(s3, 1, 4e7L).rounded == 83564);
    const KoblitzConstant x5 = assemble_noncm(gl::builtin_spec("x0_11"), 5);
    CHECK(expected_count(x5, 5, 2e7L).rounded == 36091);
    IntegralOptions drop;
    drop.drop_log_t = true;
    const ExpectedCount r = expected_count(x5, 5, 1e9L, drop);
    CHECK(std::llabs(r.rounded - 1033120) <= 2);
    CHECK_THROWS_AS(expected_count(s3, 1, 2.0L), koblitz::DomainError);
}

TEST_CASE("quadrature against a fixed-grid reference") {
    for (u64 t : {1ull, 2ull, 5ull, 8ull}) {
        for (long double x : {1e3L, 1e6L, 4e7L}) {
            const long double got = koblitz_integral(t, x);
            CHECK(std::fabs(got - reference_integral(t, x, false)) < 1e-3L);
        }
    }
    IntegralOptions drop;
    drop.drop_log_t = true;
    CHECK(std::fabs(koblitz_integral(5, 1e9L, drop) - reference_integral(5, 1e9L, true)) < 1e-3L);
}

TEST_CASE("expected counts are monotone in x and continuous in the constant") {
    KoblitzConstant c = assemble_noncm(gl::builtin_spec("serre(-3)"), 1, 1000);
    long double prev = 0;
    for (long double x = 10; x < 1e8L; x *= 3.7L) {
        const long double v = expected_count(c, 1, x).raw;
        CHECK(v > prev);
        prev = v;
    }
    const long double base = expected_count(c, 1, 1e6L).raw;
    c.value *= 1 + 1e-12L;
    CHECK(std::fabs(expected_count(c, 1, 1e6L).raw - base) < 1e-6L);
}

TEST_CASE("constant record") {
    const KoblitzConstant c = serre_closed_form(-3, 1000);
    const std::string s = to_json(c);
    CHECK(s.find("\"prefactor\": \"10/9\"") != std::string::npos);
    CHECK(s.find("\"truncation_limit\": 1000") != std::string::npos);
}
