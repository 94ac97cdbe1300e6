#include <doctest.h>

#include <random>

#include "koblitz/curve.hpp"
#include "koblitz/errors.hpp"
#include "koblitz/numtheory.hpp"

using namespace koblitz::curve;
namespace nt = koblitz::numtheory;
using koblitz::BadReduction;

namespace {

const CurveQ& e5() {
    static const CurveQ c = CurveQ::short_form(6, -2);
    return c;
}
const CurveQ& e6() {
    static const CurveQ c = CurveQ::short_form(9, 18);
    return c;
}
const CurveQ& e7() {
    static const CurveQ c = CurveQ::short_form(-1, 0);
    return c;
}
const CurveQ& x011() {
    static const CurveQ c(Coefficients{0, -1, 1, -10, -20});
    return c;
}

// Independent textbook discriminant: -16(4a^3 + 27b^2) after completing the
// square and the cube over Q.
mpq_class disc_oracle(const Coefficients& c) {
    mpq_class a1 = c[0], a2 = c[1], a3 = c[2], a4 = c[3], a6 = c[4];
    // y -> y - (a1 x + a3)/2 gives y^2 = x^3 + s2 x^2 + s4 x + s6
    mpq_class s2 = a2 + a1 * a1 / 4;
    mpq_class s4 = a4 + a1 * a3 / 2;
    mpq_class s6 = a6 + a3 * a3 / 4;
    // x -> x - s2/3
    mpq_class A = s4 - s2 * s2 / 3;
    mpq_class B = s6 - s2 * s4 / 3 + 2 * s2 * s2 * s2 / 27;
    return -16 * (4 * A * A * A + 27 * B * B);
}

// Affine points of the long model by brute force, plus infinity.
u64 brute_count(const CurveQ& e, u64 p) {
    auto m = [p](const Integer& z) {
        Integer r = z % static_cast<unsigned long>(p);
        if (r < 0) r += static_cast<unsigned long>(p);
        return r.get_ui();
    };
    const u64 a1 = m(e.a1()), a2 = m(e.a2()), a3 = m(e.a3()), a4 = m(e.a4()), a6 = m(e.a6());
    u64 n = 1;
    for (u64 x = 0; x < p; ++x) {
        const u64 rhs = ((x * x % p) * x + a2 * (x * x % p) + a4 * x + a6) % p;
        for (u64 y = 0; y < p; ++y)
            if ((y * y + a1 * x % p * y + a3 * y) % p == rhs) ++n;
    }
    return n;
}

// Character sum with Euler's criterion as the Legendre symbol.
u64 euler_count(u64 p, u64 A, u64 B) {
    i64 s = 0;
    for (u64 x = 0; x < p; ++x) {
        const u64 f = nt::addmod(
            nt::addmod(nt::mulmod(nt::mulmod(x, x, p), x, p), nt::mulmod(A, x, p), p), B, p);
        if (f == 0) continue;
        s += nt::powmod(f, (p - 1) / 2, p) == 1 ? 1 : -1;
    }
    return static_cast<u64>(static_cast<i64>(p + 1) + s);
}

}  // namespace

TEST_CASE("discriminant examples") {
    CHECK(e5().disc() == Integer(-64 * 243));
    CHECK(e6().disc() == Integer(-256 * 729));
    CHECK(x011().disc() == Integer(-161051));
    for (const CurveQ* c : {&e5(), &e6(), &e7(), &x011()}) {
        CHECK(discriminant(c->coefficients()) == c->disc());
        CHECK(mpq_class(c->disc()) == disc_oracle(c->coefficients()));
    }
    CHECK(x011().bad_primes() == std::vector<u64>{11});
    CHECK(e5().bad_primes() == std::vector<u64>{2, 3});
    CHECK(e7().bad_primes() == std::vector<u64>{2});
}

TEST_CASE("discriminant agrees with the oracle on random models") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        Coefficients c;
        for (auto& z : c) z = static_cast<long>(rng() % 2001) - 1000;
        if (discriminant(c) == 0) continue;
        REQUIRE(mpq_class(discriminant(c)) == disc_oracle(c));
    }
}

TEST_CASE("singular models are rejected") {
    CHECK_THROWS_AS(CurveQ::short_form(0, 0), koblitz::DomainError);
    CHECK_THROWS_AS(CurveQ::short_form(-3, 2), koblitz::DomainError);
}

TEST_CASE("large discriminant factors") {
    // 4A^3 + 27B^2 with a big prime factor still gets split
    const CurveQ c = CurveQ::short_form(Integer("1000000007"), Integer("998244353"));
    Integer rest = abs(c.disc());
    for (u64 q : c.bad_primes()) {
        REQUIRE(nt::is_prime(q));
        while (rest % static_cast<unsigned long>(q) == 0) rest /= static_cast<unsigned long>(q);
    }
    CHECK(rest == 1);
}

TEST_CASE("reduce") {
    CHECK(try_reduce(e5(), 5).has_value());
    CHECK_THROWS_AS(reduce(e5(), 3), BadReduction);
    CHECK_THROWS_AS(reduce(x011(), 11), BadReduction);
    try {
        reduce(x011(), 11);
    } catch (const BadReduction& e) {
        CHECK(e.prime == 11);
    }
}

TEST_CASE("point_count examples") {
    CHECK(point_count(reduce(e6(), 5)) == 3);
    CHECK(point_count(reduce(x011(), 3)) == 5);
    CHECK(point_count(reduce(e7(), 5)) == 8);
    CHECK(brute_count(e7(), 5) == 8);
    CHECK(a_p(e6(), 5) == 3);
    CHECK(a_p(x011(), 3) == -1);
    CHECK(point_count(reduce(x011(), 2)) == 5);
}

TEST_CASE("a_p at 10^6+3 by both paths") {
    const u64 p = 1000003;
    const ReducedCurve rc = reduce(e5(), p);
    const u64 naive = point_count_naive(rc);
    CHECK(naive == euler_count(p, rc.A, rc.B));
    CHECK(naive == point_count_bsgs(rc, 1));
    CHECK(a_p(e5(), p) == static_cast<i64>(p + 1) - static_cast<i64>(naive));
}

TEST_CASE("small primes: all paths match brute force on long models") {
    for (const CurveQ* c : {&e5(), &e6(), &e7(), &x011()}) {
        for (u64 p : nt::small_primes(400)) {
            auto rc = try_reduce(*c, p);
            if (!rc) continue;
            const u64 want = brute_count(*c, p);
            REQUIRE(point_count_naive(*rc) == want);
            REQUIRE(point_count(*rc, {0, 0}) == want);
            if (p > 3) REQUIRE(point_count_bsgs(*rc, p) == want);
        }
    }
}

TEST_CASE("Hasse, twist identity and dual path on random pairs") {
    std::mt19937_64 rng(2024);
    const u64 lo = (u64{1} << 16) / 4, hi = 4 * (u64{1} << 16);
    int done = 0;
    while (done < 10000) {
        const u64 p = lo + rng() % (hi - lo);
        if (!nt::is_prime(p)) continue;
        const u64 A = rng() % p, B = rng() % p;
        ReducedCurve rc;
        try {
            rc = short_curve(p, A, B);
        } catch (const BadReduction&) {
            continue;
        }
        const u64 naive = point_count_naive(rc);
        const u64 fast = point_count_bsgs(rc, rng());
        REQUIRE(naive == fast);
        const i64 a = static_cast<i64>(p + 1) - static_cast<i64>(naive);
        REQUIRE(static_cast<u64>(a * a) <= 4 * p);
        u64 d = 2;
        while (nt::kronecker(static_cast<i64>(d), static_cast<i64>(p)) != -1) ++d;
        REQUIRE(naive + point_count_bsgs(quadratic_twist(rc, d), rng()) == 2 * p + 2);
        ++done;
    }
}

TEST_CASE("BSGS on large primes respects Hasse and the twist identity") {
    std::mt19937_64 rng(77);
    int done = 0;
    while (done < 300) {
        const u64 p = (rng() >> (2 + rng() % 30)) | 1;
        if (p < 5 || !nt::is_prime(p)) continue;
        ReducedCurve rc;
        try {
            rc = short_curve(p, rng() % p, rng() % p);
        } catch (const BadReduction&) {
            continue;
        }
        const u64 n = point_count_bsgs(rc, 1);
        const __int128 a = static_cast<__int128>(p) + 1 - n;
        REQUIRE(a * a <= static_cast<__int128>(p) * 4);
        REQUIRE(n == point_count_bsgs(rc, 99));
        u64 d = 2;
        while (nt::kronecker(static_cast<i64>(d), static_cast<i64>(p)) != -1) ++d;
        const u64 twisted = point_count_bsgs(quadratic_twist(rc, d), 5);
        REQUIRE(static_cast<unsigned __int128>(n) + twisted == 2 * static_cast<unsigned __int128>(p) + 2);
        ++done;
    }
}

TEST_CASE("divisibility patterns of the example curves") {
    nt::primes_in(3, 100000, [&](u64 p) {
        if (auto rc = try_reduce(e6(), p)) {
            const u64 n = point_count(*rc);
            if (p % 4 == 1) REQUIRE(n % 3 == 0);
            if (p % 4 == 3) REQUIRE(n % 2 == 0);
        }
        if (auto rc = try_reduce(x011(), p)) REQUIRE(point_count(*rc) % 5 == 0);
        if (auto rc = try_reduce(e7(), p)) {
            const u64 n = point_count(*rc);
            if (p % 4 == 1) REQUIRE(n % 8 == 0);
            if (p % 4 == 3) REQUIRE(n == p + 1);
        }
    });
}

TEST_CASE("parse_curve") {
    CHECK(parse_curve("[6,-2]").to_string() == "[0,0,0,6,-2]");
    CHECK(parse_curve("[0, -1, 1, -10, -20]").disc() == Integer(-161051));
    CHECK_THROWS_AS(parse_curve("[1,2,3]"), koblitz::ConfigError);
    CHECK_THROWS_AS(parse_curve("1,2"), koblitz::ConfigError);
    CHECK_THROWS_AS(parse_curve("[a,2]"), koblitz::ConfigError);
}
