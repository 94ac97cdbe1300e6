#pragma once

// Elliptic curves over Q in long Weierstrass form, their reductions modulo
// good primes, and exact point counting over F_p.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace koblitz::curve {

using Integer = mpz_class;
using u64 = std::uint64_t;
using i64 = std::int64_t;

/// Long Weierstrass coefficients [a1, a2, a3, a4, a6].
using Coefficients = std::array<Integer, 5>;

/// Standard discriminant of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
Integer discriminant(const Coefficients& a);

/// E over Q given by an integral long Weierstrass model. Immutable once built;
/// construction rejects singular models.
class CurveQ {
public:
    explicit CurveQ(Coefficients a);
    /// Short form y^2 = x^3 + A x + B, i.e. [0, 0, 0, A, B].
    static CurveQ short_form(const Integer& A, const Integer& B);

    const Coefficients& coefficients() const { return a_; }
    const Integer& a1() const { return a_[0]; }
    const Integer& a2() const { return a_[1]; }
    const Integer& a3() const { return a_[2]; }
    const Integer& a4() const { return a_[3]; }
    const Integer& a6() const { return a_[4]; }
    const Integer& disc() const { return disc_; }
    const Integer& c4() const { return c4_; }
    const Integer& c6() const { return c6_; }
    /// Primes dividing the discriminant of this model, increasing.
    const std::vector<u64>& bad_primes() const { return bad_primes_; }
    bool has_good_reduction(u64 p) const;

    /// "[a1,a2,a3,a4,a6]"
    std::string to_string() const;

private:
    Coefficients a_;
    Integer disc_, c4_, c6_;
    std::vector<u64> bad_primes_;
};

/// Trace of Frobenius data at one good prime; n_points = p + 1 - a_p.
struct PrimeRecord {
    u64 p;
    i64 a_p;
    u64 n_points;
};

/// Reduction of a CurveQ modulo a good prime. For p > 3 the isomorphic short
/// form y^2 = x^3 + A x + B is also stored.
struct ReducedCurve {
    u64 p;
    std::array<u64, 5> a;  // long coefficients mod p
    u64 A = 0;
    u64 B = 0;

    bool has_short_form() const { return p > 3; }
};

/// Returns nullopt when p divides the discriminant.
std::optional<ReducedCurve> try_reduce(const CurveQ& curve, u64 p);
/// Throws BadReduction when p divides the discriminant.
ReducedCurve reduce(const CurveQ& curve, u64 p);

/// Short-form curve y^2 = x^3 + A x + B over F_p, p > 3, 4A^3 + 27B^2 != 0.
ReducedCurve short_curve(u64 p, u64 A, u64 B);

/// Quadratic twist y^2 = x^3 + A d^2 x + B d^3 (p > 3).
ReducedCurve quadratic_twist(const ReducedCurve& rc, u64 d);

struct PointCountOptions {
    /// Primes at or below this use the O(p) character sum.
    u64 naive_limit = u64{1} << 16;
    /// Seeds the random points of the order-finding search.
    u64 seed = 0;
};

/// |E(F_p)| including the point at infinity.
u64 point_count(const ReducedCurve& rc, const PointCountOptions& opts = {});

/// O(p) count: character sum for p > 3, full enumeration for p in {2, 3}.
u64 point_count_naive(const ReducedCurve& rc);

/// Order-finding count for p > 3: baby-step giant-step over the whole Hasse
/// interval for random points on E and its twist until one group order is
/// left. Falls back to the naive count if that never happens.
u64 point_count_bsgs(const ReducedCurve& rc, u64 seed = 0);

/// a_p = p + 1 - |E(F_p)|. Throws BadReduction at bad primes.
i64 a_p(const CurveQ& curve, u64 p, const PointCountOptions& opts = {});

PrimeRecord prime_record(const CurveQ& curve, u64 p, const PointCountOptions& opts = {});

/// Parses "[a1,a2,a3,a4,a6]" or the short form "[A,B]".
CurveQ parse_curve(const std::string& text);

}  // namespace koblitz::curve
