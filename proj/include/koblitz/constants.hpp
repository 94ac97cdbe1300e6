#pragma once

// The constants c_{E,t}: universal and CM Euler products with proven
// truncation bounds, exact rational prefactors from group densities, and the
// expected-count integral.

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "koblitz/galois.hpp"
#include "koblitz/numtheory.hpp"

namespace koblitz::constants {

using Rational = mpq_class;
using u64 = std::uint64_t;
using i64 = std::int64_t;

inline constexpr u64 kDefaultEulerLimit = 100000000;

struct EulerProduct {
    long double value = 0;
    /// Absolute bound on |value - full product|. Rigorous unless `heuristic`.
    long double tail_bound = 0;
    u64 limit = 0;
    bool heuristic = false;
};

/// f(l) = (l^2 - l - 1) / ((l - 1)^3 (l + 1)).
Rational universal_defect(u64 l);
/// 1 - f(l), exactly.
Rational universal_factor(u64 l);

/// prod_{l <= limit} (1 - f(l)). Cached per limit; limit >= 1000.
EulerProduct universal_euler(u64 limit = kDefaultEulerLimit);

/// 1 - chi(l) (l^2 - l - 1) / ((l - chi(l)) (l - 1)^2), exactly.
Rational cm_factor(const numtheory::KroneckerChar& chi, u64 l);

/// prod over l not dividing D of cm_factor, for an imaginary quadratic
/// character chi_D. Evaluated as L(1, chi)^{-1} times an absolutely
/// convergent product.
EulerProduct cm_euler(const numtheory::KroneckerChar& chi, u64 limit = kDefaultEulerLimit);

/// Plain partial product of cm_factor. The tail estimate assumes square-root
/// cancellation in sum chi(l)/l and is marked heuristic.
EulerProduct cm_euler_naive(const numtheory::KroneckerChar& chi, u64 limit);

/// L(1, chi_D) for D < 0 by the class number formula.
long double l_one(i64 D);

struct KoblitzConstant {
    Rational rational_prefactor;
    long double euler_value = 0;
    long double tail_bound = 0;
    long double value = 0;
    u64 truncation_limit = 0;
};

/// Non-CM constant at (spec, t). The spec is lifted to t rad(tM) when needed.
KoblitzConstant assemble_noncm(const galois::GroupSpec& spec, u64 t,
                               u64 limit = kDefaultEulerLimit,
                               const galois::EnumerationOptions& opts = {});

/// Exact prefactor of assemble_noncm, without the Euler product.
Rational noncm_prefactor(const galois::GroupSpec& spec, u64 t,
                         const galois::EnumerationOptions& opts = {});

/// CM constant over Q(i) with M = 2; t must be a power of two and the unit
/// group level 2^k must equal 2t.
KoblitzConstant assemble_cm(const galois::CMUnitGroupSpec& cm, u64 t,
                            u64 limit = kDefaultEulerLimit);

/// Closed form for Serre curves with field discriminant D.
KoblitzConstant serre_closed_form(i64 D, u64 limit = kDefaultEulerLimit);

/// True iff delta_t(m) = 0 for some probe level m. Empty probes mean the
/// level t rad(tM).
bool obstruction_check(const galois::GroupSpec& spec, u64 t, const std::vector<u64>& probe_levels = {},
                       const galois::EnumerationOptions& opts = {});

struct IntegralOptions {
    double tolerance = 1e-3;
    /// Use 1/(log(u+1) log u), keeping the lower limit t + 1.
    bool drop_log_t = false;
};

/// int_{t+1}^x du / ((log(u+1) - log t) log u)
long double koblitz_integral(u64 t, long double x, const IntegralOptions& opts = {});

struct ExpectedCount {
    long double integral = 0;
    long double raw = 0;
    i64 rounded = 0;
    /// raw is within the quadrature tolerance of a half-integer.
    bool ambiguous = false;
};

ExpectedCount expected_count(const KoblitzConstant& c, u64 t, long double x,
                             const IntegralOptions& opts = {});

/// Structured record: prefactor as a fraction, Euler value, tail bound,
/// value and truncation limit.
std::string to_json(const KoblitzConstant& c);

long double to_long_double(const Rational& q);

}  // namespace koblitz::constants
