#include "koblitz/constants.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>

#include <json.hpp>

#include "koblitz/errors.hpp"

namespace koblitz::constants {

namespace nt = koblitz::numtheory;
namespace gl = koblitz::galois;

namespace {

constexpr u64 kMinLimit = 1000;

// sum_{p > L} 1/p^2 <= 2 int_L^oo pi(u) u^-3 du with pi(u) < 1.25506 u / log u
long double prime_square_tail(u64 L) {
    const long double l = static_cast<long double>(L);
    return 2.51012L / (l * std::log(l));
}

// accumulated rounding of n long double multiplications, relative
long double rounding_slack(u64 n) { return static_cast<long double>(n) * 0x1p-63L; }

void check_limit(u64 limit) {
    if (limit < kMinLimit) throw DomainError("Euler truncation limit must be at least 1000");
}

}  // namespace

long double to_long_double(const Rational& q) {
    auto conv = [](const mpz_class& z) {
        const std::string s = z.get_str();
        return std::strtold(s.c_str(), nullptr);
    };
    return conv(q.get_num()) / conv(q.get_den());
}

Rational universal_defect(u64 l) {
    if (l < 2) throw DomainError("universal_defect: need a prime");
    const mpz_class L = static_cast<unsigned long>(l);
    Rational f(L * L - L - 1, (L - 1) * (L - 1) * (L - 1) * (L + 1));
    f.canonicalize();
    return f;
}

Rational universal_factor(u64 l) { return 1 - universal_defect(l); }

EulerProduct universal_euler(u64 limit) {
    check_limit(limit);
    static std::mutex mu;
    static std::map<u64, EulerProduct> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(limit); it != cache.end()) return it->second;
    }
    long double prod = 1;
    u64 n = 0;
    nt::primes_in(2, limit, [&](u64 l) {
        const long double L = static_cast<long double>(l);
        const long double lm = L - 1;
        prod *= 1 - (L * L - L - 1) / (lm * lm * lm * (L + 1));
        ++n;
    });
    // each omitted factor lies in (0, 1) with |log| <= 2/l^2
    const long double eps = 2 * prime_square_tail(limit);
    EulerProduct r;
    r.value = prod;
    r.tail_bound = prod * (-std::expm1(-eps)) + prod * rounding_slack(n);
    r.limit = limit;
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(limit, r);
    return r;
}

Rational cm_factor(const nt::KroneckerChar& chi, u64 l) {
    const int c = chi(static_cast<i64>(l));
    const mpz_class L = static_cast<unsigned long>(l);
    Rational f(L * L - L - 1, (L - c) * (L - 1) * (L - 1));
    f.canonicalize();
    return 1 - c * f;
}

long double l_one(i64 D) {
    if (D >= 0 || !nt::is_fundamental_discriminant(D))
        throw InvalidDiscriminant("l_one: need a negative fundamental discriminant");
    const long double pi = std::acos(-1.0L);
    const long double w = D == -3 ? 6 : (D == -4 ? 4 : 2);
    const long double h = static_cast<long double>(nt::class_number(D));
    return 2 * pi * h / (w * std::sqrt(static_cast<long double>(-D)));
}

EulerProduct cm_euler(const nt::KroneckerChar& chi, u64 limit) {
    check_limit(limit);
    const i64 D = chi.discriminant;
    static std::mutex mu;
    static std::map<std::pair<i64, u64>, EulerProduct> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find({D, limit}); it != cache.end()) return it->second;
    }
    const long double L1 = l_one(D);
    // factor = (1 - chi(l)/l) h(l), and prod (1 - chi(l)/l) = 1 / L(1, chi)
    long double prod = 1;
    u64 n = 0;
    nt::primes_in(2, limit, [&](u64 l) {
        const int c = chi(static_cast<i64>(l));
        if (c == 0) return;
        const long double L = static_cast<long double>(l);
        if (c == 1) {
            const long double g = 1 - 1 / ((L - 1) * (L - 1));
            prod *= g * g;
        } else {
            const long double s = L * L - 1;
            prod *= 1 - 1 / (s * s);
        }
        ++n;
    });
    // for l > 1000, |log h(l)| <= 2.5 / l^2
    const long double eps = 2.5L * prime_square_tail(limit);
    EulerProduct r;
    r.value = prod / L1;
    r.tail_bound = r.value * std::expm1(eps) + r.value * rounding_slack(n + 4);
    r.limit = limit;
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(std::make_pair(D, limit), r);
    return r;
}

EulerProduct cm_euler_naive(const nt::KroneckerChar& chi, u64 limit) {
    check_limit(limit);
    long double prod = 1;
    nt::primes_in(2, limit, [&](u64 l) {
        const int c = chi(static_cast<i64>(l));
        if (c == 0) return;
        const long double L = static_cast<long double>(l);
        prod *= 1 - c * (L * L - L - 1) / ((L - c) * (L - 1) * (L - 1));
    });
    EulerProduct r;
    r.value = prod;
    const long double lim = static_cast<long double>(limit);
    r.tail_bound = prod * std::log(lim) / std::sqrt(lim);
    r.limit = limit;
    r.heuristic = true;
    return r;
}

namespace {

std::vector<u64> prime_support(u64 n) {
    std::vector<u64> out;
    for (auto [p, e] : nt::factor(n)) out.push_back(p);
    return out;
}

KoblitzConstant combine(const Rational& prefactor, const EulerProduct& e) {
    KoblitzConstant c;
    c.rational_prefactor = prefactor;
    c.euler_value = e.value;
    const long double q = to_long_double(prefactor);
    c.value = q * e.value;
    c.tail_bound = std::fabs(q) * e.tail_bound;
    c.truncation_limit = e.limit;
    return c;
}

gl::GroupSpec lifted(const gl::GroupSpec& spec, u64 L) {
    if (spec.level() % L == 0) return spec;
    return gl::extend_to_level(spec, std::lcm(spec.level(), L));
}

}  // namespace

Rational noncm_prefactor(const gl::GroupSpec& spec, u64 t, const gl::EnumerationOptions& opts) {
    if (t == 0) throw DomainError("t must be positive");
    const u64 M = spec.splitting_modulus == 0 ? 1 : spec.splitting_modulus;
    const std::vector<u64> ps = prime_support(t * M);
    u64 L0 = t;
    for (u64 p : ps) L0 *= p;
    const gl::DensityResult d = gl::delta(lifted(spec, L0), t, L0, opts);
    Rational pre = d.value;
    for (u64 p : ps) {
        pre /= Rational(static_cast<unsigned long>(p - 1), static_cast<unsigned long>(p));
        pre /= universal_factor(p);
    }
    pre.canonicalize();
    return pre;
}

KoblitzConstant assemble_noncm(const gl::GroupSpec& spec, u64 t, u64 limit,
                               const gl::EnumerationOptions& opts) {
    const Rational pre = noncm_prefactor(spec, t, opts);
    return combine(pre, universal_euler(limit));
}

KoblitzConstant assemble_cm(const gl::CMUnitGroupSpec& cm, u64 t, u64 limit) {
    if (t == 0 || (t & (t - 1)) != 0) throw DomainError("assemble_cm: t must be a power of 2");
    if (cm.k >= 63 || (u64{1} << cm.k) != 2 * t)
        throw ConfigError("assemble_cm: unit group level 2^k must equal 2t");
    // M = 2, so t rad(tM) = 2t and only l = 2 is removed from the product
    Rational pre = gl::cm_delta(cm, t).value / Rational(1, 2);
    pre.canonicalize();
    return combine(pre, cm_euler(nt::KroneckerChar{-4}, limit));
}

KoblitzConstant serre_closed_form(i64 D, u64 limit) {
    const i64 r = ((D % 4) + 4) % 4;
    if ((r != 0 && r != 1) || !nt::is_fundamental_discriminant(D))
        throw InvalidDiscriminant("serre_closed_form: " + std::to_string(D) +
                                  " is not a fundamental discriminant");
    Rational pre = 1;
    if (r == 1) {
        Rational prod = 1;
        for (u64 l : prime_support(static_cast<u64>(D < 0 ? -D : D))) {
            const mpz_class L = static_cast<unsigned long>(l);
            prod /= Rational(L * L * L - 2 * L * L - L + 3);
        }
        pre += prod;
    }
    pre.canonicalize();
    return combine(pre, universal_euler(limit));
}

bool obstruction_check(const gl::GroupSpec& spec, u64 t, const std::vector<u64>& probe_levels,
                       const gl::EnumerationOptions& opts) {
    if (t == 0) throw DomainError("t must be positive");
    std::vector<u64> probes = probe_levels;
    if (probes.empty()) {
        u64 L0 = t;
        for (u64 p : prime_support(t * (spec.splitting_modulus == 0 ? 1 : spec.splitting_modulus)))
            L0 *= p;
        probes.push_back(L0);
    }
    u64 all = 1;
    for (u64 m : probes) {
        if (m == 0) throw DomainError("probe level must be positive");
        all = std::lcm(all, m);
    }
    const gl::GroupSpec s = lifted(spec, all);
    for (u64 m : probes)
        if (gl::delta(s, t, m, opts).value == 0) return true;
    return false;
}

// ---------------------------------------------------------------- integral

namespace {

using Fn = std::function<long double(long double)>;

long double simpson(const Fn& f, long double a, long double b, long double fa, long double fm,
                    long double fb, long double whole, long double tol, int depth) {
    const long double m = (a + b) / 2;
    const long double lm = (a + m) / 2, rm = (m + b) / 2;
    const long double flm = f(lm), frm = f(rm);
    const long double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const long double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const long double diff = left + right - whole;
    if (depth <= 0 || std::fabs(diff) <= 15 * tol) return left + right + diff / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

long double integrate(const Fn& f, long double a, long double b, long double tol) {
    // geometric panels keep the slowly varying integrand well resolved
    std::vector<long double> cuts{a};
    while (cuts.back() * 2 < b) cuts.push_back(cuts.back() * 2);
    cuts.push_back(b);
    const long double panel_tol = tol / static_cast<long double>(cuts.size() - 1);
    long double sum = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const long double lo = cuts[i], hi = cuts[i + 1];
        const long double fa = f(lo), fb = f(hi), fm = f((lo + hi) / 2);
        const long double whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
        sum += simpson(f, lo, hi, fa, fm, fb, whole, panel_tol, 48);
    }
    return sum;
}

}  // namespace

long double koblitz_integral(u64 t, long double x, const IntegralOptions& opts) {
    if (t == 0) throw DomainError("t must be positive");
    const long double a = static_cast<long double>(t) + 1;
    if (!(x > a)) throw DomainError("expected_count: need x > t + 1");
    const long double lt = std::log(static_cast<long double>(t));
    Fn f;
    if (opts.drop_log_t)
        f = [](long double u) { return 1 / (std::log1p(u) * std::log(u)); };
    else
        f = [lt](long double u) { return 1 / ((std::log1p(u) - lt) * std::log(u)); };
    return integrate(f, a, x, opts.tolerance);
}

ExpectedCount expected_count(const KoblitzConstant& c, u64 t, long double x,
                             const IntegralOptions& opts) {
    ExpectedCount e;
    e.integral = koblitz_integral(t, x, opts);
    e.raw = c.value * e.integral;
    e.rounded = std::llround(e.raw);
    const long double frac = e.raw - std::floor(e.raw);
    e.ambiguous = std::fabs(frac - 0.5L) <= std::fabs(c.value) * opts.tolerance;
    return e;
}

std::string to_json(const KoblitzConstant& c) {
    auto num = [](long double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.21Lg", v);
        return std::string(buf);
    };
    nlohmann::ordered_json j;
    j["prefactor"] = c.rational_prefactor.get_str();
    j["euler_value"] = num(c.euler_value);
    j["tail_bound"] = num(c.tail_bound);
    j["value"] = num(c.value);
    j["truncation_limit"] = c.truncation_limit;
    return j.dump(2);
}

}  // namespace koblitz::constants
