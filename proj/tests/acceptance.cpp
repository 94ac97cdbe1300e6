// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "koblitz/constants.hpp"
#include "koblitz/curve.hpp"
#include "koblitz/errors.hpp"
#include "koblitz/galois.hpp"
#include "koblitz/harness.hpp"
#include "koblitz/numtheory.hpp"

using namespace koblitz;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using Rational = mpq_class;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %-44s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void exact(const std::string& name, u64 got, u64 want) {
    report(got == want, name, "got " + std::to_string(got) + ", want " + std::to_string(want));
}

void within_one(const std::string& name, i64 got, i64 want) {
    report(std::llabs(got - want) <= 1, name,
           "got " + std::to_string(got) + ", want " + std::to_string(want) + " +-1");
}

void fraction(const std::string& name, const Rational& got, const Rational& want) {
    report(got == want, name, "got " + got.get_str() + ", want " + want.get_str());
}

std::string num(long double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12Lg", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

harness::ExperimentConfig table_config(const curve::CurveQ& c, u64 t, std::vector<u64> cps,
                                       const std::string& spec) {
    harness::ExperimentConfig cfg;
    cfg.curve = c;
    cfg.t = t;
    cfg.checkpoints = std::move(cps);
    cfg.x_max = cfg.checkpoints.back();
    cfg.spec_name = spec;
    cfg.shards = 4;
    return cfg;
}

std::vector<galois::MatModM> all_gl2(u64 n) {
    std::vector<galois::MatModM> out;
    const u32 m = static_cast<u32>(n);
    for (u32 a = 0; a < m; ++a)
        for (u32 b = 0; b < m; ++b)
            for (u32 c = 0; c < m; ++c)
                for (u32 d = 0; d < m; ++d)
                    if (std::gcd((a * d + m * m - b * c) % m, m) == 1) out.push_back({m, {a, b, c, d}});
    return out;
}

const curve::CurveQ serre_curve = curve::CurveQ::short_form(6, -2);
const curve::CurveQ jones_curve = curve::CurveQ::short_form(9, 18);
const curve::CurveQ cm_curve = curve::CurveQ::short_form(-1, 0);
const curve::CurveQ x0_11_curve(curve::Coefficients{0, -1, 1, -10, -20});

void table_runs() {
    auto t0 = std::chrono::steady_clock::now();
    {
        const auto tab = harness::run_count(table_config(serre_curve, 1, {20000000, 40000000}, "serre(-3)"));
        exact("[6,-2] t=1 actual x=2e7", tab.rows[0].actual, 45285);
        exact("[6,-2] t=1 actual x=4e7", tab.rows[1].actual, 83272);
        within_one("[6,-2] t=1 expected_rounded x=2e7", *tab.rows[0].expected_rounded, 45592);
        within_one("[6,-2] t=1 expected_rounded x=4e7", *tab.rows[1].expected_rounded, 83564);
    }
    std::printf("      ([6,-2]: %.1fs)\n", seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    {
        const auto cfg = table_config(jones_curve, 1, {40000000}, "jones_x3_9x_18");
        const auto tabs = harness::run_counts(cfg, {2, 3, 6});
        const u64 actual[] = {55118, 83736, 39554};
        const i64 expected[] = {55244, 84036, 39634};
        const char* ts[] = {"2", "3", "6"};
        for (int i = 0; i < 3; ++i) {
            exact(std::string("[9,18] actual t=") + ts[i] + " x=4e7", tabs[i].rows[0].actual, actual[i]);
            within_one(std::string("[9,18] expected_rounded t=") + ts[i] + " x=4e7",
                       *tabs[i].rows[0].expected_rounded, expected[i]);
        }
    }
    std::printf("      ([9,18]: %.1fs)\n", seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    {
        auto cfg = table_config(cm_curve, 8, {20000000}, "cm_gaussian");
        cfg.residue_filter = harness::ResidueFilter{4, {1}};
        const auto tab = harness::run_count(cfg);
        exact("[-1,0] p=1 mod 4 t=8 actual x=2e7", tab.rows[0].actual, 49847);
        within_one("[-1,0] p=1 mod 4 t=8 expected_rounded x=2e7", *tab.rows[0].expected_rounded, 50063);
    }
    std::printf("      ([-1,0]: %.1fs)\n", seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    {
        auto cfg = table_config(x0_11_curve, 5, {5000000, 10000000, 20000000}, "x0_11");
        cfg.shards = 1;
        const auto one = harness::run_count(cfg);
        exact("X0(11) t=5 actual x=2e7", one.rows[2].actual, 36051);
        within_one("X0(11) t=5 expected_rounded x=2e7", *one.rows[2].expected_rounded, 36091);
        cfg.shards = 8;
        const auto eight = harness::run_count(cfg);
        bool same = true;
        for (std::size_t i = 0; i < one.rows.size(); ++i) same &= one.rows[i].actual == eight.rows[i].actual;
        const bool bytes = harness::render(one, harness::Format::Csv) == harness::render(eight, harness::Format::Csv);
        report(same && bytes, "shard invariance (1 vs 8, X0(11) to 2e7)",
               same && bytes ? "identical counts and CSV bytes" : "mismatch");
    }
    std::printf("      (X0(11) and shards: %.1fs)\n", seconds_since(t0));
}

void constants_checks() {
    const long double E = 0.505166168239435774L;
    const auto e7 = constants::universal_euler(10000000);
    report(std::fabs(e7.value - E) < 1e-6L, "universal_euler(1e7) within 1e-6",
           "|diff| = " + num(std::fabs(e7.value - E)));
    const auto e8 = constants::universal_euler(100000000);
    report(std::fabs(e7.value - e8.value) < e7.tail_bound, "universal tail bound honest vs 1e8",
           "moved " + num(std::fabs(e7.value - e8.value)) + " < bound " + num(e7.tail_bound));

    fraction("prefactor serre(-3) t=1", constants::noncm_prefactor(galois::builtin_spec("serre(-3)"), 1),
             Rational(10, 9));
    const auto j = galois::builtin_spec("jones_x3_9x_18");
    fraction("prefactor jones t=2", constants::noncm_prefactor(j, 2), Rational(154, 219));
    fraction("prefactor jones t=3", constants::noncm_prefactor(j, 3), Rational(6160, 5913));
    fraction("prefactor jones t=6", constants::noncm_prefactor(j, 6), Rational(308, 657));
    fraction("prefactor x0_11 t=5", constants::noncm_prefactor(galois::builtin_spec("x0_11"), 5),
             Rational(62208, 78913));

    const auto cm = constants::assemble_cm({4, 3}, 8, 100000000);
    report(std::fabs(cm.value - 1.067350894L) < 1e-8L, "assemble_cm within 1e-8 at 1e8",
           "value " + num(cm.value) + ", |diff| = " + num(std::fabs(cm.value - 1.067350894L)));

    const auto x5 = constants::assemble_noncm(galois::builtin_spec("x0_11"), 5);
    constants::IntegralOptions drop;
    drop.drop_log_t = true;
    const auto r = constants::expected_count(x5, 5, 1e9L, drop);
    report(std::llabs(r.rounded - 1033120) <= 2, "X0(11) without log 5 at x=1e9",
           "got " + num(r.raw) + ", want 1033120 +-2");
}

void group_checks() {
    const auto x = galois::builtin_spec("x0_11");
    const auto d = galois::delta(x, 5);
    report(d.group_order == 19800000, "|G(550)|", "got " + d.group_order.get_str());
    report(d.hit_count == 3564000, "Psi_5 hits in G(550)", "got " + d.hit_count.get_str());
    fraction("delta_5(550)", d.value, Rational(9, 50));

    const auto j = galois::builtin_spec("jones_x3_9x_18");
    const Rational t2 = galois::theta(j, 2).value, t3 = galois::theta(j, 3).value, t6 = galois::theta(j, 6).value;
    fraction("theta_2", t2, Rational(2, 3));
    fraction("theta_3", t3, Rational(3, 4));
    fraction("theta_6", t6, Rational(5, 12));
    fraction("1 - theta_2 - theta_3 + theta_6", 1 - t2 - t3 + t6, Rational(0));
    fraction("delta_2(36)", galois::delta(j, 2, 36).value, Rational(1, 8));
    fraction("delta_3(36)", galois::delta(j, 3, 36).value, Rational(5, 27));
    fraction("delta_6(36)", galois::delta(j, 6, 36).value, Rational(1, 12));
    fraction("delta(5)", galois::delta(j, 1, 5).value, Rational(77, 96));

    bool eig = true;
    for (u64 l : {2u, 3u, 5u, 7u}) {
        const auto g = all_gl2(l);
        for (u64 a = 1; a < l; ++a) {
            u64 n = 0;
            for (const auto& A : g)
                if ((A.e[0] + A.e[3]) % l == (1 + a) % l && A.det() == a) ++n;
            eig &= galois::eigenvalue_count(l, a) == n;
        }
    }
    report(eig, "eigenvalue counts vs enumeration l=2,3,5,7", eig ? "all equal" : "mismatch");

    bool y = true;
    for (u64 l : {3u, 5u, 7u}) {
        i64 plus = 0, minus = 0;
        for (const auto& A : all_gl2(l)) {
            if (A.det_one_minus() == 0) continue;
            (numtheory::kronecker(A.det(), static_cast<i64>(l)) == 1 ? plus : minus) += 1;
        }
        const auto yc = galois::y_counts(l);
        const Rational L = static_cast<unsigned long>(l);
        const Rational den = (L - 1) * (L - 1) * (L - 1) * (L + 1);
        y &= Rational(yc.plus) == plus && Rational(yc.minus) == minus;
        y &= yc.sum_ratio == 1 - (L * L - L - 1) / den && yc.diff_ratio == L / den;
    }
    report(y, "Y counts and ratio identities l=3,5,7", y ? "exact" : "mismatch");

    // a = 1 + (1 + i)^3 z over the 32 cosets z = u + v i
    int hits = 0;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 4; ++v) {
            const int re = -2 * u - 2 * v, im = 2 * u - 2 * v;
            hits += ((re * re + im * im) % 16 + 16) % 16 == 8;
        }
    Rational oracle(hits, 32);
    oracle.canonicalize();
    const auto c = galois::cm_delta({4, 3}, 8);
    report(c.value == oracle && c.value == Rational(1, 2) && c.group_order == 32,
           "cm_delta(k=4, t=8) vs 32-coset oracle",
           "got " + c.value.get_str() + ", oracle " + oracle.get_str());
}

void property_checks() {
    std::mt19937_64 rng(31337);
    int done = 0, bad = 0;
    while (done < 10000) {
        const u64 p = 16384 + rng() % (262144 - 16384);
        if (!numtheory::is_prime(p)) continue;
        curve::ReducedCurve rc;
        try {
            rc = curve::short_curve(p, rng() % p, rng() % p);
        } catch (const BadReduction&) {
            continue;
        }
        const u64 naive = curve::point_count_naive(rc);
        const u64 fast = curve::point_count_bsgs(rc, rng());
        const i64 a = static_cast<i64>(p + 1) - static_cast<i64>(fast);
        u64 dd = 2;
        while (numtheory::kronecker(static_cast<i64>(dd), static_cast<i64>(p)) != -1) ++dd;
        const u64 tw = curve::point_count_bsgs(curve::quadratic_twist(rc, dd), rng());
        bad += naive != fast || static_cast<u64>(a * a) > 4 * p || fast + tw != 2 * p + 2;
        ++done;
    }
    report(bad == 0, "Hasse, twist, dual path on 1e4 pairs", std::to_string(bad) + " violations");

    int div_bad = 0, five_bad = 0;
    numtheory::primes_in(3, 100000, [&](u64 p) {
        if (auto rc = curve::try_reduce(jones_curve, p)) {
            const u64 n = curve::point_count(*rc);
            div_bad += (p % 4 == 1 && n % 3) || (p % 4 == 3 && n % 2);
        }
        if (auto rc = curve::try_reduce(cm_curve, p)) {
            const u64 n = curve::point_count(*rc);
            div_bad += (p % 4 == 1 && n % 8) || (p % 4 == 3 && n != p + 1);
        }
        if (auto rc = curve::try_reduce(x0_11_curve, p)) five_bad += curve::point_count(*rc) % 5 != 0;
    });
    report(div_bad == 0, "divisibility patterns p <= 1e5", std::to_string(div_bad) + " violations");
    report(five_bad == 0, "X0(11) 5 | N for good p <= 1e5", std::to_string(five_bad) + " violations");

    bool all = true;
    std::string detail;
    for (i64 D : {-3, -4, -7, -8, -11}) {
        const auto a = constants::serre_closed_form(D);
        const auto b = constants::assemble_noncm(galois::serre_spec(D), 1);
        const bool ok = a.rational_prefactor == b.rational_prefactor &&
                        std::fabs(a.value - b.value) <= a.tail_bound + b.tail_bound;
        all &= ok;
        detail += std::to_string(D) + (ok ? " ok " : " MISMATCH ");
    }
    report(all, "serre closed form vs assembly", detail);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        constants_checks();
        group_checks();
        property_checks();
        table_runs();
    } catch (const std::exception& e) {
        report(false, "unexpected exception", e.what());
    }
    std::printf("%d failure(s), %.1fs\n", failures, seconds_since(t0));
    return failures ? 1 : 0;
}
