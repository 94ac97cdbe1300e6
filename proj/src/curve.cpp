#include "koblitz/curve.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "koblitz/errors.hpp"
#include "koblitz/numtheory.hpp"

namespace koblitz::curve {

namespace nt = koblitz::numtheory;

Integer discriminant(const Coefficients& a) {
    const Integer& a1 = a[0];
    const Integer& a2 = a[1];
    const Integer& a3 = a[2];
    const Integer& a4 = a[3];
    const Integer& a6 = a[4];
    Integer b2 = a1 * a1 + 4 * a2;
    Integer b4 = 2 * a4 + a1 * a3;
    Integer b6 = a3 * a3 + 4 * a6;
    Integer b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

namespace {

u64 mod_ui(const Integer& z, u64 p) {
    return static_cast<u64>(mpz_fdiv_ui(z.get_mpz_t(), static_cast<unsigned long>(p)));
}

Integer rho_factor(const Integer& n) {
    for (unsigned long c = 1;; ++c) {
        Integer x = 2, y = 2, d = 1;
        auto f = [&](const Integer& v) {
            Integer r = v * v + c;
            mpz_mod(r.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
            return r;
        };
        while (d == 1) {
            x = f(x);
            y = f(f(y));
            Integer diff = abs(x - y);
            mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
        }
        if (d != n) return d;
    }
}

void prime_factors(Integer n, std::vector<Integer>& out) {
    if (n == 1) return;
    if (mpz_probab_prime_p(n.get_mpz_t(), 40) > 0) {
        out.push_back(n);
        return;
    }
    Integer d = rho_factor(n);
    prime_factors(d, out);
    prime_factors(n / d, out);
}

std::vector<u64> bad_prime_support(const Integer& disc) {
    Integer n = abs(disc);
    std::vector<Integer> found;
    for (unsigned long q = 2; q < 5000; ++q) {
        if (!nt::is_prime(q)) continue;
        if (mpz_divisible_ui_p(n.get_mpz_t(), q)) {
            found.emplace_back(q);
            while (mpz_divisible_ui_p(n.get_mpz_t(), q)) mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), q);
        }
    }
    if (n > 1) prime_factors(n, found);
    std::vector<u64> out;
    for (const Integer& f : found) {
        if (!f.fits_ulong_p())
            throw DomainError("discriminant has a prime factor above 2^64: " + f.get_str());
        out.push_back(f.get_ui());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

CurveQ::CurveQ(Coefficients a) : a_(std::move(a)) {
    disc_ = discriminant(a_);
    if (disc_ == 0) throw DomainError("singular Weierstrass model " + to_string());
    const Integer b2 = a1() * a1() + 4 * a2();
    const Integer b4 = 2 * a4() + a1() * a3();
    const Integer b6 = a3() * a3() + 4 * a6();
    c4_ = b2 * b2 - 24 * b4;
    c6_ = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
    bad_primes_ = bad_prime_support(disc_);
}

CurveQ CurveQ::short_form(const Integer& A, const Integer& B) {
    return CurveQ(Coefficients{0, 0, 0, A, B});
}

bool CurveQ::has_good_reduction(u64 p) const { return mod_ui(disc_, p) != 0; }

std::string CurveQ::to_string() const {
    std::string s = "[";
    for (int i = 0; i < 5; ++i) {
        if (i) s += ',';
        s += a_[i].get_str();
    }
    return s + "]";
}

std::optional<ReducedCurve> try_reduce(const CurveQ& curve, u64 p) {
    if (p < 2) throw DomainError("reduce: p must be prime");
    if (!curve.has_good_reduction(p)) return std::nullopt;
    ReducedCurve rc{};
    rc.p = p;
    for (int i = 0; i < 5; ++i) rc.a[i] = mod_ui(curve.coefficients()[i], p);
    if (p > 3) {
        // y^2 = x^3 - 27 c4 x - 54 c6
        const u64 c4 = mod_ui(curve.c4(), p);
        const u64 c6 = mod_ui(curve.c6(), p);
        rc.A = nt::submod(0, nt::mulmod(27 % p, c4, p), p);
        rc.B = nt::submod(0, nt::mulmod(54 % p, c6, p), p);
    }
    return rc;
}

ReducedCurve reduce(const CurveQ& curve, u64 p) {
    auto rc = try_reduce(curve, p);
    if (!rc) throw BadReduction(p);
    return *rc;
}

ReducedCurve short_curve(u64 p, u64 A, u64 B) {
    if (p <= 3) throw DomainError("short_curve: need p > 3");
    A %= p;
    B %= p;
    const u64 A3 = nt::mulmod(nt::mulmod(A, A, p), A, p);
    const u64 d = nt::addmod(nt::mulmod(4, A3, p), nt::mulmod(27 % p, nt::mulmod(B, B, p), p), p);
    if (d == 0) throw BadReduction(p);
    ReducedCurve rc{};
    rc.p = p;
    rc.a = {0, 0, 0, A, B};
    rc.A = A;
    rc.B = B;
    return rc;
}

ReducedCurve quadratic_twist(const ReducedCurve& rc, u64 d) {
    const u64 p = rc.p;
    d %= p;
    if (p <= 3 || d == 0) throw DomainError("quadratic_twist: need p > 3 and d != 0");
    const u64 d2 = nt::mulmod(d, d, p);
    return short_curve(p, nt::mulmod(rc.A, d2, p), nt::mulmod(rc.B, nt::mulmod(d2, d, p), p));
}

namespace {

u64 enumerate_small(const ReducedCurve& rc) {
    const u64 p = rc.p;
    const auto& a = rc.a;
    u64 n = 1;
    for (u64 x = 0; x < p; ++x) {
        for (u64 y = 0; y < p; ++y) {
            const u64 lhs = (y * y + a[0] * x * y + a[2] * y) % p;
            const u64 rhs = (x * x * x + a[1] * x * x + a[3] * x + a[4]) % p;
            if (lhs == rhs) ++n;
        }
    }
    return n;
}

// Sum over x of chi(x^3 + A x + B), stepping the cubic by finite differences.
i64 character_sum(u64 p, u64 A, u64 B) {
    const bool small = p < (u64{1} << 26);
    std::vector<signed char> chi;
    if (small) {
        chi.assign(p, -1);
        chi[0] = 0;
        for (u64 y = 1; y <= p / 2; ++y) chi[nt::mulmod(y, y, p)] = 1;
    }
    auto add = [p](u64 u, u64 v) {
        u64 s = u + v;
        return s >= p ? s - p : s;
    };
    // f(0) = B, f(1)-f(0) = 1 + A, second difference at 0 is 6, third is 6
    u64 f = B;
    u64 d1 = add(1 % p, A);
    u64 d2 = 6 % p;
    const u64 d3 = 6 % p;
    i64 sum = 0;
    for (u64 x = 0; x < p; ++x) {
        sum += small ? chi[f] : nt::kronecker(static_cast<i64>(f), static_cast<i64>(p));
        f = add(f, d1);
        d1 = add(d1, d2);
        d2 = add(d2, d3);
    }
    return sum;
}

// ---- projective arithmetic on y^2 = x^3 + a x + b in Montgomery form ----

struct Pt {
    u64 X, Y, Z;  // Z == 0 is the identity
};

struct Aff {
    u64 x, y;
};

template <class Field>
class Ec {
public:
    Ec(const Field& F, u64 a) : F_(F), a_(a) {}

    Pt dbl(const Pt& P) const {
        if (P.Z == 0 || P.Y == 0) return Pt{0, F_.one(), 0};
        const u64 XX = F_.sqr(P.X);
        const u64 ZZ = F_.sqr(P.Z);
        const u64 w = F_.add(F_.mul(a_, ZZ), F_.add(XX, F_.add(XX, XX)));
        const u64 s = F_.add(F_.mul(P.Y, P.Z), F_.mul(P.Y, P.Z));
        const u64 ss = F_.sqr(s);
        const u64 sss = F_.mul(s, ss);
        const u64 R = F_.mul(P.Y, s);
        const u64 RR = F_.sqr(R);
        const u64 xr = F_.add(P.X, R);
        const u64 B = F_.sub(F_.sub(F_.sqr(xr), XX), RR);
        const u64 h = F_.sub(F_.sqr(w), F_.add(B, B));
        return Pt{F_.mul(h, s), F_.sub(F_.mul(w, F_.sub(B, h)), F_.add(RR, RR)), sss};
    }

    // P + Q with Q affine
    Pt madd(const Pt& P, const Aff& Q) const {
        if (P.Z == 0) return Pt{Q.x, Q.y, F_.one()};
        const u64 u = F_.sub(F_.mul(Q.y, P.Z), P.Y);
        const u64 v = F_.sub(F_.mul(Q.x, P.Z), P.X);
        if (v == 0) {
            if (u == 0) return dbl(P);
            return Pt{0, F_.one(), 0};
        }
        const u64 uu = F_.sqr(u);
        const u64 vv = F_.sqr(v);
        const u64 vvv = F_.mul(v, vv);
        const u64 R = F_.mul(vv, P.X);
        const u64 A = F_.sub(F_.sub(F_.mul(uu, P.Z), vvv), F_.add(R, R));
        return Pt{F_.mul(v, A), F_.sub(F_.mul(u, F_.sub(R, A)), F_.mul(vvv, P.Y)),
                  F_.mul(vvv, P.Z)};
    }

    Pt mul(u64 k, const Aff& P) const {
        Pt R{0, F_.one(), 0};
        if (k == 0) return R;
        for (int bit = 63 - std::countl_zero(k); bit >= 0; --bit) {
            R = dbl(R);
            if ((k >> bit) & 1) R = madd(R, P);
        }
        return R;
    }

private:
    const Field& F_;
    u64 a_;
};

// Converts the finite points of pts to affine in place (x = X/Z, y = Y/Z)
// using one inversion. Identity entries are left untouched.
template <class Field>
void normalize(const Field& F, std::vector<Pt>& pts, std::vector<u64>& scratch) {
    scratch.resize(pts.size());
    u64 acc = F.one();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        scratch[i] = acc;
        if (pts[i].Z != 0) acc = F.mul(acc, pts[i].Z);
    }
    u64 inv = F.inv(acc);
    for (std::size_t i = pts.size(); i-- > 0;) {
        if (pts[i].Z == 0) continue;
        const u64 zi = F.mul(inv, scratch[i]);
        inv = F.mul(inv, pts[i].Z);
        pts[i].X = F.mul(pts[i].X, zi);
        pts[i].Y = F.mul(pts[i].Y, zi);
        pts[i].Z = F.one();
    }
}

u64 splitmix64(u64& state) {
    u64 z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

template <class Field>
class TraceSearch {
public:
    TraceSearch(u64 p, u64 A, u64 B) : p_(p), F_(p), A_(F_.to(A)), B_(F_.to(B)) {
        amax_ = static_cast<i64>(nt::isqrt(4 * p));
        const u64 width = static_cast<u64>(2 * amax_ + 1);
        m_ = std::max<u64>(1, nt::isqrt(width / 2) + 1);
        step_ = 2 * m_ + 1;
        giants_ = (width + step_ - 1) / step_;
        cap_ = 1;
        while (cap_ < 4 * m_) cap_ <<= 1;
        keys_.resize(cap_);
        vals_.resize(cap_);
    }

    std::optional<u64> run(u64 seed) {
        u64 state = seed ^ (p_ * 0xD6E8FEB86659FD93ull);
        std::vector<i64> live;
        bool have = false;
        for (int attempt = 0; attempt < 64; ++attempt) {
            const u64 x0 = splitmix64(state) % p_;
            const u64 xm = F_.to(x0);
            const u64 c = F_.add(F_.mul(F_.add(F_.sqr(xm), A_), xm), B_);
            if (c == 0) continue;
            const int chi = nt::kronecker(static_cast<i64>(F_.from(c)), static_cast<i64>(p_));
            // (c x0, c^2) lies on y^2 = x^3 + A c^2 x + B c^3, which is E for
            // square c and the quadratic twist otherwise.
            const u64 c2 = F_.sqr(c);
            const Aff P{F_.mul(c, xm), c2};
            const u64 a_curve = F_.mul(A_, c2);
            if (!have) {
                auto traces = traces_for(a_curve, P);
                if (!traces) continue;
                if (chi < 0)
                    for (i64& t : *traces) t = -t;
                std::sort(traces->begin(), traces->end());
                live = std::move(*traces);
                have = true;
            } else {
                // a survives if P is killed by the matching group order
                const Ec<Field> ec(F_, a_curve);
                std::erase_if(live, [&](i64 a) {
                    const i64 t = chi < 0 ? -a : a;
                    return ec.mul(static_cast<u64>(static_cast<i64>(p_ + 1) - t), P).Z != 0;
                });
            }
            if (live.empty()) throw std::logic_error("point_count_bsgs: no consistent trace");
            if (live.size() == 1) return p_ + 1 - static_cast<u64>(live[0]);
        }
        return std::nullopt;
    }

private:
    static constexpr std::uint32_t kEmpty = 0xFFFFFFFFu;

    std::size_t slot(u64 x) const {
        return static_cast<std::size_t>((x * 0x9E3779B97F4A7C15ull) >> 32) & (cap_ - 1);
    }

    // All a in [-amax, amax] with (p + 1 - a) P = O, or nullopt when P has
    // small order (then it tells us little).
    std::optional<std::vector<i64>> traces_for(u64 a_curve, const Aff& P) {
        const Ec<Field> ec(F_, a_curve);
        baby_.resize(m_);
        Pt cur{P.x, P.y, F_.one()};
        baby_[0] = cur;
        for (u64 j = 1; j < m_; ++j) {
            cur = ec.madd(cur, P);
            if (cur.Z == 0) return std::nullopt;
            baby_[j] = cur;
        }
        normalize(F_, baby_, scratch_);
        std::fill(vals_.begin(), vals_.end(), kEmpty);
        for (u64 j = 0; j < m_; ++j) {
            const u64 x = baby_[j].X;
            std::size_t s = slot(x);
            while (vals_[s] != kEmpty) {
                if (keys_[s] == x) return std::nullopt;  // jP = +-kP, order <= 2m
                s = (s + 1) & (cap_ - 1);
            }
            keys_[s] = x;
            vals_[s] = static_cast<std::uint32_t>(j);
        }

        Pt S = ec.mul(step_, P);
        if (S.Z == 0) return std::nullopt;
        {
            const u64 zi = F_.inv(S.Z);
            S = Pt{F_.mul(S.X, zi), F_.mul(S.Y, zi), F_.one()};
        }
        const Aff minus_step{S.X, F_.neg(S.Y)};

        const i64 c0 = -amax_ + static_cast<i64>(m_);
        giant_.resize(giants_);
        Pt q = ec.mul(static_cast<u64>(static_cast<i64>(p_ + 1) - c0), P);
        for (u64 i = 0; i < giants_; ++i) {
            giant_[i] = q;
            if (i + 1 < giants_) {
                if (q.Z == 0)
                    q = Pt{minus_step.x, minus_step.y, F_.one()};
                else
                    q = ec.madd(q, minus_step);
            }
        }
        normalize(F_, giant_, scratch_);

        std::vector<i64> out;
        auto keep = [&](i64 a) {
            if (a >= -amax_ && a <= amax_) out.push_back(a);
        };
        for (u64 i = 0; i < giants_; ++i) {
            const i64 ci = c0 + static_cast<i64>(i * step_);
            const Pt& g = giant_[i];
            if (g.Z == 0) {
                keep(ci);
                continue;
            }
            std::size_t s = slot(g.X);
            while (vals_[s] != kEmpty) {
                if (keys_[s] == g.X) {
                    const std::uint32_t j = vals_[s];
                    const i64 k = static_cast<i64>(j) + 1;
                    const u64 y = baby_[j].Y;
                    // (p + 1 - ci) P = +-kP
                    if (g.Y == y) keep(ci + k);
                    if (g.Y == F_.neg(y)) keep(ci - k);
                    break;
                }
                s = (s + 1) & (cap_ - 1);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (out.empty()) throw std::logic_error("point_count_bsgs: trace search found nothing");
        return out;
    }

    u64 p_;
    Field F_;
    u64 A_, B_;
    i64 amax_;
    u64 m_, step_, giants_;
    std::size_t cap_;
    std::vector<u64> keys_;
    std::vector<std::uint32_t> vals_;
    std::vector<Pt> baby_, giant_;
    std::vector<u64> scratch_;
};

}  // namespace

u64 point_count_naive(const ReducedCurve& rc) {
    if (rc.p <= 3) return enumerate_small(rc);
    return static_cast<u64>(static_cast<i64>(rc.p + 1) + character_sum(rc.p, rc.A, rc.B));
}

u64 point_count_bsgs(const ReducedCurve& rc, u64 seed) {
    if (rc.p <= 3) return enumerate_small(rc);
    if (rc.p >= (u64{1} << 62)) throw DomainError("point_count_bsgs: p too large");
    if (rc.p < (u64{1} << 32)) {
        TraceSearch<nt::Montgomery32> search(rc.p, rc.A, rc.B);
        if (auto n = search.run(seed)) return *n;
    } else {
        TraceSearch<nt::Montgomery64> search(rc.p, rc.A, rc.B);
        if (auto n = search.run(seed)) return *n;
    }
    return point_count_naive(rc);
}

u64 point_count(const ReducedCurve& rc, const PointCountOptions& opts) {
    if (rc.p <= 3 || rc.p <= opts.naive_limit) return point_count_naive(rc);
    return point_count_bsgs(rc, opts.seed);
}

i64 a_p(const CurveQ& curve, u64 p, const PointCountOptions& opts) {
    return prime_record(curve, p, opts).a_p;
}

PrimeRecord prime_record(const CurveQ& curve, u64 p, const PointCountOptions& opts) {
    const ReducedCurve rc = reduce(curve, p);
    const u64 n = point_count(rc, opts);
    return PrimeRecord{p, static_cast<i64>(p + 1) - static_cast<i64>(n), n};
}

CurveQ parse_curve(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError("curve must look like [a1,a2,a3,a4,a6] or [A,B]: " + text);
    std::vector<Integer> vals;
    std::stringstream ss(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        Integer z;
        if (item.empty() || z.set_str(item[0] == '+' ? item.substr(1) : item, 10) != 0)
            throw ConfigError("bad curve coefficient '" + item + "' in " + text);
        vals.push_back(z);
    }
    if (vals.size() == 2) return CurveQ::short_form(vals[0], vals[1]);
    if (vals.size() != 5) throw ConfigError("curve needs 2 or 5 coefficients: " + text);
    return CurveQ(Coefficients{vals[0], vals[1], vals[2], vals[3], vals[4]});
}

}  // namespace koblitz::curve
