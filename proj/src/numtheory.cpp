#include "koblitz/numtheory.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace koblitz::numtheory {

u64 powmod(u64 base, u64 exp, u64 m) {
    if (m == 1) return 0;
    u64 result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

u64 invmod(u64 a, u64 m) {
    if (m == 1) return 0;
    // Bezout coefficients stay below m in magnitude
    __int128 t = 0, nt = 1;
    u64 r = m, nr = a % m;
    while (nr != 0) {
        const u64 q = r / nr;
        const __int128 tmp = t - static_cast<__int128>(q) * nt;
        t = nt;
        nt = tmp;
        const u64 rr = r - q * nr;
        r = nr;
        nr = rr;
    }
    if (r != 1) return 0;
    if (t < 0) t += m;
    return static_cast<u64>(t);
}

u64 isqrt(u64 n) {
    u64 r = static_cast<u64>(__builtin_sqrtl(static_cast<long double>(n)));
    while (r > 0 && static_cast<u128>(r) * r > n) --r;
    while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
    return r;
}

Montgomery64::Montgomery64(u64 n) : n_(n) {
    if ((n & 1) == 0) throw std::invalid_argument("Montgomery64: even modulus");
    u64 x = n;
    for (int i = 0; i < 5; ++i) x *= 2 - n * x;
    ninv_ = x;
    one_ = (0 - n) % n;
    r2_ = static_cast<u64>(static_cast<u128>(one_) * one_ % n);
}

u64 Montgomery64::pow(u64 a, u64 e) const {
    u64 r = one_;
    while (e > 0) {
        if (e & 1) r = mul(r, a);
        a = sqr(a);
        e >>= 1;
    }
    return r;
}

Montgomery32::Montgomery32(u64 n) : n_(n) {
    if ((n & 1) == 0 || n >= (u64{1} << 32))
        throw std::invalid_argument("Montgomery32: need odd modulus below 2^32");
    std::uint32_t x = static_cast<std::uint32_t>(n);
    for (int i = 0; i < 4; ++i) x *= 2 - static_cast<std::uint32_t>(n) * x;
    ninv_ = x;
    one_ = (u64{1} << 32) % n;
}

u64 Montgomery32::pow(u64 a, u64 e) const {
    u64 r = one_;
    while (e > 0) {
        if (e & 1) r = mul(r, a);
        a = sqr(a);
        e >>= 1;
    }
    return r;
}

namespace {

bool miller_rabin_round(const Montgomery64& mont, u64 n, u64 d, int s, u64 a) {
    a %= n;
    if (a == 0) return true;
    u64 x = mont.pow(mont.to(a), d);
    const u64 one = mont.one();
    const u64 minus_one = mont.neg(one);
    if (x == one || x == minus_one) return true;
    for (int r = 1; r < s; ++r) {
        x = mont.sqr(x);
        if (x == minus_one) return true;
        if (x == one) return false;
    }
    return false;
}

constexpr std::uint32_t kTrialPrimes[] = {3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                          37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

bool is_prime(u64 n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint32_t q : kTrialPrimes) {
        if (n == q) return true;
        if (n % q == 0) return false;
    }
    if (n < 73 * 73) return true;

    u64 d = n - 1;
    int s = std::countr_zero(d);
    d >>= s;
    Montgomery64 mont(n);
    if (n < (u64{1} << 32)) {
        for (u64 a : {2, 7, 61})
            if (!miller_rabin_round(mont, n, d, s, a)) return false;
        return true;
    }
    // Jim Sinclair's base set, deterministic below 2^64.
    for (u64 a : {u64{2}, u64{325}, u64{9375}, u64{28178}, u64{450775}, u64{9780504},
                  u64{1795265022}})
        if (!miller_rabin_round(mont, n, d, s, a)) return false;
    return true;
}

namespace {

int jacobi(u64 a, u64 n) {
    // n odd, positive
    a %= n;
    int result = 1;
    while (a != 0) {
        int tz = std::countr_zero(a);
        a >>= tz;
        if ((tz & 1) && (n % 8 == 3 || n % 8 == 5)) result = -result;
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        std::swap(a, n);
        a %= n;
    }
    return n == 1 ? result : 0;
}

}  // namespace

int kronecker(i64 d, i64 n) {
    if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
    int result = 1;
    u64 un;
    if (n < 0) {
        un = static_cast<u64>(-(n + 1)) + 1;
        if (d < 0) result = -result;
    } else {
        un = static_cast<u64>(n);
    }
    int tz = std::countr_zero(un);
    if (tz > 0) {
        if (d % 2 == 0) return 0;
        u64 d8 = static_cast<u64>(((d % 8) + 8) % 8);
        if ((tz & 1) && (d8 == 3 || d8 == 5)) result = -result;
        un >>= tz;
    }
    if (un == 1) return result;
    // un is odd here, so un < 2^63
    const i64 sn = static_cast<i64>(un);
    const u64 a = static_cast<u64>(((d % sn) + sn) % sn);
    return result * jacobi(a, un);
}

std::vector<std::uint32_t> small_primes(std::uint32_t n) {
    std::vector<std::uint32_t> out;
    if (n < 2) return out;
    std::vector<bool> composite(n + 1, false);
    for (std::uint64_t i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
    }
    return out;
}

namespace {

u64 pollard_brent(u64 n) {
    if (n % 2 == 0) return 2;
    for (u64 c = 1;; ++c) {
        auto f = [&](u64 x) { return addmod(mulmod(x, x, n), c, n); };
        u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
        u64 r = 1;
        constexpr u64 m = 64;
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) y = f(y);
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = std::gcd(q, n);
                k += m;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

void factor_into(u64 n, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = pollard_brent(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

}  // namespace

std::vector<std::pair<u64, int>> factor(u64 n) {
    std::vector<u64> ps;
    if (n == 0) return {};
    for (u64 q = 2; q < 1000 && q * q <= n; q += (q == 2 ? 1 : 2)) {
        while (n % q == 0) {
            ps.push_back(q);
            n /= q;
        }
    }
    if (n > 1) factor_into(n, ps);
    std::sort(ps.begin(), ps.end());
    std::vector<std::pair<u64, int>> out;
    for (u64 p : ps) {
        if (!out.empty() && out.back().first == p)
            ++out.back().second;
        else
            out.emplace_back(p, 1);
    }
    return out;
}

u64 radical(u64 n) {
    u64 r = 1;
    for (auto [p, e] : factor(n)) r *= p;
    return r;
}

u64 primitive_root(u64 p) {
    if (p == 2) return 1;
    auto fs = factor(p - 1);
    for (u64 g = 2; g < p; ++g) {
        bool ok = true;
        for (auto [q, e] : fs) {
            if (powmod(g, (p - 1) / q, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw std::invalid_argument("primitive_root: no generator (p not prime?)");
}

bool is_fundamental_discriminant(i64 d) {
    auto squarefree = [](u64 n) {
        for (auto [p, e] : factor(n))
            if (e > 1) return false;
        return true;
    };
    if (d == 0 || d == 1) return false;
    u64 ad = static_cast<u64>(d < 0 ? -d : d);
    i64 r = ((d % 4) + 4) % 4;
    if (r == 1) return squarefree(ad);
    if (r != 0) return false;
    i64 m = d / 4;
    i64 mr = ((m % 4) + 4) % 4;
    if (mr != 2 && mr != 3) return false;
    return squarefree(static_cast<u64>(m < 0 ? -m : m));
}

u64 class_number(i64 d) {
    if (d >= 0 || ((d % 4) + 4) % 4 > 1)
        throw std::invalid_argument("class_number: need negative discriminant");
    u64 h = 0;
    const i64 ad = -d;
    for (i64 a = 1; 3 * a * a <= ad; ++a) {
        for (i64 b = -a + 1; b <= a; ++b) {
            i64 num = b * b - d;
            if (num % (4 * a) != 0) continue;
            i64 c = num / (4 * a);
            if (c < a) continue;
            if (c == a && b < 0) continue;
            if (std::gcd(std::gcd(a, b < 0 ? -b : b), c) != 1) continue;
            ++h;
        }
    }
    return h;
}

PrimeIterator::PrimeIterator(u64 lo, u64 hi, std::size_t segment_size)
    : lo_(lo), hi_(hi), segment_size_(segment_size == 0 ? 1 : segment_size) {
    if (lo_ > hi_) {
        done_ = true;
        return;
    }
    u64 root = isqrt(hi_);
    if (root > 0xFFFFFFFFull) throw std::out_of_range("PrimeIterator: hi too large");
    base_ = small_primes(static_cast<std::uint32_t>(root));
    if (!base_.empty() && base_.front() == 2) base_.erase(base_.begin());
    emitted_two_ = !(lo_ <= 2 && 2 <= hi_);
    next_start_ = std::max<u64>(lo_, 3) | 1;
    has_more_ = next_start_ <= hi_;
}

bool PrimeIterator::fill_segment() {
    if (!has_more_) return false;
    const u64 start = next_start_;
    const u64 avail = (hi_ - start) / 2 + 1;
    const std::size_t len = static_cast<std::size_t>(std::min<u64>(avail, segment_size_));
    seg_start_ = start;
    seg_len_ = len;
    pos_ = 0;
    bits_.assign((len + 63) / 64, 0);
    const u64 seg_end = start + 2 * static_cast<u64>(len - 1);
    for (std::uint32_t q32 : base_) {
        const u64 q = q32;
        const u64 q2 = q * q;
        if (q2 > seg_end) break;
        u64 first;
        if (q2 >= start) {
            first = q2;
        } else {
            first = (start + q - 1) / q * q;
            if ((first & 1) == 0) first += q;
        }
        for (u64 idx = (first - start) / 2; idx < len; idx += q)
            bits_[idx >> 6] |= u64{1} << (idx & 63);
    }
    if (start == 1) bits_[0] |= 1;
    has_more_ = avail > len;
    next_start_ = seg_end + 2;
    return true;
}

std::optional<u64> PrimeIterator::next() {
    if (done_) return std::nullopt;
    if (!emitted_two_) {
        emitted_two_ = true;
        return u64{2};
    }
    for (;;) {
        while (pos_ < seg_len_) {
            const std::size_t w = pos_ >> 6;
            const u64 word = ~bits_[w] >> (pos_ & 63);
            if (word == 0) {
                pos_ = (w + 1) << 6;
                continue;
            }
            pos_ += static_cast<std::size_t>(std::countr_zero(word));
            if (pos_ >= seg_len_) break;
            const u64 p = seg_start_ + 2 * static_cast<u64>(pos_);
            ++pos_;
            return p;
        }
        if (!fill_segment()) {
            done_ = true;
            return std::nullopt;
        }
    }
}

void primes_in(u64 lo, u64 hi, const std::function<void(u64)>& visitor,
               std::size_t segment_size) {
    PrimeIterator it(lo, hi, segment_size);
    while (auto p = it.next()) visitor(*p);
}

}  // namespace koblitz::numtheory
