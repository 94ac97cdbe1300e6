#pragma once

// Integer number theory on 64-bit operands: modular arithmetic, deterministic
// primality, segmented prime enumeration and quadratic characters.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace koblitz::numtheory {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 addmod(u64 a, u64 b, u64 m) {
    // a, b < m
    u64 s = a + b;
    if (s < a || s >= m) s -= m;
    return s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + (m - b); }

u64 powmod(u64 base, u64 exp, u64 m);

/// Modular inverse of a mod m, or 0 if gcd(a, m) != 1.
u64 invmod(u64 a, u64 m);

/// floor(sqrt(n)) for any 64-bit n.
u64 isqrt(u64 n);

/// Deterministic for every n < 2^64.
bool is_prime(u64 n);

/// Kronecker symbol (d | n) with the usual conventions, including n <= 0 and
/// even n.
int kronecker(i64 d, i64 n);

/// Primes p <= n by a plain sieve of Eratosthenes.
std::vector<std::uint32_t> small_primes(std::uint32_t n);

/// Prime factorization as (prime, exponent) pairs in increasing order.
std::vector<std::pair<u64, int>> factor(u64 n);

/// Product of the distinct primes dividing n (rad(1) = 1).
u64 radical(u64 n);

/// Smallest generator of (Z/p)^* for an odd prime p.
u64 primitive_root(u64 p);

/// Quadratic character attached to a fundamental discriminant.
struct KroneckerChar {
    i64 discriminant;

    int operator()(i64 n) const { return kronecker(discriminant, n); }
    /// Conductor |discriminant|; the character is periodic modulo it.
    u64 modulus() const {
        return static_cast<u64>(discriminant < 0 ? -discriminant : discriminant);
    }
};

bool is_fundamental_discriminant(i64 d);

/// Class number of the imaginary quadratic order of discriminant d < 0,
/// by counting reduced binary quadratic forms.
u64 class_number(i64 d);

/// Montgomery arithmetic modulo an odd n < 2^64 with R = 2^64. Residues are
/// kept in Montgomery form; convert with `to` / `from`.
class Montgomery64 {
public:
    explicit Montgomery64(u64 n);

    u64 modulus() const { return n_; }
    u64 one() const { return one_; }
    u64 to(u64 a) const { return mul(a % n_, r2_); }
    u64 from(u64 a) const { return reduce(a); }

    u64 mul(u64 a, u64 b) const {
        u128 t = static_cast<u128>(a) * b;
        u64 m = static_cast<u64>(t) * ninv_;
        u64 mh = static_cast<u64>((static_cast<u128>(m) * n_) >> 64);
        u64 th = static_cast<u64>(t >> 64);
        return th >= mh ? th - mh : th - mh + n_;
    }
    u64 sqr(u64 a) const { return mul(a, a); }
    u64 add(u64 a, u64 b) const { return addmod(a, b, n_); }
    u64 sub(u64 a, u64 b) const { return submod(a, b, n_); }
    u64 neg(u64 a) const { return a == 0 ? 0 : n_ - a; }
    u64 pow(u64 a, u64 e) const;
    /// Inverse of a Montgomery residue modulo a prime n (Fermat).
    u64 inv(u64 a) const { return pow(a, n_ - 2); }

private:
    u64 reduce(u64 a) const {
        u64 m = a * ninv_;
        u64 mh = static_cast<u64>((static_cast<u128>(m) * n_) >> 64);
        return mh == 0 ? 0 : n_ - mh;
    }

    u64 n_;
    u64 ninv_;  // n^{-1} mod 2^64
    u64 r2_;    // R^2 mod n
    u64 one_;   // R mod n
};

/// Same interface as Montgomery64 for odd n < 2^32, with R = 2^32. Residues
/// are passed as u64 but always fit in 32 bits.
class Montgomery32 {
public:
    explicit Montgomery32(u64 n);

    u64 modulus() const { return n_; }
    u64 one() const { return one_; }
    u64 to(u64 a) const { return (a % n_ << 32) % n_; }
    u64 from(u64 a) const { return mul(a, 1); }

    u64 mul(u64 a, u64 b) const {
        const u64 t = a * b;
        const std::uint32_t m = static_cast<std::uint32_t>(t) * ninv_;
        const u64 mh = (static_cast<u64>(m) * n_) >> 32;
        const u64 th = t >> 32;
        return th >= mh ? th - mh : th - mh + n_;
    }
    u64 sqr(u64 a) const { return mul(a, a); }
    u64 add(u64 a, u64 b) const {
        const u64 s = a + b;
        return s >= n_ ? s - n_ : s;
    }
    u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + n_ - b; }
    u64 neg(u64 a) const { return a == 0 ? 0 : n_ - a; }
    u64 pow(u64 a, u64 e) const;
    u64 inv(u64 a) const { return pow(a, n_ - 2); }

private:
    u64 n_;
    std::uint32_t ninv_;
    u64 one_;
};

inline constexpr std::size_t kDefaultSegmentSize = std::size_t{1} << 20;

/// Streams the primes of [lo, hi] in increasing order with a segmented,
/// odd-only sieve. Memory is O(segment_size + sqrt(hi)).
class PrimeIterator {
public:
    PrimeIterator(u64 lo, u64 hi, std::size_t segment_size = kDefaultSegmentSize);

    std::optional<u64> next();

    u64 lo() const { return lo_; }
    u64 hi() const { return hi_; }
    std::size_t segment_size() const { return segment_size_; }

private:
    bool fill_segment();

    u64 lo_, hi_;
    std::size_t segment_size_;
    std::vector<std::uint32_t> base_;
    std::vector<std::uint64_t> bits_;  // bit i set: seg_start_ + 2i is composite
    u64 seg_start_ = 0;                // odd
    std::size_t seg_len_ = 0;          // odd residues in the current segment
    std::size_t pos_ = 0;
    u64 next_start_ = 0;
    bool has_more_ = false;
    bool emitted_two_ = false;
    bool done_ = false;
};

/// Calls visitor(p) for every prime lo <= p <= hi, in increasing order.
void primes_in(u64 lo, u64 hi, const std::function<void(u64)>& visitor,
               std::size_t segment_size = kDefaultSegmentSize);

}  // namespace koblitz::numtheory
