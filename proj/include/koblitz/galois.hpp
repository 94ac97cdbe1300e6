#pragma once

// Exact densities of Frobenius conditions over explicit mod-m Galois images.
// A GroupSpec describes G(m) as a fiber product of local blocks glued along
// equalities of characters; counts are done per block and combined by class.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace koblitz::galois {

using Integer = mpz_class;
using Rational = mpq_class;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

/// 2x2 matrix [[a, b], [c, d]] over Z/m, entries reduced to [0, m).
struct MatModM {
    u32 m = 1;
    std::array<u32, 4> e{};  // a, b, c, d

    static MatModM identity(u32 m);
    static MatModM from_entries(u32 m, i64 a, i64 b, i64 c, i64 d);

    u32 a() const { return e[0]; }
    u32 b() const { return e[1]; }
    u32 c() const { return e[2]; }
    u32 d() const { return e[3]; }
    u32 det() const;
    /// det(I - A) mod m.
    u32 det_one_minus() const;
    bool invertible() const;
    MatModM operator*(const MatModM& o) const;
    MatModM inverse() const;
    /// Entrywise reduction to a level dividing m.
    MatModM reduce(u32 n) const;
    bool operator==(const MatModM& o) const = default;
};

/// det(I - A) in t (Z/m)^*.
bool psi_member(const MatModM& A, u64 t);

enum class Membership { FullGL2, Predicate, Generators };

/// Named block predicates: "upper_triangular_mod" (q) keeps lower-left = 0
/// mod q; "unipotent_corner_mod" (q) keeps [[1+qa, qb], [qc, u]].
struct Predicate {
    std::string name;
    std::vector<i64> params;
    bool operator==(const Predicate&) const = default;
};

struct LocalBlock {
    u32 level = 1;
    Membership membership = Membership::FullGL2;
    Predicate predicate;
    std::vector<MatModM> generators;
    /// When present, the block is exactly this element list.
    std::optional<std::vector<MatModM>> element_cache;

    static LocalBlock full(u32 level);
    static LocalBlock with_predicate(u32 level, std::string name, std::vector<i64> params);
    static LocalBlock generated_by(u32 level, std::vector<MatModM> gens);
    bool operator==(const LocalBlock&) const = default;
};

/// Character catalog. Values live in Z/target; sign characters map +1 -> 0
/// and -1 -> 1.
enum class CharKind {
    Sign2,     // permutation sign on the nonzero vectors of (Z/2)^2
    DetJac,    // (d): Jacobi symbol (det | d), d odd
    DetMod4,   // nontrivial character of (Z/4)^* applied to det
    DetKron,   // (D): Kronecker symbol (D | det), D = 0 mod 4
    DetClass,  // (l, q[, g]): log_g(det mod l) mod q, g the least primitive root by default
    UpperA,    // (q): ((a - 1)/q) mod q on a block of level divisible by q^2
    Beta,      // (l[, g]): log_g(a mod l), valued in Z/(l - 1)
};

struct GlueChar {
    std::size_t block = 0;
    CharKind kind = CharKind::Sign2;
    std::vector<i64> params;

    u32 target() const;
    /// Value on an element of the glued group's block `block`.
    u32 operator()(const MatModM& A) const;
    bool operator==(const GlueChar&) const = default;
};

struct Relation {
    GlueChar lhs, rhs;
    bool operator==(const Relation&) const = default;
};

struct GroupSpec {
    std::string name;
    std::vector<LocalBlock> blocks;
    std::vector<Relation> relations;
    /// M such that G(m) = GL2(Z/m) and G(Mm) = G(M) x G(m) for gcd(m, M) = 1.
    u64 splitting_modulus = 1;

    u64 level() const;
    /// Throws ConfigError on non-coprime levels or malformed relations.
    void validate() const;
    bool operator==(const GroupSpec&) const = default;
};

struct EnumerationOptions {
    /// Largest per-block candidate count (level^4, or closure size).
    u64 cap = 100000000;
};

/// Calls visit for every element of the block.
void for_each_element(const LocalBlock& block, const std::function<void(const MatModM&)>& visit,
                      const EnumerationOptions& opts = {});
std::vector<MatModM> block_elements(const LocalBlock& block, const EnumerationOptions& opts = {});
Integer block_order(const LocalBlock& block, const EnumerationOptions& opts = {});

/// |GL2(Z/n)|
Integer gl2_order(u64 n);

/// Order of the glued group, without materializing tuples.
Integer group_order(const GroupSpec& spec, const EnumerationOptions& opts = {});

struct DensityResult {
    Rational value;
    Integer group_order;
    Integer hit_count;

    Integer numerator() const { return value.get_num(); }
    Integer denominator() const { return value.get_den(); }
};

/// delta_t(m) = |G(m) cap Psi_t(m)| / |G(m)| at a level m dividing the spec
/// level (0 means the spec level).
DensityResult delta(const GroupSpec& spec, u64 t, u64 m = 0, const EnumerationOptions& opts = {});

/// Fraction of G(m) with det(I - A) = 0 mod m.
DensityResult theta(const GroupSpec& spec, u64 m, const EnumerationOptions& opts = {});

/// Same spec with level divisible by L: FULL blocks are lifted and missing
/// primes get FULL blocks. Throws ConfigError if a non-full block would need
/// lifting.
GroupSpec extend_to_level(const GroupSpec& spec, u64 L);

/// Replaces block i by its conjugate g B g^{-1} (as an explicit element list).
GroupSpec conjugate_block(const GroupSpec& spec, std::size_t i, const MatModM& g,
                          const EnumerationOptions& opts = {});

/// #{A in GL2(F_l) with eigenvalues 1 and a}.
u64 eigenvalue_count(u64 l, u64 a);

struct YCounts {
    Integer plus, minus;
    Rational sum_ratio;   // (|Y+| + |Y-|) / (|GL2(F_l)| (1 - 1/l))
    Rational diff_ratio;  // (|Y+| - |Y-|) / (|GL2(F_l)| (1 - 1/l))
};

/// Y+- = {A in GL2(F_l) : det(I - A) != 0, (det A | l) = +-1}, closed form.
YCounts y_counts(u64 l);

/// Units 1 + p^depth of Z[i] modulo 2^k, p = (1 + i).
struct CMUnitGroupSpec {
    u32 k = 4;
    u32 filtration_depth = 3;
};

/// Proportion of a in the unit group with N(1 - a) in t (Z/2^k)^*.
DensityResult cm_delta(const CMUnitGroupSpec& spec, u64 t);

/// "serre(D)", "jones_x3_9x_18", "x0_11", "full_gl2(m)". Throws UnknownSpec.
GroupSpec builtin_spec(const std::string& name);
GroupSpec serre_spec(i64 D);
GroupSpec full_gl2_spec(u64 m);

std::string to_json(const GroupSpec& spec);
GroupSpec from_json(const std::string& text);

std::string char_name(CharKind k);
CharKind char_from_name(const std::string& s);

}  // namespace koblitz::galois
