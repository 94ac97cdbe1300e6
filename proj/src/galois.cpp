#include "koblitz/galois.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <regex>

#include <json.hpp>

#include "koblitz/errors.hpp"
#include "koblitz/numtheory.hpp"

namespace koblitz::galois {

namespace nt = koblitz::numtheory;
using nlohmann::json;

namespace {

u32 mod(i64 v, u32 m) {
    i64 r = v % static_cast<i64>(m);
    return static_cast<u32>(r < 0 ? r + m : r);
}

u64 gcd_u(u64 a, u64 b) { return std::gcd(a, b); }

}  // namespace

// ---------------------------------------------------------------- matrices

MatModM MatModM::identity(u32 m) { return from_entries(m, 1, 0, 0, 1); }

MatModM MatModM::from_entries(u32 m, i64 a, i64 b, i64 c, i64 d) {
    if (m == 0) throw ConfigError("matrix level must be positive");
    return MatModM{m, {mod(a, m), mod(b, m), mod(c, m), mod(d, m)}};
}

u32 MatModM::det() const {
    const u64 ad = static_cast<u64>(e[0]) * e[3] % m;
    const u64 bc = static_cast<u64>(e[1]) * e[2] % m;
    return static_cast<u32>((ad + m - bc) % m);
}

u32 MatModM::det_one_minus() const {
    const u64 x = (1 + m - e[0] % m) % m;
    const u64 y = (1 + m - e[3] % m) % m;
    const u64 bc = static_cast<u64>(e[1]) * e[2] % m;
    return static_cast<u32>((x * y % m + m - bc) % m);
}

bool MatModM::invertible() const { return std::gcd(det(), m) == 1; }

MatModM MatModM::operator*(const MatModM& o) const {
    if (m != o.m) throw ConfigError("matrix levels differ");
    const u64 M = m;
    auto dot = [M](u64 x, u64 y, u64 z, u64 w) { return static_cast<u32>((x * y + z * w) % M); };
    return MatModM{m,
                   {dot(e[0], o.e[0], e[1], o.e[2]), dot(e[0], o.e[1], e[1], o.e[3]),
                    dot(e[2], o.e[0], e[3], o.e[2]), dot(e[2], o.e[1], e[3], o.e[3])}};
}

MatModM MatModM::inverse() const {
    const u64 di = nt::invmod(det(), m);
    if (m > 1 && di == 0) throw ConfigError("matrix not invertible");
    auto s = [&](u64 v) { return static_cast<u32>(v * di % m); };
    return MatModM{m, {s(e[3]), s((m - e[1]) % m), s((m - e[2]) % m), s(e[0])}};
}

MatModM MatModM::reduce(u32 n) const {
    if (n == 0 || m % n != 0) throw ConfigError("reduction level must divide the matrix level");
    return MatModM{n, {e[0] % n, e[1] % n, e[2] % n, e[3] % n}};
}

bool psi_member(const MatModM& A, u64 t) {
    return gcd_u(A.det_one_minus(), A.m) == gcd_u(t, A.m);
}

// ------------------------------------------------------------------ blocks

LocalBlock LocalBlock::full(u32 level) {
    LocalBlock b;
    b.level = level;
    return b;
}

LocalBlock LocalBlock::with_predicate(u32 level, std::string name, std::vector<i64> params) {
    LocalBlock b;
    b.level = level;
    b.membership = Membership::Predicate;
    b.predicate = Predicate{std::move(name), std::move(params)};
    return b;
}

LocalBlock LocalBlock::generated_by(u32 level, std::vector<MatModM> gens) {
    LocalBlock b;
    b.level = level;
    b.membership = Membership::Generators;
    b.generators = std::move(gens);
    return b;
}

namespace {

using PredFn = std::function<bool(u32, u32, u32, u32)>;

PredFn make_predicate(const Predicate& p, u32 level) {
    auto q_param = [&]() -> u32 {
        if (p.params.size() != 1 || p.params[0] < 2)
            throw ConfigError("predicate " + p.name + " takes one modulus >= 2");
        const u32 q = static_cast<u32>(p.params[0]);
        if (level % q != 0) throw ConfigError("predicate modulus must divide block level");
        return q;
    };
    if (p.name == "upper_triangular_mod") {
        const u32 q = q_param();
        return [q](u32, u32, u32 c, u32) { return c % q == 0; };
    }
    if (p.name == "unipotent_corner_mod") {
        const u32 q = q_param();
        return [q](u32 a, u32 b, u32 c, u32) { return a % q == 1 % q && b % q == 0 && c % q == 0; };
    }
    throw ConfigError("unknown predicate '" + p.name + "'");
}

void check_budget(u64 n, const EnumerationOptions& opts, const std::string& what) {
    if (n > opts.cap)
        throw BudgetExceeded(what + " needs " + std::to_string(n) + " candidates, cap is " +
                             std::to_string(opts.cap));
}

u64 pow4(u64 n) { return n * n * n * n; }

}  // namespace

void for_each_element(const LocalBlock& block, const std::function<void(const MatModM&)>& visit,
                      const EnumerationOptions& opts) {
    const u32 n = block.level;
    if (n == 0) throw ConfigError("block level must be positive");
    if (block.element_cache) {
        check_budget(block.element_cache->size(), opts, "cached block");
        for (const MatModM& A : *block.element_cache) visit(A);
        return;
    }
    if (block.membership == Membership::Generators) {
        check_budget(pow4(n), opts, "closure at level " + std::to_string(n));
        for (const MatModM& g : block.generators)
            if (g.m != n || !g.invertible())
                throw ConfigError("generator is not in GL2(Z/" + std::to_string(n) + ")");
        const u64 N = n;
        auto code = [N](const MatModM& A) {
            return ((static_cast<u64>(A.e[0]) * N + A.e[1]) * N + A.e[2]) * N + A.e[3];
        };
        std::vector<bool> seen(pow4(n), false);
        std::vector<MatModM> frontier{MatModM::identity(n)};
        seen[code(frontier[0])] = true;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const MatModM A = frontier[i];
            visit(A);
            for (const MatModM& g : block.generators) {
                const MatModM B = A * g;
                const u64 c = code(B);
                if (!seen[c]) {
                    seen[c] = true;
                    frontier.push_back(B);
                }
            }
        }
        return;
    }
    check_budget(pow4(n), opts, "block at level " + std::to_string(n));
    PredFn pred;
    if (block.membership == Membership::Predicate) pred = make_predicate(block.predicate, n);
    MatModM A{n, {}};
    for (u32 a = 0; a < n; ++a)
        for (u32 b = 0; b < n; ++b)
            for (u32 c = 0; c < n; ++c)
                for (u32 d = 0; d < n; ++d) {
                    A.e = {a, b, c, d};
                    if (!A.invertible()) continue;
                    if (pred && !pred(a, b, c, d)) continue;
                    visit(A);
                }
}

std::vector<MatModM> block_elements(const LocalBlock& block, const EnumerationOptions& opts) {
    std::vector<MatModM> out;
    for_each_element(block, [&](const MatModM& A) { out.push_back(A); }, opts);
    return out;
}

Integer block_order(const LocalBlock& block, const EnumerationOptions& opts) {
    if (block.membership == Membership::FullGL2 && !block.element_cache) return gl2_order(block.level);
    u64 n = 0;
    for_each_element(block, [&](const MatModM&) { ++n; }, opts);
    return Integer(static_cast<unsigned long>(n));
}

Integer gl2_order(u64 n) {
    Integer r = 1;
    for (auto [l, k] : nt::factor(n)) {
        Integer le;
        mpz_ui_pow_ui(le.get_mpz_t(), l, 4 * k - 3);
        r *= le * static_cast<unsigned long>(l - 1) * static_cast<unsigned long>(l * l - 1);
    }
    return r;
}

// -------------------------------------------------------------- characters

namespace {

u32 sign2(const MatModM& A) {
    const MatModM B = A.reduce(2);
    // nonzero vectors (1,0), (0,1), (1,1) coded as 1, 2, 3
    int img[4];
    for (u32 v = 1; v <= 3; ++v) {
        const u32 x = v & 1, y = v >> 1;
        const u32 X = (B.a() * x + B.b() * y) & 1;
        const u32 Y = (B.c() * x + B.d() * y) & 1;
        img[v] = static_cast<int>(X | (Y << 1));
    }
    int inversions = 0;
    for (int i = 1; i <= 3; ++i)
        for (int j = i + 1; j <= 3; ++j)
            if (img[i] > img[j]) ++inversions;
    return static_cast<u32>(inversions & 1);
}

u32 sign_value(int s) { return s == 1 ? 0 : 1; }

u32 discrete_log(u64 x, u64 l, u64 g) {
    x %= l;
    u64 y = 1;
    for (u32 k = 0; k + 1 < l; ++k) {
        if (y == x) return k;
        y = y * g % l;
    }
    throw ConfigError("discrete log: " + std::to_string(x) + " is not a unit mod " +
                      std::to_string(l));
}

i64 param(const GlueChar& c, std::size_t i) {
    if (c.params.size() <= i)
        throw ConfigError("character " + char_name(c.kind) + " is missing parameters");
    return c.params[i];
}

u64 root_param(const GlueChar& c, std::size_t i, u64 l) {
    if (c.params.size() > i) return static_cast<u64>(c.params[i]);
    return nt::primitive_root(l);
}

}  // namespace

u32 GlueChar::target() const {
    switch (kind) {
        case CharKind::Sign2:
        case CharKind::DetJac:
        case CharKind::DetMod4:
        case CharKind::DetKron:
            return 2;
        case CharKind::DetClass:
        case CharKind::UpperA:
            return static_cast<u32>(param(*this, kind == CharKind::DetClass ? 1 : 0));
        case CharKind::Beta:
            return static_cast<u32>(param(*this, 0) - 1);
    }
    return 0;
}

u32 GlueChar::operator()(const MatModM& A) const {
    switch (kind) {
        case CharKind::Sign2:
            return sign2(A);
        case CharKind::DetJac: {
            const i64 d = param(*this, 0);
            return sign_value(nt::kronecker(A.reduce(static_cast<u32>(d)).det(), d));
        }
        case CharKind::DetMod4:
            return A.reduce(4).det() == 1 ? 0 : 1;
        case CharKind::DetKron: {
            const i64 D = param(*this, 0);
            const u32 ad = static_cast<u32>(D < 0 ? -D : D);
            return sign_value(nt::kronecker(D, A.reduce(ad).det()));
        }
        case CharKind::DetClass: {
            const u64 l = static_cast<u64>(param(*this, 0));
            const u64 q = static_cast<u64>(param(*this, 1));
            return discrete_log(A.reduce(static_cast<u32>(l)).det(), l, root_param(*this, 2, l)) % q;
        }
        case CharKind::UpperA: {
            const u32 q = static_cast<u32>(param(*this, 0));
            const u32 a = A.reduce(q * q).a();
            if (a % q != 1 % q) throw ConfigError("upper_a needs a = 1 mod q on its block");
            return (a / q) % q;
        }
        case CharKind::Beta: {
            const u64 l = static_cast<u64>(param(*this, 0));
            return discrete_log(A.reduce(static_cast<u32>(l)).a(), l, root_param(*this, 1, l));
        }
    }
    return 0;
}

namespace {

const std::vector<std::pair<CharKind, std::string>>& char_names() {
    static const std::vector<std::pair<CharKind, std::string>> names = {
        {CharKind::Sign2, "sign2"},       {CharKind::DetJac, "det_jacobi"},
        {CharKind::DetMod4, "det_mod4"},  {CharKind::DetKron, "det_kronecker"},
        {CharKind::DetClass, "det_class"}, {CharKind::UpperA, "upper_a"},
        {CharKind::Beta, "beta"}};
    return names;
}

bool is_prime_i(i64 v) { return v > 1 && nt::is_prime(static_cast<u64>(v)); }

bool is_generator(i64 g, u64 l) {
    if (g <= 0 || static_cast<u64>(g) >= l) return false;
    for (auto [f, e] : nt::factor(l - 1))
        if (nt::powmod(static_cast<u64>(g), (l - 1) / f, l) == 1) return false;
    return true;
}

void validate_char(const GlueChar& c, const std::vector<LocalBlock>& blocks) {
    if (c.block >= blocks.size()) throw ConfigError("relation refers to a missing block");
    const i64 n = blocks[c.block].level;
    const std::string who = char_name(c.kind);
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(who + ": " + msg);
    };
    switch (c.kind) {
        case CharKind::Sign2:
            need(n % 2 == 0, "block level must be even");
            break;
        case CharKind::DetMod4:
            need(n % 4 == 0, "block level must be divisible by 4");
            break;
        case CharKind::DetJac: {
            const i64 d = param(c, 0);
            need(d > 1 && d % 2 == 1 && n % d == 0, "needs odd d > 1 dividing the level");
            break;
        }
        case CharKind::DetKron: {
            const i64 D = param(c, 0);
            need(D % 4 == 0 && D != 0 && n % (D < 0 ? -D : D) == 0,
                 "needs D = 0 mod 4 with |D| dividing the level");
            break;
        }
        case CharKind::DetClass: {
            const i64 l = param(c, 0), q = param(c, 1);
            need(is_prime_i(l) && n % l == 0 && q > 0 && (l - 1) % q == 0,
                 "needs prime l dividing the level and q | l - 1");
            if (c.params.size() > 2)
                need(is_generator(c.params[2], static_cast<u64>(l)), "g must be a primitive root");
            break;
        }
        case CharKind::UpperA: {
            const i64 q = param(c, 0);
            need(q > 1 && n % (q * q) == 0, "needs q^2 dividing the level");
            break;
        }
        case CharKind::Beta: {
            const i64 l = param(c, 0);
            need(is_prime_i(l) && n % l == 0, "needs a prime dividing the level");
            if (c.params.size() > 1)
                need(is_generator(c.params[1], static_cast<u64>(l)), "g must be a primitive root");
            break;
        }
    }
}

}  // namespace

std::string char_name(CharKind k) {
    for (const auto& [kind, name] : char_names())
        if (kind == k) return name;
    return "?";
}

CharKind char_from_name(const std::string& s) {
    for (const auto& [kind, name] : char_names())
        if (name == s) return kind;
    throw ConfigError("unknown character '" + s + "'");
}

// ------------------------------------------------------------------- specs

u64 GroupSpec::level() const {
    u64 L = 1;
    for (const LocalBlock& b : blocks) L *= b.level;
    return L;
}

void GroupSpec::validate() const {
    if (blocks.empty()) throw ConfigError("group spec has no blocks");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].level == 0) throw ConfigError("block level must be positive");
        for (std::size_t j = i + 1; j < blocks.size(); ++j)
            if (std::gcd(blocks[i].level, blocks[j].level) != 1)
                throw ConfigError("block levels must be pairwise coprime");
    }
    for (const Relation& r : relations) {
        validate_char(r.lhs, blocks);
        validate_char(r.rhs, blocks);
        if (r.lhs.target() != r.rhs.target())
            throw ConfigError("related characters have different targets");
    }
}

namespace {

using Condition = std::function<bool(const MatModM&)>;

struct Counts {
    Integer total, hits;
};

// Per-block classes keyed by the values of every character on that block.
struct BlockClasses {
    std::vector<std::pair<std::size_t, int>> slots;  // (relation, side)
    std::vector<std::vector<u32>> keys;
    std::vector<std::array<Integer, 2>> counts;  // [all, hits]
};

Counts glued_count(const GroupSpec& spec, const std::vector<Condition>& conds,
                   const EnumerationOptions& opts) {
    spec.validate();
    const std::size_t nb = spec.blocks.size();
    std::vector<BlockClasses> cls(nb);
    for (std::size_t r = 0; r < spec.relations.size(); ++r) {
        cls[spec.relations[r].lhs.block].slots.emplace_back(r, 0);
        cls[spec.relations[r].rhs.block].slots.emplace_back(r, 1);
    }
    for (std::size_t i = 0; i < nb; ++i) {
        BlockClasses& bc = cls[i];
        std::vector<const GlueChar*> chars;
        for (auto [r, side] : bc.slots)
            chars.push_back(side == 0 ? &spec.relations[r].lhs : &spec.relations[r].rhs);
        std::map<std::vector<u32>, std::array<u64, 2>> table;
        std::vector<u32> key(chars.size());
        for_each_element(
            spec.blocks[i],
            [&](const MatModM& A) {
                for (std::size_t s = 0; s < chars.size(); ++s) key[s] = (*chars[s])(A);
                auto& cnt = table[key];
                ++cnt[0];
                if (conds[i](A)) ++cnt[1];
            },
            opts);
        for (const auto& [k, c] : table) {
            bc.keys.push_back(k);
            bc.counts.push_back({Integer(static_cast<unsigned long>(c[0])),
                                 Integer(static_cast<unsigned long>(c[1]))});
        }
    }

    // relations checked once the later of their two blocks is fixed
    std::vector<std::vector<std::size_t>> ready(nb);
    for (std::size_t r = 0; r < spec.relations.size(); ++r)
        ready[std::max(spec.relations[r].lhs.block, spec.relations[r].rhs.block)].push_back(r);
    std::vector<std::array<u32, 2>> value(spec.relations.size());

    Counts out{0, 0};
    std::function<void(std::size_t, const Integer&, const Integer&)> dfs =
        [&](std::size_t i, const Integer& all, const Integer& hit) {
            if (i == nb) {
                out.total += all;
                out.hits += hit;
                return;
            }
            const BlockClasses& bc = cls[i];
            for (std::size_t k = 0; k < bc.keys.size(); ++k) {
                for (std::size_t s = 0; s < bc.slots.size(); ++s)
                    value[bc.slots[s].first][bc.slots[s].second] = bc.keys[k][s];
                bool ok = true;
                for (std::size_t r : ready[i])
                    if (value[r][0] != value[r][1]) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                dfs(i + 1, all * bc.counts[k][0], hit * bc.counts[k][1]);
            }
        };
    dfs(0, Integer(1), Integer(1));
    return out;
}

DensityResult make_result(const Counts& c) {
    if (c.total == 0) throw ConfigError("glued group is empty");
    DensityResult r;
    r.group_order = c.total;
    r.hit_count = c.hits;
    r.value = Rational(c.hits, c.total);
    r.value.canonicalize();
    return r;
}

void check_level(const GroupSpec& spec, u64 m) {
    if (m == 0 || spec.level() % m != 0)
        throw ConfigError("level " + std::to_string(m) + " does not divide spec level " +
                          std::to_string(spec.level()));
}

}  // namespace

Integer group_order(const GroupSpec& spec, const EnumerationOptions& opts) {
    std::vector<Condition> conds(spec.blocks.size(), [](const MatModM&) { return true; });
    return glued_count(spec, conds, opts).total;
}

DensityResult delta(const GroupSpec& spec, u64 t, u64 m, const EnumerationOptions& opts) {
    if (t == 0) throw ConfigError("t must be positive");
    if (m == 0) m = spec.level();
    check_level(spec, m);
    std::vector<Condition> conds;
    for (const LocalBlock& b : spec.blocks) {
        const u64 g = gcd_u(m, b.level);
        const u64 want = gcd_u(t, g);
        conds.push_back([g, want](const MatModM& A) {
            return g == 1 || gcd_u(A.det_one_minus() % g, g) == want;
        });
    }
    return make_result(glued_count(spec, conds, opts));
}

DensityResult theta(const GroupSpec& spec, u64 m, const EnumerationOptions& opts) {
    check_level(spec, m);
    std::vector<Condition> conds;
    for (const LocalBlock& b : spec.blocks) {
        const u64 g = gcd_u(m, b.level);
        conds.push_back([g](const MatModM& A) { return A.det_one_minus() % g == 0; });
    }
    return make_result(glued_count(spec, conds, opts));
}

GroupSpec extend_to_level(const GroupSpec& spec, u64 L) {
    GroupSpec out = spec;
    for (auto [l, e] : nt::factor(L)) {
        u64 le = 1;
        for (int i = 0; i < e; ++i) le *= l;
        bool found = false;
        for (LocalBlock& b : out.blocks) {
            if (b.level % l != 0) continue;
            found = true;
            u64 part = 1;
            for (u64 v = b.level; v % l == 0; v /= l) part *= l;
            if (part >= le) break;
            if (b.membership != Membership::FullGL2 || b.element_cache)
                throw ConfigError("spec " + spec.name + " cannot be lifted to level " +
                                  std::to_string(L) + " (block at level " +
                                  std::to_string(b.level) + " is not full)");
            const u64 lifted = b.level / part * le;
            if (lifted > 0xFFFFFFFFull) throw ConfigError("lifted block level too large");
            b.level = static_cast<u32>(lifted);
            break;
        }
        if (found) continue;
        if (spec.splitting_modulus % l == 0)
            throw ConfigError("spec " + spec.name + " has no block for " + std::to_string(l));
        out.blocks.push_back(LocalBlock::full(static_cast<u32>(le)));
    }
    return out;
}

GroupSpec conjugate_block(const GroupSpec& spec, std::size_t i, const MatModM& g,
                          const EnumerationOptions& opts) {
    if (i >= spec.blocks.size()) throw ConfigError("no such block");
    GroupSpec out = spec;
    LocalBlock& b = out.blocks[i];
    if (g.m != b.level || !g.invertible()) throw ConfigError("conjugator must lie in GL2 of the block");
    const MatModM gi = g.inverse();
    std::vector<MatModM> elems;
    for_each_element(spec.blocks[i], [&](const MatModM& A) { elems.push_back(g * A * gi); }, opts);
    b.element_cache = std::move(elems);
    return out;
}

// ------------------------------------------------------- closed-form counts

u64 eigenvalue_count(u64 l, u64 a) {
    a %= l;
    if (a == 0) throw DomainError("eigenvalue_count: a must be a unit");
    return a == 1 ? l * l : l * l + l;
}

YCounts y_counts(u64 l) {
    if (l < 3 || !nt::is_prime(l)) throw DomainError("y_counts: need an odd prime");
    const Integer L = static_cast<unsigned long>(l);
    const Integer base = L * (L - 1) * (L - 1) * (L + 1) / 2 - (L - 1) / 2 * (L * L + L);
    YCounts y;
    y.plus = base + L;
    y.minus = base;
    const Rational norm = Rational(gl2_order(l)) * Rational(L - 1, L);
    y.sum_ratio = Rational(y.plus + y.minus) / norm;
    y.diff_ratio = Rational(y.plus - y.minus) / norm;
    return y;
}

DensityResult cm_delta(const CMUnitGroupSpec& spec, u64 t) {
    if (spec.k == 0 || spec.k > 15) throw DomainError("cm_delta: k must be in [1, 15]");
    if (t == 0) throw DomainError("cm_delta: t must be positive");
    const u64 M = u64{1} << spec.k;
    const u32 depth = spec.filtration_depth;
    // z in p^j with p = (1 + i), p^2 = (2)
    auto in_ideal = [&](u64 x, u64 y, u32 j) {
        const u32 r = j / 2;
        if (r >= spec.k) return x == 0 && y == 0;
        const u64 two_r = u64{1} << r;
        if (x % two_r || y % two_r) return false;
        if (j % 2 == 0) return true;
        return ((x / two_r + y / two_r) & 1) == 0;
    };
    const u64 want = gcd_u(t, M);
    u64 total = 0, hits = 0;
    for (u64 x = 0; x < M; ++x) {
        for (u64 y = 0; y < M; ++y) {
            if (!in_ideal((x + M - 1) % M, y, depth)) continue;
            ++total;
            const u64 u = (1 + M - x) % M;
            const u64 n = (u * u + y * y) % M;
            if (gcd_u(n, M) == want) ++hits;
        }
    }
    return make_result(Counts{Integer(static_cast<unsigned long>(total)),
                              Integer(static_cast<unsigned long>(hits))});
}

// ---------------------------------------------------------------- builtins

GroupSpec full_gl2_spec(u64 m) {
    if (m == 0) throw UnknownSpec("full_gl2 needs a positive level");
    GroupSpec s;
    s.name = "full_gl2(" + std::to_string(m) + ")";
    for (auto [l, e] : nt::factor(m)) {
        u64 le = 1;
        for (int i = 0; i < e; ++i) le *= l;
        s.blocks.push_back(LocalBlock::full(static_cast<u32>(le)));
    }
    if (s.blocks.empty()) s.blocks.push_back(LocalBlock::full(1));
    s.splitting_modulus = 1;
    return s;
}

GroupSpec serre_spec(i64 D) {
    if (!nt::is_fundamental_discriminant(D))
        throw InvalidDiscriminant("serre(" + std::to_string(D) + "): not a fundamental discriminant");
    const u64 ad = static_cast<u64>(D < 0 ? -D : D);
    if (ad > 0xFFFFFFFFull / 2) throw InvalidDiscriminant("serre: |D| too large");
    GroupSpec s;
    s.name = "serre(" + std::to_string(D) + ")";
    if (((D % 4) + 4) % 4 == 1) {
        s.blocks = {LocalBlock::full(2), LocalBlock::full(static_cast<u32>(ad))};
        s.relations = {{GlueChar{0, CharKind::Sign2, {}},
                        GlueChar{1, CharKind::DetJac, {static_cast<i64>(ad)}}}};
        s.splitting_modulus = 2 * ad;
    } else {
        s.blocks = {LocalBlock::full(static_cast<u32>(ad))};
        s.relations = {{GlueChar{0, CharKind::Sign2, {}}, GlueChar{0, CharKind::DetKron, {D}}}};
        s.splitting_modulus = ad;
    }
    return s;
}

namespace {

GroupSpec jones_spec() {
    GroupSpec s;
    s.name = "jones_x3_9x_18";
    s.blocks = {LocalBlock::full(4), LocalBlock::with_predicate(9, "upper_triangular_mod", {3}),
                LocalBlock::generated_by(5, {MatModM::from_entries(5, 3, 4, 2, 2),
                                             MatModM::from_entries(5, 4, 1, 2, 2)})};
    s.relations = {{GlueChar{0, CharKind::Sign2, {}}, GlueChar{0, CharKind::DetMod4, {}}},
                   {GlueChar{0, CharKind::DetMod4, {}}, GlueChar{1, CharKind::Beta, {3}}}};
    s.splitting_modulus = 30;
    return s;
}

GroupSpec x0_11_spec() {
    GroupSpec s;
    s.name = "x0_11";
    s.blocks = {LocalBlock::full(2), LocalBlock::with_predicate(25, "unipotent_corner_mod", {5}),
                LocalBlock::full(11)};
    s.relations = {{GlueChar{1, CharKind::UpperA, {5}}, GlueChar{2, CharKind::DetClass, {11, 5, 2}}},
                   {GlueChar{2, CharKind::DetJac, {11}}, GlueChar{0, CharKind::Sign2, {}}}};
    s.splitting_modulus = 110;
    return s;
}

}  // namespace

GroupSpec builtin_spec(const std::string& raw) {
    std::string name;
    for (char c : raw)
        if (c != ' ') name += c;
    if (name == "jones_x3_9x_18") return jones_spec();
    if (name == "x0_11") return x0_11_spec();
    static const std::regex serre_re(R"(serre\((-?\d{1,12})\))");
    static const std::regex full_re(R"(full_gl2\((\d{1,12})\))");
    std::smatch m;
    if (std::regex_match(name, m, serre_re)) return serre_spec(std::stoll(m[1]));
    if (std::regex_match(name, m, full_re)) return full_gl2_spec(std::stoull(m[1]));
    throw UnknownSpec("unknown group spec '" + raw + "'");
}

// ----------------------------------------------------------- serialization

namespace {

const char* membership_name(Membership m) {
    switch (m) {
        case Membership::FullGL2: return "full_gl2";
        case Membership::Predicate: return "predicate";
        case Membership::Generators: return "generators";
    }
    return "?";
}

Membership membership_from(const std::string& s) {
    if (s == "full_gl2") return Membership::FullGL2;
    if (s == "predicate") return Membership::Predicate;
    if (s == "generators") return Membership::Generators;
    throw ConfigError("unknown membership '" + s + "'");
}

json mats_to_json(const std::vector<MatModM>& ms) {
    json arr = json::array();
    for (const MatModM& A : ms) arr.push_back({A.e[0], A.e[1], A.e[2], A.e[3]});
    return arr;
}

std::vector<MatModM> mats_from_json(const json& arr, u32 level) {
    std::vector<MatModM> out;
    for (const json& a : arr) {
        if (!a.is_array() || a.size() != 4) throw ConfigError("matrix must be a 4-integer array");
        out.push_back(MatModM::from_entries(level, a[0].get<i64>(), a[1].get<i64>(),
                                            a[2].get<i64>(), a[3].get<i64>()));
    }
    return out;
}

json char_to_json(const GlueChar& c) {
    return json{{"block", c.block}, {"char", char_name(c.kind)}, {"params", c.params}};
}

GlueChar char_from_json(const json& j) {
    GlueChar c;
    c.block = j.at("block").get<std::size_t>();
    c.kind = char_from_name(j.at("char").get<std::string>());
    c.params = j.value("params", std::vector<i64>{});
    return c;
}

}  // namespace

std::string to_json(const GroupSpec& spec) {
    json blocks = json::array();
    for (const LocalBlock& b : spec.blocks) {
        json jb{{"level", b.level}, {"membership", membership_name(b.membership)}};
        if (b.membership == Membership::Predicate) {
            jb["predicate"] = b.predicate.name;
            jb["params"] = b.predicate.params;
        }
        if (b.membership == Membership::Generators) jb["generators"] = mats_to_json(b.generators);
        if (b.element_cache) jb["elements"] = mats_to_json(*b.element_cache);
        blocks.push_back(std::move(jb));
    }
    json rels = json::array();
    for (const Relation& r : spec.relations)
        rels.push_back(json::array({char_to_json(r.lhs), char_to_json(r.rhs)}));
    json j{{"name", spec.name},
           {"blocks", std::move(blocks)},
           {"relations", std::move(rels)},
           {"splitting_modulus", spec.splitting_modulus}};
    return j.dump();
}

GroupSpec from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("group spec is not valid JSON: ") + e.what());
    }
    try {
        GroupSpec s;
        s.name = j.value("name", std::string{});
        s.splitting_modulus = j.value("splitting_modulus", u64{1});
        for (const json& jb : j.at("blocks")) {
            LocalBlock b;
            b.level = jb.at("level").get<u32>();
            b.membership = membership_from(jb.at("membership").get<std::string>());
            if (b.membership == Membership::Predicate)
                b.predicate = Predicate{jb.at("predicate").get<std::string>(),
                                        jb.value("params", std::vector<i64>{})};
            if (b.membership == Membership::Generators)
                b.generators = mats_from_json(jb.at("generators"), b.level);
            if (jb.contains("elements")) b.element_cache = mats_from_json(jb["elements"], b.level);
            s.blocks.push_back(std::move(b));
        }
        for (const json& jr : j.value("relations", json::array())) {
            if (!jr.is_array() || jr.size() != 2) throw ConfigError("relation must be a pair");
            s.relations.push_back(Relation{char_from_json(jr[0]), char_from_json(jr[1])});
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed group spec: ") + e.what());
    }
}

}  // namespace koblitz::galois
