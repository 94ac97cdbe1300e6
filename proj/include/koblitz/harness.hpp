#pragma once

// Experiment runner: counts primes p <= x with |E(F_p)|/t prime, estimates
// t_E and renders actual-vs-expected tables.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "koblitz/constants.hpp"
#include "koblitz/curve.hpp"

namespace koblitz::harness {

using u64 = std::uint64_t;
using i64 = std::int64_t;

struct ResidueFilter {
    u64 modulus = 1;
    std::vector<u64> residues;

    bool accepts(u64 p) const;
};

struct ExperimentConfig {
    curve::CurveQ curve = curve::CurveQ::short_form(0, 1);
    u64 t = 1;
    u64 x_max = 0;
    std::vector<u64> checkpoints;
    std::optional<ResidueFilter> residue_filter;
    /// Built-in GroupSpec name, or "cm_gaussian" for the split-prime CM count.
    std::optional<std::string> spec_name;
    u64 seed = 0;
    unsigned shards = 1;
    u64 naive_limit = u64{1} << 16;
    u64 euler_limit = constants::kDefaultEulerLimit;

    /// Throws ConfigError (or UnknownSpec) on inconsistent fields.
    void validate() const;
};

struct CountRow {
    u64 x = 0;
    u64 actual = 0;
    std::optional<long double> expected;
    std::optional<i64> expected_rounded;

    std::optional<long double> residual() const;
};

struct CountTable {
    std::vector<CountRow> rows;
    std::optional<constants::KoblitzConstant> constant_used;
    /// Multiplies the constant in the expected column (1/2 for cm_gaussian).
    long double density_factor = 1;
    ExperimentConfig config;
};

/// One pass over the primes up to x_max.
CountTable run_count(const ExperimentConfig& config);

/// Same pass for several t at once; config.t is ignored. Tables come back
/// in the order of ts.
std::vector<CountTable> run_counts(const ExperimentConfig& config, const std::vector<u64>& ts);

/// Constant and density factor behind the expected column.
struct ExpectedModel {
    constants::KoblitzConstant constant;
    long double density_factor = 1;
};
ExpectedModel expected_model(const std::string& spec_name, u64 t, u64 euler_limit);

struct TEResult {
    u64 t_E = 0;
    u64 primes_used = 0;
    std::vector<u64> excluded;
    /// gcd unchanged at 2 and 4 times the bound.
    bool stable = false;
};

TEResult estimate_te(const curve::CurveQ& curve, u64 sample_bound);

enum class Format { Csv, Text };

Format parse_format(const std::string& s);
std::string render(const CountTable& table, Format format);
/// Writes to path, or to stdout when path is empty or "-".
void emit(const CountTable& table, Format format, const std::string& path = "");

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace koblitz::harness
