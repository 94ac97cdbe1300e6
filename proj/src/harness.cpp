#include "koblitz/harness.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "koblitz/errors.hpp"
#include "koblitz/galois.hpp"
#include "koblitz/numtheory.hpp"

namespace koblitz::harness {

namespace {

constexpr u64 kMaxX = u64{1} << 62;

std::string format_ld(const char* fmt, long double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

struct ShardResult {
    // counts[ti][bucket], bucket == checkpoints.size() collects p past the last checkpoint
    std::vector<std::vector<u64>> counts;
};

void count_shard(const ExperimentConfig& cfg, const std::vector<u64>& ts, u64 lo, u64 hi,
                 ShardResult& out) {
    const auto& cps = cfg.checkpoints;
    out.counts.assign(ts.size(), std::vector<u64>(cps.size() + 1, 0));
    curve::PointCountOptions opts;
    opts.naive_limit = cfg.naive_limit;
    opts.seed = cfg.seed;
    std::size_t bucket = std::lower_bound(cps.begin(), cps.end(), lo) - cps.begin();
    numtheory::primes_in(lo, hi, [&](u64 p) {
        if (cfg.residue_filter && !cfg.residue_filter->accepts(p)) return;
        const auto rc = curve::try_reduce(cfg.curve, p);
        if (!rc) return;
        const u64 n = curve::point_count(*rc, opts);
        while (bucket < cps.size() && cps[bucket] < p) ++bucket;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const u64 t = ts[i];
            if (n % t == 0 && numtheory::is_prime(n / t)) ++out.counts[i][bucket];
        }
    });
}

}  // namespace

bool ResidueFilter::accepts(u64 p) const {
    const u64 r = p % modulus;
    return std::find(residues.begin(), residues.end(), r) != residues.end();
}

void ExperimentConfig::validate() const {
    if (t == 0) throw ConfigError("t must be positive");
    if (shards == 0) throw ConfigError("shards must be positive");
    if (x_max >= kMaxX) throw ConfigError("x_max must be below 2^62");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw ConfigError("checkpoints must be sorted");
    if (!checkpoints.empty() && checkpoints.back() > x_max)
        throw ConfigError("checkpoint " + std::to_string(checkpoints.back()) + " exceeds x_max");
    if (residue_filter) {
        if (residue_filter->modulus == 0) throw ConfigError("filter modulus must be at least 1");
        for (u64 r : residue_filter->residues)
            if (r >= residue_filter->modulus)
                throw ConfigError("filter residue " + std::to_string(r) + " is not reduced");
    }
    if (spec_name && *spec_name != "cm_gaussian") galois::builtin_spec(*spec_name);
}

std::optional<long double> CountRow::residual() const {
    if (!expected) return std::nullopt;
    return static_cast<long double>(actual) - *expected;
}

ExpectedModel expected_model(const std::string& spec_name, u64 t, u64 euler_limit) {
    ExpectedModel m;
    if (spec_name == "cm_gaussian") {
        // unit group level 2^k = 2t
        if (t == 0 || (t & (t - 1)) != 0) throw DomainError("cm_gaussian needs t a power of 2");
        galois::CMUnitGroupSpec cm;
        cm.k = static_cast<unsigned>(std::countr_zero(t)) + 1;
        m.constant = constants::assemble_cm(cm, t, euler_limit);
        m.density_factor = 0.5L;  // only split primes p = 1 mod 4 are counted
    } else {
        m.constant = constants::assemble_noncm(galois::builtin_spec(spec_name), t, euler_limit);
    }
    return m;
}

std::vector<CountTable> run_counts(const ExperimentConfig& config, const std::vector<u64>& ts) {
    if (ts.empty()) throw ConfigError("no t values");
    for (u64 t : ts) {
        ExperimentConfig c = config;
        c.t = t;
        c.validate();
    }

    std::vector<ShardResult> parts(config.shards);
    const u64 lo = 2, hi = config.x_max;
    if (hi >= lo) {
        const u64 span = hi - lo + 1;
        const u64 step = (span + config.shards - 1) / config.shards;
        std::vector<std::thread> workers;
        for (unsigned s = 0; s < config.shards; ++s) {
            const u64 a = lo + s * step;
            if (a > hi) {
                parts[s].counts.assign(ts.size(), std::vector<u64>(config.checkpoints.size() + 1, 0));
                continue;
            }
            const u64 b = std::min(hi, a + step - 1);
            if (config.shards == 1)
                count_shard(config, ts, a, b, parts[s]);
            else
                workers.emplace_back(count_shard, std::cref(config), std::cref(ts), a, b, std::ref(parts[s]));
        }
        for (auto& w : workers) w.join();
    } else {
        for (auto& part : parts)
            part.counts.assign(ts.size(), std::vector<u64>(config.checkpoints.size() + 1, 0));
    }

    std::vector<CountTable> tables;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CountTable table;
        table.config = config;
        table.config.t = ts[i];
        std::optional<ExpectedModel> model;
        if (config.spec_name) {
            model = expected_model(*config.spec_name, ts[i], config.euler_limit);
            table.constant_used = model->constant;
            table.density_factor = model->density_factor;
        }
        u64 running = 0;
        for (std::size_t j = 0; j < config.checkpoints.size(); ++j) {
            for (const auto& part : parts) running += part.counts[i][j];
            CountRow row;
            row.x = config.checkpoints[j];
            row.actual = running;
            if (model && row.x > ts[i] + 1) {
                constants::KoblitzConstant c = model->constant;
                c.value *= model->density_factor;
                const auto e = constants::expected_count(c, ts[i], static_cast<long double>(row.x));
                row.expected = e.raw;
                row.expected_rounded = e.rounded;
            }
            table.rows.push_back(row);
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

CountTable run_count(const ExperimentConfig& config) {
    return std::move(run_counts(config, {config.t}).front());
}

TEResult estimate_te(const curve::CurveQ& curve, u64 sample_bound) {
    if (sample_bound < 100) throw DomainError("estimate_te: sample_bound must be at least 100");
    TEResult r;
    r.excluded.push_back(2);
    u64 g = 0, g2 = 0, g4 = 0;
    numtheory::primes_in(3, 4 * sample_bound, [&](u64 p) {
        const auto rc = curve::try_reduce(curve, p);
        if (!rc) {
            if (p <= sample_bound) r.excluded.push_back(p);
            return;
        }
        const u64 n = curve::point_count(*rc);
        if (p <= sample_bound) {
            g = std::gcd(g, n);
            ++r.primes_used;
        }
        if (p <= 2 * sample_bound) g2 = std::gcd(g2, n);
        g4 = std::gcd(g4, n);
    });
    r.t_E = g;
    r.stable = g == g2 && g == g4;
    return r;
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "text") return Format::Text;
    throw ConfigError("unknown format '" + s + "' (csv or text)");
}

std::string render(const CountTable& table, Format format) {
    std::ostringstream os;
    if (format == Format::Csv) {
        os << "x,actual,expected,expected_rounded,residual\n";
        for (const auto& row : table.rows) {
            os << row.x << ',' << row.actual << ',';
            if (row.expected) {
                os << format_ld("%.3Lf", *row.expected) << ',' << *row.expected_rounded << ','
                   << format_ld("%.3Lf", *row.residual());
            } else {
                os << ",,";
            }
            os << '\n';
        }
        return os.str();
    }
    std::vector<std::array<std::string, 5>> cells;
    cells.push_back({"x", "actual", "expected", "rounded", "residual"});
    for (const auto& row : table.rows) {
        std::array<std::string, 5> c{std::to_string(row.x), std::to_string(row.actual), "-", "-", "-"};
        if (row.expected) {
            c[2] = format_ld("%.2Lf", *row.expected);
            c[3] = std::to_string(*row.expected_rounded);
            c[4] = format_ld("%.2Lf", *row.residual());
        }
        cells.push_back(c);
    }
    std::array<std::size_t, 5> width{};
    for (const auto& c : cells)
        for (std::size_t k = 0; k < 5; ++k) width[k] = std::max(width[k], c[k].size());
    os << "curve " << table.config.curve.to_string() << ", t = " << table.config.t << '\n';
    for (const auto& c : cells) {
        for (std::size_t k = 0; k < 5; ++k) {
            if (k) os << "  ";
            os << std::string(width[k] - c[k].size(), ' ') << c[k];
        }
        os << '\n';
    }
    return os.str();
}

void emit(const CountTable& table, Format format, const std::string& path) {
    const std::string text = render(table, format);
    if (path.empty() || path == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

ExperimentConfig config_from_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected an object");
    ExperimentConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "curve") {
                if (v.is_string()) {
                    c.curve = curve::parse_curve(v.get<std::string>());
                } else {
                    std::string s = "[";
                    for (std::size_t i = 0; i < v.size(); ++i)
                        s += (i ? "," : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
                    c.curve = curve::parse_curve(s + "]");
                }
            } else if (k == "t") {
                c.t = v.get<u64>();
            } else if (k == "x_max") {
                c.x_max = v.get<u64>();
            } else if (k == "checkpoints") {
                c.checkpoints = v.get<std::vector<u64>>();
            } else if (k == "residue_filter") {
                if (!v.is_null()) {
                    ResidueFilter f;
                    f.modulus = v.at("modulus").get<u64>();
                    f.residues = v.at("residues").get<std::vector<u64>>();
                    c.residue_filter = f;
                }
            } else if (k == "spec_name") {
                if (!v.is_null()) c.spec_name = v.get<std::string>();
            } else if (k == "seed") {
                c.seed = v.get<u64>();
            } else if (k == "shards") {
                c.shards = v.get<unsigned>();
            } else if (k == "naive_limit") {
                c.naive_limit = v.get<u64>();
            } else if (k == "euler_limit") {
                c.euler_limit = v.get<u64>();
            } else {
                throw ConfigError("config: unknown key '" + k + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.contains("x_max") && !c.checkpoints.empty()) c.x_max = c.checkpoints.back();
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["curve"] = c.curve.to_string();
    j["t"] = c.t;
    j["x_max"] = c.x_max;
    j["checkpoints"] = c.checkpoints;
    if (c.residue_filter)
        j["residue_filter"] = {{"modulus", c.residue_filter->modulus},
                               {"residues", c.residue_filter->residues}};
    else
        j["residue_filter"] = nullptr;
    j["spec_name"] = c.spec_name ? nlohmann::ordered_json(*c.spec_name) : nlohmann::ordered_json(nullptr);
    j["seed"] = c.seed;
    j["shards"] = c.shards;
    j["naive_limit"] = c.naive_limit;
    j["euler_limit"] = c.euler_limit;
    return j.dump(2);
}

}  // namespace koblitz::harness
