#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "koblitz/constants.hpp"
#include "koblitz/errors.hpp"
#include "koblitz/galois.hpp"
#include "koblitz/harness.hpp"

using namespace koblitz;
using u64 = std::uint64_t;
using i64 = std::int64_t;

namespace {

std::vector<u64> parse_list(const std::string& s) {
    std::vector<u64> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError("bad list entry '" + item + "'");
        }
        if (pos != item.size() || v < 0 || v != static_cast<double>(static_cast<u64>(v)))
            throw ConfigError("bad list entry '" + item + "'");
        out.push_back(static_cast<u64>(v));
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string ld(long double v) { return fmt::format("{:.21g}", v); }

void print_density(const galois::DensityResult& r) {
    nlohmann::ordered_json j;
    j["value"] = r.value.get_str();
    j["group_order"] = r.group_order.get_str();
    j["hit_count"] = r.hit_count.get_str();
    fmt::print("{}\n", j.dump(2));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prime counts |E(F_p)|/t and their conjectural constants"};
    app.require_subcommand(1);

    // count
    auto* count = app.add_subcommand("count", "count p <= x with |E(F_p)|/t prime");
    std::string curve_text, checkpoints_text, residues_text, spec_name, out_path, format_text = "csv",
                                                                                   config_path;
    u64 t = 1, x = 0, filter_mod = 0, seed = 0, naive_limit = u64{1} << 16,
        euler_limit = constants::kDefaultEulerLimit;
    unsigned shards = 1;
    count->add_option("--config", config_path, "JSON file mirroring the experiment config");
    count->add_option("--curve", curve_text, "[a1,a2,a3,a4,a6] or [A,B]");
    count->add_option("--t", t, "divisor t");
    count->add_option("--x", x, "upper bound x");
    count->add_option("--checkpoints", checkpoints_text, "comma separated x values (default: x)");
    count->add_option("--filter-mod", filter_mod, "keep only p in the given residues mod this");
    count->add_option("--filter-residues", residues_text, "comma separated residues");
    count->add_option("--spec", spec_name, "built-in spec or cm_gaussian for the expected column");
    count->add_option("--seed", seed);
    count->add_option("--shards", shards);
    count->add_option("--naive-limit", naive_limit);
    count->add_option("--euler-limit", euler_limit);
    count->add_option("--out", out_path, "output path (default stdout)");
    count->add_option("--format", format_text, "csv or text");

    // constant
    auto* constant = app.add_subcommand("constant", "assemble a constant");
    std::string c_spec;
    i64 serre_disc = 0;
    bool cm_gaussian = false;
    u64 c_t = 1, c_limit = constants::kDefaultEulerLimit;
    auto* o_spec = constant->add_option("--spec", c_spec);
    auto* o_serre = constant->add_option("--serre-disc", serre_disc);
    auto* o_cm = constant->add_flag("--cm-gaussian", cm_gaussian);
    o_spec->excludes(o_serre)->excludes(o_cm);
    o_serre->excludes(o_cm);
    constant->add_option("--t", c_t);
    constant->add_option("--euler-limit", c_limit);

    // euler
    auto* euler = app.add_subcommand("euler", "truncated Euler products");
    u64 e_limit = constants::kDefaultEulerLimit;
    i64 e_char = 0;
    bool e_naive = false;
    euler->add_option("--limit", e_limit);
    euler->add_option("--char", e_char, "negative discriminant D for the CM product; omit for universal");
    euler->add_flag("--naive", e_naive, "plain partial product for the CM case");

    // te
    auto* te = app.add_subcommand("te", "empirical t_E");
    std::string te_curve;
    u64 te_bound = 1000;
    te->add_option("--curve", te_curve)->required();
    te->add_option("--bound", te_bound);

    // delta
    auto* delta = app.add_subcommand("delta", "density of Psi_t(m) in the image");
    std::string d_spec;
    u64 d_t = 1, d_level = 0;
    delta->add_option("--spec", d_spec)->required();
    delta->add_option("--t", d_t);
    delta->add_option("--level", d_level, "default: the spec level");

    // theta
    auto* theta = app.add_subcommand("theta", "density of m | |E(F_p)|");
    std::string th_spec;
    u64 th_m = 0;
    theta->add_option("--spec", th_spec)->required();
    theta->add_option("--m", th_m)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*count) {
            harness::ExperimentConfig cfg;
            if (!config_path.empty()) cfg = harness::config_from_json(read_file(config_path));
            if (!curve_text.empty()) cfg.curve = curve::parse_curve(curve_text);
            else if (config_path.empty()) throw ConfigError("count: --curve is required");
            if (config_path.empty() && !count->count("--x") && !count->count("--checkpoints"))
                throw ConfigError("count: give --x or --checkpoints");
            if (count->count("--t")) cfg.t = t;
            if (count->count("--x")) cfg.x_max = x;
            if (count->count("--checkpoints")) cfg.checkpoints = parse_list(checkpoints_text);
            if (cfg.checkpoints.empty() && config_path.empty()) cfg.checkpoints = {cfg.x_max};
            if (!count->count("--x") && config_path.empty() && !cfg.checkpoints.empty())
                cfg.x_max = cfg.checkpoints.back();
            if (count->count("--filter-mod") || count->count("--filter-residues")) {
                if (!filter_mod) throw ConfigError("count: --filter-residues needs --filter-mod");
                cfg.residue_filter = harness::ResidueFilter{filter_mod, parse_list(residues_text)};
            }
            if (count->count("--spec")) cfg.spec_name = spec_name;
            if (count->count("--seed")) cfg.seed = seed;
            if (count->count("--shards")) cfg.shards = shards;
            if (count->count("--naive-limit")) cfg.naive_limit = naive_limit;
            if (count->count("--euler-limit")) cfg.euler_limit = euler_limit;
            cfg.validate();
            const auto format = harness::parse_format(format_text);
            harness::emit(harness::run_count(cfg), format, out_path);
        } else if (*constant) {
            constants::KoblitzConstant c;
            if (cm_gaussian) {
                c = harness::expected_model("cm_gaussian", c_t, c_limit).constant;
            } else if (constant->count("--serre-disc")) {
                if (c_t != 1) throw DomainError("constant: the Serre closed form is for t = 1");
                c = constants::serre_closed_form(serre_disc, c_limit);
            } else if (!c_spec.empty()) {
                c = constants::assemble_noncm(galois::builtin_spec(c_spec), c_t, c_limit);
            } else {
                throw ConfigError("constant: give one of --spec, --serre-disc, --cm-gaussian");
            }
            fmt::print("{}\n", constants::to_json(c));
        } else if (*euler) {
            constants::EulerProduct e;
            if (e_char == 0) {
                if (e_naive) throw ConfigError("euler: --naive needs --char");
                e = constants::universal_euler(e_limit);
            } else {
                if (e_char > 0 || !numtheory::is_fundamental_discriminant(e_char))
                    throw InvalidDiscriminant("euler: --char must be a negative fundamental discriminant");
                const numtheory::KroneckerChar chi{e_char};
                e = e_naive ? constants::cm_euler_naive(chi, e_limit) : constants::cm_euler(chi, e_limit);
            }
            nlohmann::ordered_json j;
            j["value"] = ld(e.value);
            j["tail_bound"] = ld(e.tail_bound);
            j["limit"] = e.limit;
            j["heuristic"] = e.heuristic;
            fmt::print("{}\n", j.dump(2));
        } else if (*te) {
            const auto r = harness::estimate_te(curve::parse_curve(te_curve), te_bound);
            nlohmann::ordered_json j;
            j["t_E"] = r.t_E;
            j["primes_used"] = r.primes_used;
            j["excluded"] = r.excluded;
            j["stable"] = r.stable;
            fmt::print("{}\n", j.dump(2));
        } else if (*delta) {
            print_density(galois::delta(galois::builtin_spec(d_spec), d_t, d_level));
        } else if (*theta) {
            print_density(galois::theta(galois::builtin_spec(th_spec), th_m));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return 0;
}
