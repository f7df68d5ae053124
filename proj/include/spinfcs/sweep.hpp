#ifndef SPINFCS_SWEEP_HPP
#define SPINFCS_SWEEP_HPP

#include <spinfcs/cumulants.hpp>
#include <spinfcs/errors.hpp>
#include <spinfcs/model.hpp>
#include <spinfcs/parallel.hpp>
#include <spinfcs/trajectory.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace spinfcs {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct OutputSelection {
    bool currents = true;
    bool noise = true;
    bool third = true;
    bool raw = false; ///< also emit the channel-resolved cumulants
};

struct OracleSpec {
    TrajectoryConfig trajectories;
    std::vector<double> points; ///< values of the swept parameter to spot-check
};

struct SweepSpec {
    std::vector<Regime> regimes;
    RateParams fixed;
    std::string swept = "r_rf";
    double start = 0.05;
    double stop = 3.0;
    std::size_t count = 60;
    std::vector<double> gamma_phi; ///< one dephased sweep per entry
    OutputSelection outputs;
    std::optional<OracleSpec> oracle;

    /// Inclusive uniform grid; the last point is exactly `stop`.
    std::vector<double> grid() const
    {
        std::vector<double> g(count);
        for (std::size_t i = 0; i < count; ++i)
            g[i] = i + 1 == count ? stop : start + double(i) * (stop - start) / double(count - 1);
        return g;
    }
};

struct ConfigIssue {
    int line = 0; ///< 0 when the issue is not tied to a line
    std::string message;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues) : Error(format(issues)), issues_(std::move(issues)) {}
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    static std::string format(const std::vector<ConfigIssue>& issues)
    {
        std::string s;
        for (const auto& i : issues) {
            if (!s.empty()) s += "\n";
            s += (i.line > 0 ? "line " + std::to_string(i.line) + ": " : std::string()) + i.message;
        }
        return s;
    }
    std::vector<ConfigIssue> issues_;
};

inline const std::vector<std::string>& sweepable_parameters()
{
    static const std::vector<std::string> names{"gamma_l_up", "gamma_l_down", "gamma_r_up", "gamma_r_down",
                                                "r_rf",       "delta_esr",    "gamma_phi"};
    return names;
}

using RateField = double RateParams::*;

/// Pointer-to-member for a RateParams field name, or nullptr.
inline RateField rate_field(std::string_view name)
{
    if (name == "gamma_l_up") return &RateParams::gamma_l_up;
    if (name == "gamma_l_down") return &RateParams::gamma_l_down;
    if (name == "gamma_r_up") return &RateParams::gamma_r_up;
    if (name == "gamma_r_down") return &RateParams::gamma_r_down;
    if (name == "r_rf") return &RateParams::r_rf;
    if (name == "delta_esr") return &RateParams::delta_esr;
    if (name == "gamma_phi") return &RateParams::gamma_phi;
    return nullptr;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto p = s.find(',');
        out.push_back(trim(s.substr(0, p)));
        if (p == std::string_view::npos) break;
        s.remove_prefix(p + 1);
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> parse_unsigned(std::string_view s)
{
    s = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

struct Entry {
    std::string value;
    int line;
};

} // namespace detail

/**
 * Parses the sectioned key = value format documented in the README:
 *
 *   [model]    regime, gamma_l_up, gamma_l_down, gamma_r_up, gamma_r_down,
 *              r_rf, delta_esr, gamma_phi (every field not swept is required
 *              except gamma_phi, default 0)
 *   [sweep]    parameter, start, stop, count, gamma_phi (list, dephased only)
 *   [outputs]  quantities (currents, noise, third, all), raw (true/false)
 *   [oracle]   t_final, n_trajectories, seed, points
 *
 * '#' starts a comment. All problems are collected and thrown together.
 */
inline SweepSpec parse_config(std::string_view text)
{
    static const std::map<std::string, std::set<std::string>> known{
        {"model",
         {"regime", "gamma_l_up", "gamma_l_down", "gamma_r_up", "gamma_r_down", "r_rf", "delta_esr", "gamma_phi"}},
        {"sweep", {"parameter", "start", "stop", "count", "gamma_phi"}},
        {"outputs", {"quantities", "raw"}},
        {"oracle", {"t_final", "n_trajectories", "seed", "points"}},
    };

    std::vector<ConfigIssue> issues;
    std::map<std::string, std::map<std::string, detail::Entry>> sections;
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                issues.push_back({line_no, "malformed section header"});
                continue;
            }
            current = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (!known.count(current)) issues.push_back({line_no, "unknown section [" + current + "]"});
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({line_no, "expected key = value"});
            continue;
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (current.empty()) {
            issues.push_back({line_no, "key '" + key + "' outside of a section"});
            continue;
        }
        if (!known.count(current)) continue;
        if (!known.at(current).count(key)) {
            issues.push_back({line_no, "unknown key '" + key + "' in [" + current + "]"});
            continue;
        }
        if (sections[current].count(key)) {
            issues.push_back({line_no, "duplicate key '" + key + "'"});
            continue;
        }
        sections[current][key] = {value, line_no};
    }

    SweepSpec spec;
    auto find = [&](const std::string& sec, const std::string& key) -> const detail::Entry* {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };
    auto missing = [&](const std::string& sec, const std::string& key) {
        issues.push_back({0, "missing required key '" + key + "' in [" + sec + "]"});
    };
    auto number = [&](const std::string& sec, const std::string& key, bool required) -> std::optional<double> {
        const auto* e = find(sec, key);
        if (!e) {
            if (required) missing(sec, key);
            return std::nullopt;
        }
        auto v = detail::parse_number(e->value);
        if (!v) issues.push_back({e->line, "'" + key + "' is not a finite number: '" + e->value + "'"});
        return v;
    };
    auto number_list = [&](const std::string& sec, const std::string& key) -> std::vector<double> {
        std::vector<double> out;
        const auto* e = find(sec, key);
        if (!e) return out;
        for (auto item : detail::split_list(e->value)) {
            if (auto v = detail::parse_number(item))
                out.push_back(*v);
            else
                issues.push_back({e->line, "'" + key + "' entry is not a finite number: '" + std::string(item) + "'"});
        }
        return out;
    };

    // [sweep]
    if (const auto* e = find("sweep", "parameter")) {
        spec.swept = e->value;
        if (!rate_field(spec.swept))
            issues.push_back({e->line, "swept parameter '" + spec.swept + "' is not a rate parameter"});
    } else {
        missing("sweep", "parameter");
    }
    const auto start = number("sweep", "start", true);
    const auto stop = number("sweep", "stop", true);
    if (start) spec.start = *start;
    if (stop) spec.stop = *stop;
    if (const auto* e = find("sweep", "count")) {
        const auto c = detail::parse_unsigned(e->value);
        if (!c)
            issues.push_back({e->line, "'count' is not a non-negative integer: '" + e->value + "'"});
        else if (*c < 2)
            issues.push_back({e->line, "invalid grid: grid count >= 2 required"});
        else
            spec.count = std::size_t(*c);
    } else {
        missing("sweep", "count");
    }
    if (start && stop && *start == *stop) issues.push_back({find("sweep", "stop")->line, "invalid grid: start == stop"});
    spec.gamma_phi = number_list("sweep", "gamma_phi");

    // [model]
    if (const auto* e = find("model", "regime")) {
        for (auto item : detail::split_list(e->value)) {
            if (item == "coherent")
                spec.regimes.push_back(Regime::coherent);
            else if (item == "incoherent")
                spec.regimes.push_back(Regime::incoherent);
            else if (item == "dephased")
                spec.regimes.push_back(Regime::dephased);
            else
                issues.push_back({e->line, "unknown regime '" + std::string(item) + "'"});
        }
    } else {
        missing("model", "regime");
    }
    for (const auto& name : sweepable_parameters()) {
        const bool required = name != spec.swept && name != "gamma_phi";
        if (auto v = number("model", name, required)) spec.fixed.*rate_field(name) = *v;
    }
    const bool dephased = std::find(spec.regimes.begin(), spec.regimes.end(), Regime::dephased) != spec.regimes.end();
    if (dephased && spec.gamma_phi.empty())
        issues.push_back({0, "regime 'dephased' requires a gamma_phi list in [sweep]"});
    if (dephased && spec.swept == "gamma_phi")
        issues.push_back({0, "gamma_phi cannot be swept together with the dephased gamma_phi list"});

    // [outputs]
    if (const auto* e = find("outputs", "quantities")) {
        spec.outputs.currents = spec.outputs.noise = spec.outputs.third = false;
        for (auto item : detail::split_list(e->value)) {
            if (item == "currents")
                spec.outputs.currents = true;
            else if (item == "noise")
                spec.outputs.noise = true;
            else if (item == "third")
                spec.outputs.third = true;
            else if (item == "all")
                spec.outputs.currents = spec.outputs.noise = spec.outputs.third = true;
            else
                issues.push_back({e->line, "unknown output '" + std::string(item) + "'"});
        }
    }
    if (const auto* e = find("outputs", "raw")) {
        if (e->value == "true")
            spec.outputs.raw = true;
        else if (e->value == "false")
            spec.outputs.raw = false;
        else
            issues.push_back({e->line, "'raw' must be true or false"});
    }

    // [oracle]
    if (sections.count("oracle")) {
        OracleSpec o;
        if (auto v = number("oracle", "t_final", true)) {
            if (*v <= 0) issues.push_back({find("oracle", "t_final")->line, "'t_final' must be positive"});
            o.trajectories.t_final = *v;
        }
        for (const char* key : {"n_trajectories", "seed"}) {
            const auto* e = find("oracle", key);
            if (!e) {
                missing("oracle", key);
                continue;
            }
            const auto v = detail::parse_unsigned(e->value);
            if (!v) {
                issues.push_back({e->line, std::string("'") + key + "' is not a non-negative integer"});
                continue;
            }
            if (std::string_view(key) == "seed")
                o.trajectories.seed = *v;
            else if (*v == 0)
                issues.push_back({e->line, "'n_trajectories' must be positive"});
            else
                o.trajectories.n_trajectories = std::size_t(*v);
        }
        if (!find("oracle", "points")) missing("oracle", "points");
        o.points = number_list("oracle", "points");
        spec.oracle = o;
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));
    return spec;
}

inline SweepSpec parse_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

enum class RowSource { analytic, oracle };

struct SweepRow {
    Regime regime = Regime::incoherent;
    double gamma_phi = 0;
    std::size_t index = 0;
    double x = 0; ///< swept parameter value
    RateParams params;
    RowSource source = RowSource::analytic;
    std::string status = "ok";
    std::optional<CumulantSet> cumulants;
    std::optional<CumulantSet> standard_error; ///< oracle rows only

    bool ok() const { return status == "ok"; }
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;

    bool all_ok() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok(); });
    }
};

/**
 * Evaluates full_cumulant_set at every (regime, gamma_phi, grid point), then
 * appends oracle rows for the configured spot-check points. Rows are ordered
 * by regime (as listed), gamma_phi and grid index regardless of threads.
 * A failing point is recorded in its row's status.
 */
inline SweepResult run_sweep(const SweepSpec& spec, unsigned threads = 1)
{
    SweepResult result{spec, {}};
    const auto grid = spec.grid();
    auto field = rate_field(spec.swept);
    if (!field) throw InvalidParams("swept parameter is not a rate parameter");

    for (Regime r : spec.regimes) {
        const std::vector<double> phis = r == Regime::dephased ? spec.gamma_phi : std::vector<double>{0.0};
        for (double phi : phis)
            for (std::size_t i = 0; i < grid.size(); ++i) {
                SweepRow row;
                row.regime = r;
                row.index = i;
                row.x = grid[i];
                row.params = spec.fixed;
                row.params.*field = grid[i];
                if (r == Regime::dephased) row.params.gamma_phi = phi;
                if (r == Regime::coherent) row.params.gamma_phi = 0;
                row.gamma_phi = row.params.gamma_phi;
                result.rows.push_back(row);
            }
    }
    parallel_for(result.rows.size(), threads, [&](std::size_t i) {
        auto& row = result.rows[i];
        try {
            row.cumulants = full_cumulant_set(row.regime, row.params);
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
    });

    if (spec.oracle) {
        for (std::size_t k = 0; k < spec.oracle->points.size(); ++k) {
            SweepRow row;
            row.regime = Regime::incoherent;
            row.index = k;
            row.x = spec.oracle->points[k];
            row.params = spec.fixed;
            row.params.*field = row.x;
            row.gamma_phi = row.params.gamma_phi;
            row.source = RowSource::oracle;
            try {
                TrajectoryConfig cfg = spec.oracle->trajectories;
                cfg.threads = threads;
                const auto samples = simulate(row.params, cfg);
                const auto est = empirical_cumulants(samples, cfg.t_final);
                row.cumulants = est.estimate;
                row.standard_error = est.standard_error;
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Shortest decimal string that round-trips to the same double.
inline std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace detail {

inline std::string csv_safe(std::string s)
{
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
    return s;
}

struct Column {
    std::string header;
    std::function<double(const CumulantSet&)> get;
};

inline std::vector<Column> quantity_columns(const OutputSelection& o)
{
    std::vector<Column> cols;
    const char* lead = "LR";
    if (o.currents) {
        for (int l = 0; l < 2; ++l)
            cols.push_back({std::string("I_s_") + lead[l], [l](const CumulantSet& c) { return c.spin_current(l); }});
        for (int l = 0; l < 2; ++l)
            cols.push_back({std::string("I_c_") + lead[l], [l](const CumulantSet& c) { return c.charge_current(l); }});
    }
    if (o.noise)
        for (auto [a, b] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}})
            cols.push_back({std::string("S_s_") + lead[a] + lead[b],
                            [a, b](const CumulantSet& c) { return c.spin_noise(a, b); }});
    if (o.third)
        for (auto [a, b, d] : {std::tuple{0, 0, 0}, std::tuple{0, 0, 1}, std::tuple{0, 1, 1}, std::tuple{1, 1, 1}})
            cols.push_back({std::string("C_s_") + lead[a] + lead[b] + lead[d],
                            [a, b, d](const CumulantSet& c) { return c.spin_third(a, b, d); }});
    if (o.raw) {
        auto name = [](std::size_t k) { return std::string(channel_name(channel_at(k))); };
        if (o.currents)
            for (std::size_t a = 0; a < 4; ++a)
                cols.push_back({"I_" + name(a), [a](const CumulantSet& c) { return c.first[a]; }});
        if (o.noise)
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = a; b < 4; ++b)
                    cols.push_back({"S_" + name(a) + "_" + name(b),
                                    [a, b](const CumulantSet& c) { return c.second[a * 4 + b]; }});
        if (o.third)
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = a; b < 4; ++b)
                    for (std::size_t d = b; d < 4; ++d)
                        cols.push_back({"C_" + name(a) + "_" + name(b) + "_" + name(d),
                                        [a, b, d](const CumulantSet& c) { return c.third[a * 16 + b * 4 + d]; }});
    }
    return cols;
}

} // namespace detail

/**
 * CSV with columns
 *   regime, gamma_phi[Gamma], index, <swept>[Gamma], source, status, quantities...
 * Quantity columns are cumulant rates in units of Gamma. Failed rows keep
 * their position, carry the error in `status` and leave numeric fields empty.
 */
inline void emit_csv(const SweepResult& result, std::ostream& os)
{
    const auto cols = detail::quantity_columns(result.spec.outputs);
    os << "regime,gamma_phi[Gamma],index," << result.spec.swept << "[Gamma],source,status";
    for (const auto& c : cols) os << ',' << c.header << "[Gamma]";
    os << '\n';
    for (const auto& row : result.rows) {
        os << regime_name(row.regime) << ',' << format_number(row.gamma_phi) << ',' << row.index << ','
           << format_number(row.x) << ',' << (row.source == RowSource::oracle ? "oracle" : "analytic") << ','
           << detail::csv_safe(row.status);
        for (const auto& c : cols) {
            os << ',';
            if (row.ok() && row.cumulants) os << format_number(c.get(*row.cumulants));
        }
        os << '\n';
    }
    if (!os) throw Error("failed to write CSV output");
}

inline void emit_csv(const SweepResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    emit_csv(result, out);
    out.flush();
    if (!out) throw Error("failed to write " + path.string());
}

// ---------------------------------------------------------------------------
// Figure and table datasets
// ---------------------------------------------------------------------------

enum class Figure { fig2, fig3, table1 };

class FigureUnavailable : public Error {
public:
    using Error::Error;
};

/// Values within this magnitude are reported as zero when classifying signs.
inline constexpr double sign_resolution = 1e-9;

inline std::string_view sign_label(double v)
{
    if (v > sign_resolution) return "positive";
    if (v < -sign_resolution) return "negative";
    return "zero";
}

/// Sorted, '|'-joined set of sign labels, e.g. "negative|positive".
inline std::string sign_set(const std::vector<double>& values)
{
    std::set<std::string_view> s;
    for (double v : values) s.insert(sign_label(v));
    std::string out;
    for (auto x : s) out += (out.empty() ? "" : "|") + std::string(x);
    return out.empty() ? "none" : out;
}

namespace detail {

inline const SweepRow* find_row(const SweepResult& r, Regime regime, std::size_t index)
{
    for (const auto& row : r.rows)
        if (row.source == RowSource::analytic && row.regime == regime && row.index == index) return &row;
    return nullptr;
}

inline std::vector<double> column_values(const SweepResult& r, Regime regime,
                                         const std::function<double(const CumulantSet&)>& get)
{
    std::vector<double> out;
    for (const auto& row : r.rows)
        if (row.source == RowSource::analytic && row.regime == regime && row.ok() && row.cumulants)
            out.push_back(get(*row.cumulants));
    return out;
}

} // namespace detail

/**
 * fig2:   x, I^s_L and C^s_LLL, C^s_LLR for both regimes
 * fig3:   x, S^s_LL and S^s_LR for both regimes
 * table1: qualitative summary of the first three moments per regime
 * Requires coherent and incoherent rows and the needed output groups.
 */
inline std::string emit_figure_data(const SweepResult& result, Figure figure)
{
    const auto& spec = result.spec;
    auto has = [&](Regime r) { return std::find(spec.regimes.begin(), spec.regimes.end(), r) != spec.regimes.end(); };
    if (!has(Regime::coherent) || !has(Regime::incoherent))
        throw FigureUnavailable("figure data needs both the coherent and the incoherent regime");
    const auto& o = spec.outputs;
    const bool covered = figure == Figure::fig2   ? (o.currents && o.third)
                         : figure == Figure::fig3 ? o.noise
                                                  : (o.currents && o.noise && o.third);
    if (!covered) throw FigureUnavailable("requested outputs do not cover the figure's quantities");

    std::ostringstream os;
    if (figure == Figure::table1) {
        auto first = [&](Regime r) -> std::string {
            const auto ic_l = detail::column_values(result, r, [](const CumulantSet& c) { return c.charge_current(0); });
            const auto ic_r = detail::column_values(result, r, [](const CumulantSet& c) { return c.charge_current(1); });
            const auto is_l = detail::column_values(result, r, [](const CumulantSet& c) { return c.spin_current(0); });
            bool charge_zero = true, spin_finite = false;
            for (double v : ic_l) charge_zero = charge_zero && std::abs(v) <= 1e-10;
            for (double v : ic_r) charge_zero = charge_zero && std::abs(v) <= 1e-10;
            for (double v : is_l) spin_finite = spin_finite || std::abs(v) > sign_resolution;
            if (charge_zero && spin_finite) return "pure spin current";
            if (charge_zero) return "no current";
            return "charge current present";
        };
        const std::string f_coh = first(Regime::coherent), f_inc = first(Regime::incoherent);
        auto slr = [](const CumulantSet& c) { return c.spin_noise(0, 1); };
        auto clll = [](const CumulantSet& c) { return c.spin_third(0, 0, 0); };
        const std::string s_coh = sign_set(detail::column_values(result, Regime::coherent, slr));
        const std::string s_inc = sign_set(detail::column_values(result, Regime::incoherent, slr));
        const std::string c_coh = sign_set(detail::column_values(result, Regime::coherent, clll));
        const std::string c_inc = sign_set(detail::column_values(result, Regime::incoherent, clll));

        os << "moment,quantity,coherent,incoherent,comparison\n";
        os << "1st,I^c_eta and I^s_eta," << f_coh << ',' << f_inc << ','
           << (f_coh == f_inc ? "same" : "different") << '\n';
        os << "2nd,sign set of S^s_LR," << s_coh << ',' << s_inc << ','
           << (s_coh == s_inc ? "same" : "sign structure changes") << '\n';
        os << "3rd,sign set of C^s_LLL," << c_coh << ',' << c_inc << ','
           << (c_coh == c_inc ? "no qualitative change" : "qualitative change") << '\n';
        return os.str();
    }

    using Getter = std::function<double(const CumulantSet&)>;
    std::vector<std::pair<std::string, Getter>> q;
    if (figure == Figure::fig2) {
        q = {{"I_s_L", [](const CumulantSet& c) { return c.spin_current(0); }},
             {"C_s_LLL", [](const CumulantSet& c) { return c.spin_third(0, 0, 0); }},
             {"C_s_LLR", [](const CumulantSet& c) { return c.spin_third(0, 0, 1); }}};
    } else {
        q = {{"S_s_LL", [](const CumulantSet& c) { return c.spin_noise(0, 0); }},
             {"S_s_LR", [](const CumulantSet& c) { return c.spin_noise(0, 1); }}};
    }
    os << spec.swept << "[Gamma]";
    for (const auto& [name, get] : q) os << ',' << name << "_coherent[Gamma]," << name << "_incoherent[Gamma]";
    os << '\n';
    const auto grid = spec.grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << format_number(grid[i]);
        const SweepRow* coh = detail::find_row(result, Regime::coherent, i);
        const SweepRow* inc = detail::find_row(result, Regime::incoherent, i);
        for (const auto& [name, get] : q) {
            for (const SweepRow* row : {coh, inc}) {
                os << ',';
                if (row && row->ok() && row->cumulants) os << format_number(get(*row->cumulants));
            }
        }
        os << '\n';
    }
    return os.str();
}

inline std::string_view figure_name(Figure f)
{
    switch (f) {
    case Figure::fig2: return "fig2";
    case Figure::fig3: return "fig3";
    case Figure::table1: return "table1";
    }
    return "?";
}

} // namespace spinfcs

#endif // SPINFCS_SWEEP_HPP
