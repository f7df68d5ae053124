// spinfcs: sweeps, figure datasets and trajectory spot checks from a config file.

#include <spinfcs/spinfcs.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace spinfcs;

namespace {

enum Exit { exit_ok = 0, exit_rows_failed = 1, exit_config = 2, exit_error = 3 };

struct Options {
    std::string config;
    std::string out = ".";
    std::string figure;
    unsigned threads = default_thread_count();
    std::optional<std::uint64_t> seed;
};

int report(const std::string& command, json errors, int code)
{
    json summary{{"status", "error"}, {"command", command}, {"errors", std::move(errors)}};
    std::cerr << summary.dump(2) << '\n';
    return code;
}

json row_errors(const SweepResult& r)
{
    json errs = json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        if (row.ok()) continue;
        errs.push_back({{"row", i},
                        {"regime", std::string(regime_name(row.regime))},
                        {"source", row.source == RowSource::oracle ? "oracle" : "analytic"},
                        {"index", row.index},
                        {r.spec.swept, row.x},
                        {"gamma_phi", row.gamma_phi},
                        {"message", row.status}});
    }
    return errs;
}

SweepSpec load(const Options& o)
{
    SweepSpec spec = parse_config_file(o.config);
    if (o.seed && spec.oracle) spec.oracle->trajectories.seed = *o.seed;
    for (const auto& w : validation_warnings(spec.fixed)) std::cerr << "warning: " << w << '\n';
    return spec;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error("failed to write " + path.string());
}

fs::path prepare_out(const Options& o)
{
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

int cmd_validate(const Options& o)
{
    const SweepSpec spec = load(o);
    std::size_t points = 0;
    for (Regime r : spec.regimes) points += spec.count * (r == Regime::dephased ? spec.gamma_phi.size() : 1);
    if (spec.oracle) {
        for (double x : spec.oracle->points) {
            RateParams p = spec.fixed;
            p.*rate_field(spec.swept) = x;
            for (const auto& w : config_warnings(p, spec.oracle->trajectories))
                std::cerr << "warning: oracle point " << format_number(x) << ": " << w << '\n';
        }
    }
    std::cout << "ok: " << points << " evaluation points";
    if (spec.oracle) std::cout << ", " << spec.oracle->points.size() << " oracle points";
    std::cout << '\n';
    return exit_ok;
}

int cmd_sweep(const Options& o)
{
    const SweepSpec spec = load(o);
    const fs::path dir = prepare_out(o);
    const SweepResult result = run_sweep(spec, o.threads);
    emit_csv(result, dir / "sweep.csv");
    if (!result.all_ok()) return report("sweep", row_errors(result), exit_rows_failed);
    return exit_ok;
}

int cmd_figure(const Options& o)
{
    SweepSpec spec = load(o);
    spec.oracle.reset();
    const Figure fig = o.figure == "fig2" ? Figure::fig2 : o.figure == "fig3" ? Figure::fig3 : Figure::table1;
    const fs::path dir = prepare_out(o);
    const SweepResult result = run_sweep(spec, o.threads);
    write_text(dir / (std::string(figure_name(fig)) + ".csv"), emit_figure_data(result, fig));
    if (!result.all_ok()) return report("figure", row_errors(result), exit_rows_failed);
    return exit_ok;
}

// oracle.csv: one line per (point, quantity) with analytic value, estimate, jackknife error and z-score.
int cmd_oracle(const Options& o)
{
    const SweepSpec spec = load(o);
    if (!spec.oracle) return report("oracle", json::array({json{{"message", "config has no [oracle] section"}}}), exit_config);
    const fs::path dir = prepare_out(o);
    const auto cols = detail::quantity_columns(OutputSelection{});

    std::ostringstream csv;
    csv << "point," << spec.swept << "[Gamma],quantity,analytic[Gamma],estimate[Gamma],standard_error[Gamma],z\n";
    json errs = json::array();
    for (std::size_t k = 0; k < spec.oracle->points.size(); ++k) {
        const double x = spec.oracle->points[k];
        RateParams p = spec.fixed;
        p.*rate_field(spec.swept) = x;
        try {
            TrajectoryConfig cfg = spec.oracle->trajectories;
            cfg.threads = o.threads;
            for (const auto& w : config_warnings(p, cfg)) std::cerr << "warning: " << w << '\n';
            const auto samples = simulate(p, cfg);
            {
                std::ofstream tsv(dir / ("samples_" + std::to_string(k) + ".tsv"), std::ios::binary);
                write_samples(tsv, samples);
                if (!tsv) throw Error("failed to write sample dump");
            }
            const auto est = empirical_cumulants(samples, cfg.t_final);
            const auto ref = full_cumulant_set(Regime::incoherent, p);
            for (const auto& c : cols) {
                const double a = c.get(ref), e = c.get(est.estimate), se = c.get(est.standard_error);
                csv << k << ',' << format_number(x) << ',' << c.header << ',' << format_number(a) << ','
                    << format_number(e) << ',' << format_number(se) << ',';
                if (se > 0) csv << format_number((e - a) / se);
                csv << '\n';
            }
        } catch (const std::exception& e) {
            errs.push_back({{"point", k}, {spec.swept, x}, {"message", e.what()}});
        }
    }
    write_text(dir / "oracle.csv", csv.str());
    if (!errs.empty()) return report("oracle", errs, exit_rows_failed);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spin-resolved full counting statistics of a driven quantum dot"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "oracle RNG seed (overrides the config)");

    auto* sweep = app.add_subcommand("sweep", "evaluate the configured grid, write sweep.csv");
    auto* figure = app.add_subcommand("figure", "write fig2.csv, fig3.csv or table1.csv");
    auto* oracle = app.add_subcommand("oracle", "trajectory spot checks, write oracle.csv and sample dumps");
    auto* validate = app.add_subcommand("validate", "check a config file");
    figure->add_option("figure", o.figure, "fig2 | fig3 | table1")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "table1"}));
    for (auto* sub : {sweep, figure, oracle, validate}) {
        sub->add_option("config", o.config, "config file")->required()->check(CLI::ExistingFile);
        sub->fallthrough();
    }
    for (auto* sub : {sweep, figure, oracle}) sub->add_option("--out", o.out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) o.seed = seed;

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (*sweep) return cmd_sweep(o);
        if (*figure) return cmd_figure(o);
        if (*oracle) return cmd_oracle(o);
        return cmd_validate(o);
    } catch (const ConfigError& e) {
        json errs = json::array();
        for (const auto& i : e.issues()) errs.push_back({{"line", i.line}, {"message", i.message}});
        return report(command, errs, exit_config);
    } catch (const std::exception& e) {
        return report(command, json::array({json{{"message", e.what()}}}), exit_error);
    }
}
