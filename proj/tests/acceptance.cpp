// Acceptance gate: one PASS/FAIL line per criterion.
// Usage: acceptance [n ...]   (no argument runs all twelve)

#include <spinfcs/spinfcs.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace spinfcs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

SweepSpec default_spec()
{
    SweepSpec s;
    s.regimes = {Regime::coherent, Regime::incoherent};
    s.fixed = RateParams::symmetric(1.0, 0.0);
    s.swept = "r_rf";
    s.start = 0.05;
    s.stop = 3.0;
    s.count = 60;
    return s;
}

const char* default_config = R"(# default two-regime grid
[model]
regime = coherent, incoherent
gamma_l_up = 0.5
gamma_l_down = 0.5
gamma_r_up = 0.5
gamma_r_down = 0.5
delta_esr = 0

[sweep]
parameter = r_rf
start = 0.05
stop = 3.0
count = 60

[outputs]
quantities = all
raw = true
)";

RateParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> g(0.05, 2.0), r(0.0, 3.0), d(-3.0, 3.0);
    return {g(rng), g(rng), g(rng), g(rng), r(rng), d(rng), 0.0};
}

CountingVector random_chi(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> c(-M_PI, M_PI);
    return {{c(rng), c(rng), c(rng), c(rng)}};
}

const SweepResult& default_sweep()
{
    static const SweepResult r = run_sweep(default_spec(), default_thread_count());
    return r;
}

std::vector<double> column(const SweepResult& r, Regime regime, double (*get)(const CumulantSet&))
{
    std::vector<double> v;
    for (const auto& row : r.rows)
        if (row.regime == regime && row.ok()) v.push_back(get(*row.cumulants));
    return v;
}

Outcome c1()
{
    double worst = 0;
    const auto spec = default_spec();
    for (Regime r : spec.regimes)
        for (double x : spec.grid()) {
            RateParams p = spec.fixed;
            p.r_rf = x;
            worst = std::max(worst, std::abs(dominant_eigenvalue(r, p, CountingVector::zero()).lambda0));
        }
    return {worst <= 1e-12, "max |lambda0(0)| = " + fmt(worst) + " over 120 points"};
}

Outcome c2()
{
    std::mt19937_64 rng(101);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const RateParams p = random_params(rng);
        const CountingVector chi = random_chi(rng);
        const auto a = eliminate_coherences(p, chi), b = build_incoherent(p, chi);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    }
    return {worst <= 1e-12, "max entrywise deviation " + fmt(worst) + " over 100 draws"};
}

Outcome c3()
{
    const auto& r = default_sweep();
    if (!r.all_ok()) return {false, "sweep has failed rows"};
    double worst = 0;
    for (const auto& row : r.rows)
        for (int l = 0; l < 2; ++l) worst = std::max(worst, std::abs(row.cumulants->charge_current(l)));
    return {worst <= 1e-10, "max |I^c| = " + fmt(worst) + " over 120 rows"};
}

Outcome c4()
{
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> shift(-M_PI, M_PI);
    double worst = 0;
    for (Regime r : {Regime::coherent, Regime::incoherent})
        for (int k = 0; k < 50; ++k) {
            const RateParams p = random_params(rng);
            const CountingVector chi = random_chi(rng);
            const auto a = char_poly(build_generator(r, p, chi));
            const auto b = char_poly(build_generator(r, p, chi + CountingVector::uniform(shift(rng))));
            for (std::size_t i = 0; i < a.coefficients.size(); ++i)
                worst = std::max(worst, std::abs(a.coefficients[i] - b.coefficients[i]));
        }
    return {worst <= 1e-12, "max coefficient deviation " + fmt(worst) + " over 2x50 draws"};
}

Outcome c5()
{
    const auto& r = default_sweep();
    const auto grid = default_spec().grid();
    auto slr = [](const CumulantSet& c) { return c.spin_noise(0, 1); };
    const auto inc = column(r, Regime::incoherent, +slr);
    const auto coh = column(r, Regime::coherent, +slr);
    if (inc.size() != grid.size() || coh.size() != grid.size()) return {false, "sweep has failed rows"};
    std::string bad;
    for (std::size_t i = 0; i < inc.size(); ++i)
        if (!(inc[i] > sign_resolution)) bad += " r_rf=" + fmt(grid[i]) + " (" + fmt(inc[i]) + ")";
    const bool coh_both = sign_set(coh).find("negative") != std::string::npos &&
                          sign_set(coh).find("positive") != std::string::npos;
    std::string detail = "coherent sign set {" + sign_set(coh) + "}, incoherent {" + sign_set(inc) + "}";
    if (!bad.empty()) detail += "; incoherent not positive at" + bad;
    return {bad.empty() && coh_both, detail};
}

Outcome c6()
{
    const auto& r = default_sweep();
    const auto grid = default_spec().grid();
    auto lll = [](const CumulantSet& c) { return c.spin_third(0, 0, 0); };
    auto llr = [](const CumulantSet& c) { return c.spin_third(0, 0, 1); };
    const auto lll_c = column(r, Regime::coherent, +lll), lll_i = column(r, Regime::incoherent, +lll);
    const auto llr_c = column(r, Regime::coherent, +llr), llr_i = column(r, Regime::incoherent, +llr);
    if (lll_c.size() != grid.size() || lll_i.size() != grid.size()) return {false, "sweep has failed rows"};

    std::ofstream out("acceptance_third_moment.csv");
    out << "r_rf[Gamma],C_s_LLL_coherent[Gamma],C_s_LLL_incoherent[Gamma],C_s_LLR_coherent[Gamma],"
           "C_s_LLR_incoherent[Gamma]\n";
    bool lll_neg = true;
    std::string mismatch;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << format_number(grid[i]) << ',' << format_number(lll_c[i]) << ',' << format_number(lll_i[i]) << ','
            << format_number(llr_c[i]) << ',' << format_number(llr_i[i]) << '\n';
        lll_neg = lll_neg && lll_c[i] < -sign_resolution && lll_i[i] < -sign_resolution;
        if (sign_label(llr_c[i]) != sign_label(llr_i[i]))
            mismatch += " r_rf=" + fmt(grid[i]) + " (" + fmt(llr_c[i]) + " vs " + fmt(llr_i[i]) + ")";
    }
    std::string detail = std::string("C^s_LLL ") + (lll_neg ? "negative everywhere" : "not negative everywhere");
    detail += mismatch.empty() ? "; C^s_LLR signs match pointwise" : "; C^s_LLR sign differs at" + mismatch;
    detail += "; magnitudes in acceptance_third_moment.csv";
    return {lll_neg && mismatch.empty(), detail};
}

Outcome c7()
{
    const RateParams p = RateParams::symmetric(1.0, 0.5);
    double worst = 0;
    for (Channel c : all_channels)
        worst = std::max(worst, std::abs(std::abs(cumulant(Regime::incoherent, p, {c})) - 1.0 / 14));
    return {worst <= 1e-9, "max ||I| - 1/14| = " + fmt(worst)};
}

Outcome c8()
{
    const std::array<RateParams, 5> points{RateParams::symmetric(1.0, 0.25), RateParams::symmetric(1.0, 0.5),
                                           RateParams::symmetric(1.0, 1.7, 0.4),
                                           RateParams{0.3, 0.7, 0.6, 0.4, 0.9, -0.5, 0},
                                           RateParams{0.8, 0.2, 0.5, 1.1, 2.5, 1.3, 0}};
    int bad = 0, total = 0;
    double worst_rel = 0;
    for (Regime r : {Regime::coherent, Regime::incoherent})
        for (const auto& p : points)
            for (const auto& idx : all_independent_multi_indices()) {
                const double a = cumulant(r, p, idx, DiffMethod::implicit);
                const double b = cumulant(r, p, idx, DiffMethod::finite_difference);
                ++total;
                if (!methods_agree(a, b)) ++bad;
                if (std::max(std::abs(a), std::abs(b)) >= 1e-3)
                    worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
            }
    return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) +
                          " agree, worst relative gap " + fmt(worst_rel)};
}

Outcome c9()
{
    TrajectoryConfig cfg;
    cfg.n_trajectories = 10000;
    cfg.t_final = 1e4;
    cfg.seed = 20240611;
    cfg.threads = default_thread_count();
    using Get = double (*)(const CumulantSet&);
    const std::vector<std::pair<const char*, Get>> q{
        {"I_s_L", [](const CumulantSet& c) { return c.spin_current(0); }},
        {"I_s_R", [](const CumulantSet& c) { return c.spin_current(1); }},
        {"I_c_L", [](const CumulantSet& c) { return c.charge_current(0); }},
        {"S_s_LL", [](const CumulantSet& c) { return c.spin_noise(0, 0); }},
        {"S_s_LR", [](const CumulantSet& c) { return c.spin_noise(0, 1); }},
        {"S_s_RR", [](const CumulantSet& c) { return c.spin_noise(1, 1); }},
        {"C_s_LLL", [](const CumulantSet& c) { return c.spin_third(0, 0, 0); }},
        {"C_s_LLR", [](const CumulantSet& c) { return c.spin_third(0, 0, 1); }},
        {"C_s_LRR", [](const CumulantSet& c) { return c.spin_third(0, 1, 1); }},
        {"C_s_RRR", [](const CumulantSet& c) { return c.spin_third(1, 1, 1); }},
    };
    bool ok = true;
    double worst_z = 0;
    std::string where;
    for (double r : {0.25, 0.5, 1.0}) {
        const RateParams p = RateParams::symmetric(1.0, r);
        const auto est = empirical_cumulants(simulate(p, cfg), cfg.t_final);
        const auto ref = full_cumulant_set(Regime::incoherent, p);
        for (const auto& [name, get] : q) {
            const double se = get(est.standard_error);
            const double dev = std::abs(get(est.estimate) - get(ref));
            // a charge combination is identically zero in every sample
            const double z = se > 0 ? dev / se : (dev <= 1e-12 ? 0.0 : INFINITY);
            if (z > worst_z) {
                worst_z = z;
                where = std::string(name) + " at r_rf=" + fmt(r);
            }
            if (z > 4) ok = false;
        }
    }
    return {ok, "worst |estimate - analytic| = " + fmt(worst_z) + " SE (" + where + ")"};
}

Outcome c10()
{
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> rr(0.05, 3.0), dd(-2.0, 2.0), cc(-1.5, 1.5);
    double worst = 0, verbatim = 0, verbatim_best = 0;
    for (int k = 0; k < 20; ++k) {
        const RateParams p = RateParams::symmetric(1.0, rr(rng), dd(rng));
        const CountingVector chi{{cc(rng), cc(rng), cc(rng), cc(rng)}};
        worst = std::max(worst, closed_form_incoherent_ev0(p, chi, true).deviation);
        const auto v = closed_form_incoherent_ev0(p, chi, false);
        verbatim = std::max(verbatim, v.deviation);
        verbatim_best = std::max(verbatim_best, v.best_branch_deviation);
    }
    return {worst <= 1e-9, "corrected max deviation " + fmt(worst) + "; verbatim coefficients deviate up to " +
                               fmt(verbatim) + " (best cube-root branch " + fmt(verbatim_best) + ")"};
}

Outcome c11()
{
    double worst = 0;
    for (Regime r : {Regime::coherent, Regime::incoherent})
        for (double v : full_cumulant_set(r, RateParams::symmetric(1.0, 0.0)).flatten())
            worst = std::max(worst, std::abs(v));
    return {worst <= 1e-12, "max |cumulant| = " + fmt(worst) + " at r_rf = 0"};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c12()
{
    const fs::path dir = fs::temp_directory_path() / ("spinfcs_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "default.conf");
        cfg << default_config;
    }
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4", "1", "7"}) {
        const fs::path out = dir / (std::string("t") + threads + "_" + std::to_string(outputs.size()));
        const std::string cmd = std::string("\"") + SPINFCS_CLI + "\" sweep \"" + (dir / "default.conf").string() +
                                "\" --out \"" + out.string() + "\" --threads " + threads;
        if (std::system(cmd.c_str()) != 0) {
            fs::remove_all(dir);
            return {false, "CLI exited nonzero with --threads " + std::string(threads)};
        }
        outputs.push_back(slurp(out / "sweep.csv"));
    }
    fs::remove_all(dir);
    bool same = !outputs[0].empty();
    for (const auto& o : outputs) same = same && o == outputs[0];
    return {same, std::to_string(outputs.size()) + " runs (threads 1, 4, 1, 7), " +
                      std::to_string(outputs[0].size()) + " bytes, " + (same ? "identical" : "differ")};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all{
        {1, "conservation root", 1, c1},
        {2, "elimination identity", 1, c2},
        {3, "zero charge current", 5, c3},
        {4, "gauge nullity of charge cumulants", 1, c4},
        {5, "sign flip of S^s_LR", 10, c5},
        {6, "third-moment resilience", 10, c6},
        {7, "flux-balance current 1/14", 0.1, c7},
        {8, "implicit vs finite-difference cumulants", 30, c8},
        {9, "trajectory oracle", 300, c9},
        {10, "closed-form cubic", 1, c10},
        {11, "trivial shutdown", 0.1, c11},
        {12, "CSV determinism", 20, c12},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    if (wanted.empty())
        for (const auto& c : all) wanted.push_back(c.id);

    int failed = 0;
    for (int id : wanted) {
        if (id < 1 || id > int(all.size())) {
            std::cerr << "no criterion " << id << '\n';
            return 2;
        }
        const auto& c = all[std::size_t(id - 1)];
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt > c.budget_s) {
            o.pass = false;
            o.detail += "; over time budget " + fmt(c.budget_s) + " s";
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << o.detail << " ("
                  << fmt(dt) << " s)" << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
