#ifndef SPINFCS_CGF_HPP
#define SPINFCS_CGF_HPP

#include <spinfcs/errors.hpp>
#include <spinfcs/model.hpp>
#include <spinfcs/polynomial.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace spinfcs {

/// Value of the CGF branch lambda_0 at a set of counting fields.
struct CgfValue {
    cplx lambda0;
    CountingVector chi;
};

struct ContinuationOptions {
    double max_step = 0.05;   ///< largest |d chi| (max norm) per step
    int max_refinements = 16; ///< step bisections before declaring a crossing
    double crossing_tol = 1e-9;
};

namespace detail {

inline double root_scale(const std::vector<cplx>& roots)
{
    double s = 1.0;
    for (const auto& r : roots) s = std::max(s, std::abs(r));
    return s;
}

// Index of the root nearest to target, and the distance to the runner-up.
inline std::pair<std::size_t, double> nearest_root(const std::vector<cplx>& roots, cplx target, double* best_dist)
{
    std::size_t best = 0;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double d = std::abs(roots[i] - target);
        if (d < d1) {
            d2 = d1;
            d1 = d;
            best = i;
        } else if (d < d2) {
            d2 = d;
        }
    }
    *best_dist = d1;
    return {best, d2};
}

} // namespace detail

/**
 * Follows the root branch that vanishes at chi = 0 along the straight line
 * chi(t) = t * target, t in [0, 1]. roots_at(chi) returns all roots of the
 * characteristic polynomial at chi.
 *
 * Each step predicts linearly from the last two accepted points and accepts
 * the nearest root only if the runner-up is at least twice as far away;
 * otherwise the step is bisected. A persistent ambiguity is a BranchCrossing.
 */
template <typename RootsAt>
cplx continue_branch(RootsAt&& roots_at, const CountingVector& target, const ContinuationOptions& opt = {})
{
    std::vector<cplx> roots = roots_at(CountingVector::zero());
    if (roots.empty()) throw InvalidParams("no roots");
    const double scale = detail::root_scale(roots);

    std::size_t i0 = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (std::abs(roots[i]) < std::abs(roots[i0])) i0 = i;
    if (std::abs(roots[i0]) > 1e-8 * scale) throw NoNullVector("no conservation root at zero counting fields");
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (i != i0 && std::abs(roots[i] - roots[i0]) < opt.crossing_tol * scale)
            throw DegenerateBranch("conservation root is degenerate at zero counting fields");

    cplx prev = roots[i0];
    if (target.is_zero()) return prev;

    cplx prev2 = prev;
    double prev_dt = 0;
    const int base_steps = std::max(1, int(std::ceil(target.max_abs() / opt.max_step)));
    const double base_dt = 1.0 / base_steps;
    double t = 0, dt = base_dt;
    int refinements = 0;
    while (t < 1.0) {
        const double t_next = std::min(1.0, t + dt);
        const double h = t_next - t;
        const cplx predicted = prev_dt > 0 ? prev + (prev - prev2) * (h / prev_dt) : prev;
        roots = roots_at(target * t_next);
        double d1 = 0;
        const auto [best, d2] = detail::nearest_root(roots, predicted, &d1);
        const bool separated = d2 > 2.0 * d1 && d2 > opt.crossing_tol * scale;
        if (!separated) {
            if (++refinements > opt.max_refinements)
                throw BranchCrossing("CGF branch meets another root during continuation");
            dt *= 0.5;
            continue;
        }
        prev2 = prev;
        prev = roots[best];
        prev_dt = h;
        t = t_next;
        // recover the nominal step after a successful refined step
        dt = std::min(base_dt, dt * 2.0);
    }
    return prev;
}

/// CGF branch of an arbitrary generator family chi -> GeneratorMatrix.
inline CgfValue dominant_eigenvalue(const std::function<GeneratorMatrix(const CountingVector&)>& family,
                                    const CountingVector& chi, const ContinuationOptions& opt = {})
{
    require_finite(chi);
    auto roots_at = [&](const CountingVector& c) { return polynomial_roots(char_poly(family(c))); };
    return {continue_branch(roots_at, chi, opt), chi};
}

inline CgfValue dominant_eigenvalue(Regime regime, const RateParams& params, const CountingVector& chi,
                                    const ContinuationOptions& opt = {})
{
    return dominant_eigenvalue([&](const CountingVector& c) { return build_generator(regime, params, c); }, chi,
                               opt);
}

/**
 * Single-matrix version: the root of largest real part, which is the CGF
 * branch for counting fields close to zero. At chi = 0 it coincides with the
 * conservation root.
 */
inline cplx leading_root(const GeneratorMatrix& gen)
{
    const auto roots = polynomial_roots(char_poly(gen));
    return *std::max_element(roots.begin(), roots.end(),
                             [](cplx a, cplx b) { return a.real() < b.real(); });
}

// ---------------------------------------------------------------------------
// Closed form of the incoherent cubic
// ---------------------------------------------------------------------------

/// a lambda^3 + b lambda^2 + c lambda + d
struct CubicCoefficients {
    cplx a, b, c, d;
};

namespace detail {

inline void require_equal_couplings(const RateParams& p)
{
    if (!p.equal_couplings()) throw UnequalCouplings("closed form assumes G_L_up = G_L_down = G_R_up = G_R_down");
}

// Sum of the four products e^{-i chi_{eta up}} e^{i chi_{eta' down}}.
inline cplx cycle_phase_sum(const CountingVector& chi)
{
    cplx s = 0;
    for (Channel up : {Channel::left_up, Channel::right_up})
        for (Channel down : {Channel::left_down, Channel::right_down})
            s += std::exp(cplx(0, -chi[up])) * std::exp(cplx(0, chi[down]));
    return s;
}

} // namespace detail

/// Coefficients a, b, c, d (and X = R_rf^2 Gamma^3) of the published cubic, verbatim.
struct PrintedCubic {
    CubicCoefficients coefficients;
    double x;
};

inline PrintedCubic coefficients_abcd(const RateParams& p, const CountingVector& chi)
{
    require_finite(p);
    require_finite(chi);
    detail::require_equal_couplings(p);
    const double g = 2 * p.gamma_l_up;
    const double d2 = p.delta_esr * p.delta_esr;
    const double r2 = p.r_rf * p.r_rf;
    const double x = r2 * g * g * g;
    PrintedCubic out;
    out.x = x;
    out.coefficients.a = 4 * d2 - g * g - g;
    out.coefficients.b = 8 * g * d2 - 8 * r2 * g - 2 * g * g * g;
    out.coefficients.c = 12 * r2 * g * g - g * g * g * g - 4 * g * g * d2;
    out.coefficients.d = 4 * x - x * detail::cycle_phase_sum(chi);
    return out;
}

/// Monic cubic lambda^3 + b lambda^2 + c lambda + d whose roots are the eigenvalues of build_incoherent(p, chi).
inline CubicCoefficients exact_monic_cubic(const RateParams& p, const CountingVector& chi)
{
    const CharPoly q = char_poly(build_incoherent(p, chi));
    // det(M - lambda I) = -lambda^3 + ...
    const cplx lead = q.coefficients[3];
    return {1.0, q.coefficients[2] / lead, q.coefficients[1] / lead, q.coefficients[0] / lead};
}

/**
 * The exact cubic rescaled to the published normalization, in which d equals
 * 4X - X * (phase sum). For equal couplings Gamma/2 this is
 *   a = 4(delta^2 + Gamma^2), b = 8 Gamma (delta^2 + Gamma^2) + 8 R^2 Gamma,
 *   c = 4 Gamma^2 (delta^2 + Gamma^2) + 12 R^2 Gamma^2.
 */
inline CubicCoefficients exact_cubic_printed_normalization(const RateParams& p, const CountingVector& chi)
{
    detail::require_equal_couplings(p);
    const double g = 2 * p.gamma_l_up;
    const double s = 4 * (p.delta_esr * p.delta_esr + g * g);
    const CubicCoefficients m = exact_monic_cubic(p, chi);
    return {s * m.a, s * m.b, s * m.c, s * m.d};
}

struct ClosedFormResult {
    CgfValue value;          ///< closed-form Ev_0
    cplx numeric;            ///< dominant_eigenvalue at the same point
    double deviation = 0;    ///< |value - numeric|
    double best_branch_deviation = 0; ///< min over the three cube-root branches
    bool fell_back = false;  ///< K = 0: value is the numeric root
    std::string note;
};

/**
 * Closed-form Ev_0 of the incoherent cubic.
 *
 * corrected = false evaluates the published coefficients in the published
 * K expression (principal cube root). corrected = true inserts the exact
 * monic cubic of the rate matrix into the same expression and selects the
 * cube-root branch by continuation from chi = 0.
 */
inline ClosedFormResult closed_form_incoherent_ev0(const RateParams& p, const CountingVector& chi, bool corrected,
                                                   const ContinuationOptions& opt = {})
{
    detail::require_equal_couplings(p);
    ClosedFormResult out;
    out.numeric = dominant_eigenvalue(Regime::incoherent, p, chi, opt).lambda0;
    out.value.chi = chi;

    auto fall_back = [&](const std::string& why) {
        out.fell_back = true;
        out.note = why;
        out.value.lambda0 = out.numeric;
        out.deviation = 0;
        out.best_branch_deviation = 0;
        return out;
    };

    if (corrected) {
        bool degenerate = false;
        auto roots_at = [&](const CountingVector& c) {
            const CubicCoefficients m = exact_monic_cubic(p, c);
            if (auto br = cardano_branches(m.a, m.b, m.c, m.d)) return std::vector<cplx>(br->begin(), br->end());
            degenerate = true;
            return companion_roots(char_poly(build_incoherent(p, c)));
        };
        out.value.lambda0 = continue_branch(roots_at, chi, opt);
        if (degenerate) out.note = "K = 0 on the path; numeric roots used there";
        out.fell_back = degenerate;
        out.deviation = std::abs(out.value.lambda0 - out.numeric);
        out.best_branch_deviation = out.deviation;
        return out;
    }

    const PrintedCubic pc = coefficients_abcd(p, chi);
    const auto& k = pc.coefficients;
    const auto br = cardano_branches(k.a, k.b, k.c, k.d);
    if (!br) return fall_back("K = 0 for the published coefficients");
    out.value.lambda0 = (*br)[0];
    out.deviation = std::abs((*br)[0] - out.numeric);
    out.best_branch_deviation = out.deviation;
    for (const auto& r : *br) out.best_branch_deviation = std::min(out.best_branch_deviation, std::abs(r - out.numeric));
    return out;
}

} // namespace spinfcs

#endif // SPINFCS_CGF_HPP
