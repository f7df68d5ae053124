#ifndef SPINFCS_POLYNOMIAL_HPP
#define SPINFCS_POLYNOMIAL_HPP

#include <spinfcs/dense.hpp>
#include <spinfcs/errors.hpp>
#include <spinfcs/model.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace spinfcs {

/// Polynomial with coefficients ordered from the constant term upwards.
template <typename T>
struct Polynomial {
    std::vector<T> coefficients;

    std::size_t degree() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }

    template <typename U>
    U operator()(const U& x) const
    {
        U acc(coefficients.back());
        for (std::size_t k = coefficients.size() - 1; k-- > 0;) acc = acc * x + U(coefficients[k]);
        return acc;
    }

    Polynomial derivative() const
    {
        Polynomial d;
        for (std::size_t k = 1; k < coefficients.size(); ++k) d.coefficients.push_back(coefficients[k] * T(double(k)));
        if (d.coefficients.empty()) d.coefficients.push_back(T(0));
        return d;
    }

    double max_abs_coefficient() const
    {
        double m = 0;
        for (const auto& c : coefficients) m = std::max(m, double(std::abs(c)));
        return m;
    }
};

/// det(M - lambda I) of a generator; leading coefficient (-1)^n.
using CharPoly = Polynomial<cplx>;

inline CharPoly char_poly(const GeneratorMatrix& gen)
{
    const std::size_t n = gen.dim();
    if (n != 3 && n != 5) throw InvalidParams("char_poly supports 3x3 and 5x5 generators");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(gen(i, j).real()) || !std::isfinite(gen(i, j).imag()))
                throw InvalidParams("generator has non-finite entries");
    return {characteristic_coefficients(gen.entries)};
}

/// Polishes a root of p by Newton steps, keeping only steps that reduce |p|.
inline cplx newton_polish(const CharPoly& p, cplx root, int max_iter = 4)
{
    const CharPoly dp = p.derivative();
    double res = std::abs(p(root));
    for (int it = 0; it < max_iter && res > 0; ++it) {
        const cplx d = dp(root);
        if (d == cplx(0)) break;
        const cplx next = root - p(root) / d;
        const double r2 = std::abs(p(next));
        if (!(r2 < res)) break;
        root = next;
        res = r2;
    }
    return root;
}

/// Roots from the eigenvalues of the companion matrix.
inline std::vector<cplx> companion_roots(const CharPoly& p)
{
    const std::size_t n = p.degree();
    if (n == 0) return {};
    const cplx lead = p.coefficients[n];
    if (lead == cplx(0)) throw InvalidParams("polynomial has zero leading coefficient");
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(Eigen::Index(n), Eigen::Index(n));
    for (std::size_t i = 1; i < n; ++i) c(Eigen::Index(i), Eigen::Index(i - 1)) = 1.0;
    for (std::size_t i = 0; i < n; ++i) c(Eigen::Index(i), Eigen::Index(n - 1)) = -p.coefficients[i] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c, false);
    std::vector<cplx> roots(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = es.eigenvalues()(Eigen::Index(i));
    return roots;
}

/**
 * The three roots of a lambda^3 + b lambda^2 + c lambda + d in the form
 *   lambda = (1/6a) [K - 2b - 4(3ca - b^2)/K],
 *   K^3 = 36cba - 108da^2 - 8b^3 + 12 sqrt(3) sqrt(4c^3a - c^2b^2 - 18cbad + 27d^2a^2 + 4db^3a),
 * one root per cube-root branch of K. The radicand is the Cardano
 * discriminant only for a = 1; callers wanting exact roots pass a monic cubic.
 * Returns nullopt when K vanishes.
 */
inline std::optional<std::array<cplx, 3>> cardano_branches(cplx a, cplx b, cplx c, cplx d)
{
    const double sqrt3 = std::sqrt(3.0);
    const cplx rad = 4.0 * c * c * c * a - c * c * b * b - 18.0 * c * b * a * d + 27.0 * d * d * a * a +
                     4.0 * d * b * b * b * a;
    const cplx k3 = 36.0 * c * b * a - 108.0 * d * a * a - 8.0 * b * b * b + 12.0 * sqrt3 * std::sqrt(rad);
    const double scale = std::max({std::abs(36.0 * c * b * a), std::abs(108.0 * d * a * a), std::abs(8.0 * b * b * b),
                                   std::abs(12.0 * sqrt3 * std::sqrt(rad)), 1e-300});
    if (std::abs(k3) <= 1e-13 * scale || a == cplx(0)) return std::nullopt;
    const cplx k0 = std::pow(k3, 1.0 / 3.0);
    const cplx omega(-0.5, sqrt3 / 2);
    std::array<cplx, 3> roots;
    cplx k = k0;
    for (auto& r : roots) {
        r = (k - 2.0 * b - 4.0 * (3.0 * c * a - b * b) / k) / (6.0 * a);
        k *= omega;
    }
    return roots;
}

/**
 * All roots of a characteristic polynomial. Cubics use the closed form
 * cross-checked against companion eigenvalues; other degrees use the
 * companion matrix. Every root is Newton-polished.
 */
inline std::vector<cplx> polynomial_roots(const CharPoly& p)
{
    std::vector<cplx> roots = companion_roots(p);
    if (p.degree() == 3) {
        const cplx lead = p.coefficients[3];
        if (auto cb = cardano_branches(1.0, p.coefficients[2] / lead, p.coefficients[1] / lead,
                                       p.coefficients[0] / lead)) {
            double scale = 1.0;
            for (const auto& r : roots) scale = std::max(scale, std::abs(r));
            // Accept the closed form when it reproduces the companion root set.
            bool agree = true;
            for (const auto& r : *cb) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& q : roots) best = std::min(best, std::abs(r - q));
                if (best > 1e-6 * scale) agree = false;
            }
            if (agree) roots.assign(cb->begin(), cb->end());
        }
    }
    for (auto& r : roots) r = newton_polish(p, r);
    return roots;
}

} // namespace spinfcs

#endif // SPINFCS_POLYNOMIAL_HPP
