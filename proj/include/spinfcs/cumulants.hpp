#ifndef SPINFCS_CUMULANTS_HPP
#define SPINFCS_CUMULANTS_HPP

#include <spinfcs/cgf.hpp>
#include <spinfcs/errors.hpp>
#include <spinfcs/jet.hpp>
#include <spinfcs/model.hpp>
#include <spinfcs/polynomial.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spinfcs {

// Cumulants are derivatives of lambda_0 with respect to the real counting
// variables s = i chi: phases e^{i chi} become e^{s}. With this convention
// every cumulant of the real counting process is real. A spin-up entry is
// counted as -1 and a spin-down exit as +1, so I_{eta up} <= 0 <= I_{eta down}.

enum class DiffMethod { implicit, finite_difference };

/// Spin-resolved cumulants up to third order, channel order L_up, L_down, R_up, R_down.
struct CumulantSet {
    std::array<double, 4> first{};
    std::array<double, 16> second{}; ///< [a*4 + b], symmetric
    std::array<double, 64> third{};  ///< [a*16 + b*4 + c], symmetric

    /// Lead-resolved combinations, leads 0 = L, 1 = R.
    struct Derived {
        std::array<double, 2> spin_current{};   ///< I^s_eta = I_{eta up} - I_{eta down}
        std::array<double, 2> charge_current{}; ///< I^c_eta = I_{eta up} + I_{eta down}
        std::array<double, 4> spin_noise{};     ///< S^s_{eta eta'}, [eta*2 + eta']
        std::array<double, 8> spin_third{};     ///< C^s_{eta eta' eta''}, [eta*4 + eta'*2 + eta'']
    } derived;

    double I(Channel a) const { return first[index_of(a)]; }
    double S(Channel a, Channel b) const { return second[index_of(a) * 4 + index_of(b)]; }
    double C(Channel a, Channel b, Channel c) const
    {
        return third[index_of(a) * 16 + index_of(b) * 4 + index_of(c)];
    }

    double spin_current(int lead) const { return derived.spin_current[std::size_t(lead)]; }
    double charge_current(int lead) const { return derived.charge_current[std::size_t(lead)]; }
    double spin_noise(int l1, int l2) const { return derived.spin_noise[std::size_t(l1 * 2 + l2)]; }
    double spin_third(int l1, int l2, int l3) const
    {
        return derived.spin_third[std::size_t(l1 * 4 + l2 * 2 + l3)];
    }

    /// Raw value for a multi-index of length 1..3.
    double at(std::span<const Channel> idx) const
    {
        switch (idx.size()) {
        case 1: return I(idx[0]);
        case 2: return S(idx[0], idx[1]);
        case 3: return C(idx[0], idx[1], idx[2]);
        }
        throw InvalidParams("cumulant order must be 1, 2 or 3");
    }

    static constexpr std::size_t flat_size = 4 + 16 + 64 + 2 + 2 + 4 + 8;

    std::array<double, flat_size> flatten() const
    {
        std::array<double, flat_size> f{};
        auto it = f.begin();
        it = std::copy(first.begin(), first.end(), it);
        it = std::copy(second.begin(), second.end(), it);
        it = std::copy(third.begin(), third.end(), it);
        it = std::copy(derived.spin_current.begin(), derived.spin_current.end(), it);
        it = std::copy(derived.charge_current.begin(), derived.charge_current.end(), it);
        it = std::copy(derived.spin_noise.begin(), derived.spin_noise.end(), it);
        std::copy(derived.spin_third.begin(), derived.spin_third.end(), it);
        return f;
    }

    static CumulantSet unflatten(const std::array<double, flat_size>& f)
    {
        CumulantSet c;
        auto it = f.begin();
        auto take = [&](auto& arr) {
            std::copy(it, it + std::ptrdiff_t(arr.size()), arr.begin());
            it += std::ptrdiff_t(arr.size());
        };
        take(c.first);
        take(c.second);
        take(c.third);
        take(c.derived.spin_current);
        take(c.derived.charge_current);
        take(c.derived.spin_noise);
        take(c.derived.spin_third);
        return c;
    }
};

enum class SignRule {
    spin,   ///< weight sign(up) = +1, sign(down) = -1 per factor
    charge, ///< all weights +1
};

/**
 * Sum over spin assignments of the leads' channels, weighted by the product
 * of per-factor signs. For leads (L, R) at order 2 this is
 *   S^{uu}_{LR} + S^{dd}_{LR} - S^{ud}_{LR} - S^{du}_{LR}.
 */
inline double spin_sign_combination(const CumulantSet& cs, std::span<const int> leads, SignRule rule = SignRule::spin)
{
    const std::size_t n = leads.size();
    if (n < 1 || n > 3) throw InvalidParams("combination order must be 1, 2 or 3");
    double total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::array<Channel, 3> idx{};
        double w = 1;
        for (std::size_t j = 0; j < n; ++j) {
            const bool down = (mask >> j) & 1u;
            idx[j] = make_channel(leads[j], !down);
            if (down && rule == SignRule::spin) w = -w;
        }
        total += w * cs.at(std::span<const Channel>(idx.data(), n));
    }
    return total;
}

/// Fills cs.derived from the raw channel cumulants.
inline void derive_combinations(CumulantSet& cs)
{
    for (int a = 0; a < 2; ++a) {
        const std::array<int, 1> l{a};
        cs.derived.spin_current[std::size_t(a)] = spin_sign_combination(cs, l, SignRule::spin);
        cs.derived.charge_current[std::size_t(a)] = spin_sign_combination(cs, l, SignRule::charge);
        for (int b = 0; b < 2; ++b) {
            const std::array<int, 2> l2{a, b};
            cs.derived.spin_noise[std::size_t(a * 2 + b)] = spin_sign_combination(cs, l2);
            for (int c = 0; c < 2; ++c) {
                const std::array<int, 3> l3{a, b, c};
                cs.derived.spin_third[std::size_t(a * 4 + b * 2 + c)] = spin_sign_combination(cs, l3);
            }
        }
    }
}

/// All multi-indices i1 <= i2 <= ... of a given order (4, 10, 20 of them).
inline std::vector<std::vector<Channel>> sorted_multi_indices(std::size_t order)
{
    std::vector<std::vector<Channel>> out;
    std::vector<std::size_t> k(order, 0);
    auto emit = [&](auto&& self, std::size_t pos, std::size_t lo) -> void {
        if (pos == order) {
            std::vector<Channel> idx;
            for (auto v : k) idx.push_back(channel_at(v));
            out.push_back(std::move(idx));
            return;
        }
        for (std::size_t v = lo; v < 4; ++v) {
            k[pos] = v;
            self(self, pos + 1, v);
        }
    };
    emit(emit, 0, 0);
    return out;
}

/// The 34 independent multi-indices of orders 1 to 3.
inline std::vector<std::vector<Channel>> all_independent_multi_indices()
{
    std::vector<std::vector<Channel>> all;
    for (std::size_t n = 1; n <= 3; ++n) {
        auto v = sorted_multi_indices(n);
        all.insert(all.end(), v.begin(), v.end());
    }
    return all;
}

namespace detail {

// Implicit differentiation of p(lambda(t), t) = 0 in jet arithmetic. Channel
// idx[j] receives the exponent unit * t_j. The root lambda_0 at t = 0 is
// refined order by order with the fixed slope p_lambda(lambda_0):
// iteration k fixes the order-k components, which is the triangular solve
// lambda' -> lambda'' -> lambda'''.
template <typename S, int N>
S implicit_mixed_derivative(Regime r, const RateParams& p, std::span<const Channel> idx, S unit)
{
    using J = Jet<S, N>;
    std::array<J, 4> x{};
    for (int j = 0; j < N; ++j) x[index_of(idx[std::size_t(j)])] += J::variable(S(0), j) * J(unit);
    const Polynomial<J> pj{characteristic_coefficients(regime_generator<J>(r, p, x))};

    CharPoly base;
    for (const auto& c : pj.coefficients) base.coefficients.push_back(cplx(c.value()));
    const auto roots = polynomial_roots(base);
    cplx lambda0 = roots.front();
    for (const auto& root : roots)
        if (std::abs(root) < std::abs(lambda0)) lambda0 = root;
    const cplx slope = base.derivative()(lambda0);
    if (std::abs(slope) <= 1e-12 * base.max_abs_coefficient())
        throw DegenerateBranch("dp/dlambda vanishes at the conservation root");

    S l0, inv_slope;
    if constexpr (std::is_same_v<S, double>) {
        l0 = lambda0.real();
        inv_slope = 1.0 / slope.real();
    } else {
        l0 = lambda0;
        inv_slope = 1.0 / slope;
    }
    J lambda(l0);
    for (int it = 0; it <= N; ++it) lambda = lambda - pj(lambda) * J(inv_slope);
    return lambda[J::full_mask];
}

template <typename S>
S implicit_dispatch(Regime r, const RateParams& p, std::span<const Channel> idx, S unit)
{
    switch (idx.size()) {
    case 1: return implicit_mixed_derivative<S, 1>(r, p, idx, unit);
    case 2: return implicit_mixed_derivative<S, 2>(r, p, idx, unit);
    case 3: return implicit_mixed_derivative<S, 3>(r, p, idx, unit);
    }
    throw InvalidParams("cumulant order must be 1, 2 or 3");
}

using quad = boost::multiprecision::cpp_bin_float_quad;

// lambda_0(s) in 113-bit arithmetic by Newton iteration from 0; s is small.
inline quad branch_value(Regime r, const RateParams& p, const std::array<quad, 4>& s)
{
    const Polynomial<quad> q{characteristic_coefficients(regime_generator<quad>(r, p, s))};
    const Polynomial<quad> dq = q.derivative();
    quad lambda = 0;
    const quad tol = std::numeric_limits<quad>::epsilon() * 16;
    for (int it = 0; it < 60; ++it) {
        const quad d = dq(lambda);
        if (d == 0) throw DegenerateBranch("dp/dlambda vanishes near the conservation root");
        const quad step = q(lambda) / d;
        lambda -= step;
        if (abs(step) <= tol * (1 + abs(lambda))) break;
    }
    return lambda;
}

// Nested central differences with step h in every direction.
inline quad central_difference(Regime r, const RateParams& p, std::span<const Channel> idx, const quad& h)
{
    const std::size_t n = idx.size();
    quad acc = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::array<quad, 4> s{0, 0, 0, 0};
        int sign = 1;
        for (std::size_t j = 0; j < n; ++j) {
            const bool minus = (mask >> j) & 1u;
            s[index_of(idx[j])] += minus ? quad(-h) : h;
            if (minus) sign = -sign;
        }
        const quad v = branch_value(r, p, s);
        acc += sign > 0 ? v : quad(-v);
    }
    quad denom = 1;
    for (std::size_t j = 0; j < n; ++j) denom *= 2 * h;
    return acc / denom;
}

} // namespace detail

inline constexpr double fd_base_step = 1e-3;

/// d^n lambda_0 / ds_{i1} ... ds_{in} at s = 0.
inline double cumulant(Regime regime, const RateParams& params, std::span<const Channel> multi_index,
                       DiffMethod method = DiffMethod::implicit)
{
    require_finite(params);
    if (multi_index.empty() || multi_index.size() > 3) throw InvalidParams("cumulant order must be 1, 2 or 3");
    if (method == DiffMethod::implicit) return detail::implicit_dispatch<double>(regime, params, multi_index, 1.0);

    // Richardson extrapolation over h, h/2, h/4 (error series in h^2).
    using detail::quad;
    const quad h = fd_base_step;
    const quad d1 = detail::central_difference(regime, params, multi_index, h);
    const quad d2 = detail::central_difference(regime, params, multi_index, h / 2);
    const quad d3 = detail::central_difference(regime, params, multi_index, h / 4);
    const quad r1 = (4 * d2 - d1) / 3;
    const quad r2 = (4 * d3 - d2) / 3;
    return static_cast<double>((16 * r2 - r1) / 15);
}

inline double cumulant(Regime regime, const RateParams& params, std::initializer_list<Channel> multi_index,
                       DiffMethod method = DiffMethod::implicit)
{
    return cumulant(regime, params, std::span<const Channel>(multi_index.begin(), multi_index.size()), method);
}

/// Derivative with respect to chi itself (complex); equals i^n times the s-derivative.
inline cplx chi_derivative(Regime regime, const RateParams& params, std::span<const Channel> multi_index)
{
    require_finite(params);
    return detail::implicit_dispatch<cplx>(regime, params, multi_index, cplx(0, 1));
}

/// 1e-6 relative, or 1e-9 absolute when both values are below 1e-3 in magnitude.
inline bool methods_agree(double a, double b)
{
    const double m = std::max(std::abs(a), std::abs(b));
    if (m < 1e-3) return std::abs(a - b) <= 1e-9;
    return std::abs(a - b) <= 1e-6 * m;
}

struct CrossChecked {
    double implicit = 0;
    double finite_difference = 0;
};

/// Both methods; throws MethodsDisagree when they differ beyond methods_agree.
inline CrossChecked cumulant_cross_checked(Regime regime, const RateParams& params,
                                           std::span<const Channel> multi_index)
{
    CrossChecked c{cumulant(regime, params, multi_index, DiffMethod::implicit),
                   cumulant(regime, params, multi_index, DiffMethod::finite_difference)};
    if (!methods_agree(c.implicit, c.finite_difference))
        throw MethodsDisagree("implicit " + std::to_string(c.implicit) + " vs finite difference " +
                              std::to_string(c.finite_difference));
    return c;
}

struct FullSetOptions {
    std::size_t cross_check_count = 5;
    std::uint64_t cross_check_seed = 0x5eedf00dULL;
};

/// All 34 independent cumulants by implicit differentiation, symmetrized, with derived combinations.
inline CumulantSet full_cumulant_set(Regime regime, const RateParams& params, const FullSetOptions& opt = {})
{
    CumulantSet cs;
    const auto indices = all_independent_multi_indices();
    for (const auto& idx : indices) {
        const double v = cumulant(regime, params, idx, DiffMethod::implicit);
        std::array<std::size_t, 3> k{};
        for (std::size_t j = 0; j < idx.size(); ++j) k[j] = index_of(idx[j]);
        if (idx.size() == 1) {
            cs.first[k[0]] = v;
        } else if (idx.size() == 2) {
            cs.second[k[0] * 4 + k[1]] = cs.second[k[1] * 4 + k[0]] = v;
        } else {
            std::sort(k.begin(), k.end());
            do {
                cs.third[k[0] * 16 + k[1] * 4 + k[2]] = v;
            } while (std::next_permutation(k.begin(), k.end()));
        }
    }

    if (opt.cross_check_count > 0) {
        // deterministic subset, independent of the standard library's distributions
        std::mt19937_64 rng(opt.cross_check_seed);
        std::vector<std::size_t> order(indices.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
        for (std::size_t i = 0; i < std::min(opt.cross_check_count, order.size()); ++i) {
            const auto& idx = indices[order[i]];
            const double fd = cumulant(regime, params, idx, DiffMethod::finite_difference);
            if (!methods_agree(cs.at(idx), fd))
                throw MethodsDisagree("cross-check failed for a cumulant of order " + std::to_string(idx.size()));
        }
    }
    derive_combinations(cs);
    return cs;
}

} // namespace spinfcs

#endif // SPINFCS_CUMULANTS_HPP
