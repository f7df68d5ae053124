#ifndef SPINFCS_MODEL_HPP
#define SPINFCS_MODEL_HPP

#include <spinfcs/dense.hpp>
#include <spinfcs/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace spinfcs {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Channels and parameters
// ---------------------------------------------------------------------------

/// Counting channel (lead, spin). Storage order everywhere is L_up, L_down, R_up, R_down.
enum class Channel : std::size_t { left_up = 0, left_down = 1, right_up = 2, right_down = 3 };

inline constexpr std::array<Channel, 4> all_channels{Channel::left_up, Channel::left_down,
                                                     Channel::right_up, Channel::right_down};

constexpr std::size_t index_of(Channel c) { return static_cast<std::size_t>(c); }
constexpr Channel channel_at(std::size_t i) { return static_cast<Channel>(i); }
/// 0 = left, 1 = right
constexpr int lead_of(Channel c) { return index_of(c) < 2 ? 0 : 1; }
constexpr bool is_up(Channel c) { return index_of(c) % 2 == 0; }
constexpr Channel make_channel(int lead, bool up) { return channel_at(std::size_t(2 * lead + (up ? 0 : 1))); }

inline std::string_view channel_name(Channel c)
{
    constexpr std::array<std::string_view, 4> names{"L_up", "L_down", "R_up", "R_down"};
    return names[index_of(c)];
}

/// Rates of the pump in units of Gamma (time in 1/Gamma).
struct RateParams {
    double gamma_l_up = 0.5;
    double gamma_l_down = 0.5;
    double gamma_r_up = 0.5;
    double gamma_r_down = 0.5;
    double r_rf = 0.0;      ///< ESR Rabi rate
    double delta_esr = 0.0; ///< detuning Delta - omega
    double gamma_phi = 0.0; ///< extra coherence relaxation; 0 is the fully coherent model

    /// Total coupling Gamma split equally over the four (lead, spin) channels.
    static RateParams symmetric(double gamma, double r_rf, double delta_esr = 0.0, double gamma_phi = 0.0)
    {
        return {gamma / 2, gamma / 2, gamma / 2, gamma / 2, r_rf, delta_esr, gamma_phi};
    }

    double gamma_up() const { return gamma_l_up + gamma_r_up; }
    double gamma_down() const { return gamma_l_down + gamma_r_down; }

    double tunnel_rate(Channel c) const
    {
        switch (c) {
        case Channel::left_up: return gamma_l_up;
        case Channel::left_down: return gamma_l_down;
        case Channel::right_up: return gamma_r_up;
        case Channel::right_down: return gamma_r_down;
        }
        return 0.0;
    }

    bool equal_couplings() const
    {
        return gamma_l_up == gamma_l_down && gamma_l_up == gamma_r_up && gamma_l_up == gamma_r_down;
    }

    friend bool operator==(const RateParams&, const RateParams&) = default;
};

/// Throws InvalidParams on any non-finite field.
inline void require_finite(const RateParams& p)
{
    const std::array<double, 7> v{p.gamma_l_up, p.gamma_l_down, p.gamma_r_up, p.gamma_r_down,
                                  p.r_rf,       p.delta_esr,    p.gamma_phi};
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidParams("rate parameters must be finite");
}

/// Soft checks; an empty list means the parameters are physically sensible.
inline std::vector<std::string> validation_warnings(const RateParams& p)
{
    std::vector<std::string> w;
    auto neg = [&](double v, const char* name) {
        if (v < 0) w.push_back(std::string(name) + " is negative");
    };
    neg(p.gamma_l_up, "gamma_l_up");
    neg(p.gamma_l_down, "gamma_l_down");
    neg(p.gamma_r_up, "gamma_r_up");
    neg(p.gamma_r_down, "gamma_r_down");
    neg(p.r_rf, "r_rf");
    neg(p.gamma_phi, "gamma_phi");
    if (!(p.gamma_up() > 0) && !(p.gamma_down() > 0)) w.push_back("no tunnel coupling: no transport can occur");
    return w;
}

/// Counting fields chi, one per channel, in radians.
struct CountingVector {
    std::array<double, 4> chi{};

    static CountingVector zero() { return {}; }
    static CountingVector uniform(double c) { return {{c, c, c, c}}; }

    double operator[](Channel c) const { return chi[index_of(c)]; }
    double& operator[](Channel c) { return chi[index_of(c)]; }

    CountingVector operator+(const CountingVector& o) const
    {
        CountingVector r;
        for (std::size_t k = 0; k < 4; ++k) r.chi[k] = chi[k] + o.chi[k];
        return r;
    }
    CountingVector operator*(double t) const
    {
        CountingVector r;
        for (std::size_t k = 0; k < 4; ++k) r.chi[k] = chi[k] * t;
        return r;
    }
    CountingVector operator-() const { return *this * -1.0; }

    double max_abs() const
    {
        double m = 0;
        for (double x : chi) m = std::max(m, std::abs(x));
        return m;
    }
    bool is_zero() const { return max_abs() == 0.0; }
};

inline void require_finite(const CountingVector& chi)
{
    for (double x : chi.chi)
        if (!std::isfinite(x)) throw InvalidParams("counting fields must be finite");
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// coherent5 = (rho_00, rho_uu, rho_dd, Re rho_ud, Im rho_ud); incoherent3 = populations only.
enum class Basis { coherent5, incoherent3 };

constexpr std::size_t basis_dim(Basis b) { return b == Basis::coherent5 ? 5 : 3; }

struct GeneratorMatrix {
    Basis basis = Basis::incoherent3;
    SquareMatrix<cplx> entries;

    std::size_t dim() const { return entries.dim(); }
    const cplx& operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
};

/// Transport regime evaluated by the CGF and cumulant machinery.
enum class Regime {
    coherent,   ///< 5x5 generator, gamma_phi forced to 0
    incoherent, ///< 3x3 rate generator with spin-flip rate z
    dephased,   ///< 5x5 generator with params.gamma_phi on the coherences
};

inline std::string_view regime_name(Regime r)
{
    switch (r) {
    case Regime::coherent: return "coherent";
    case Regime::incoherent: return "incoherent";
    case Regime::dephased: return "dephased";
    }
    return "?";
}

/**
 * Spin-flip rate of the sequential regime,
 *   z = R_rf^2 (G_L_down + G_R_down) / (delta^2 + (G_L_down + G_R_down)^2).
 */
inline double rabi_z(const RateParams& p)
{
    require_finite(p);
    const double g = p.gamma_down();
    const double den = p.delta_esr * p.delta_esr + g * g;
    if (den == 0.0)
        throw DegenerateDenominator("rabi_z: delta_esr = 0 and gamma_l_down + gamma_r_down = 0");
    return p.r_rf * p.r_rf * g / den;
}

namespace detail {

// x are counting exponents: e^{+x} marks a spin-down exit, e^{-x} a spin-up entry.
// With x = i chi this is the phase convention of the coherent rate matrix;
// with x = s real it is the real counting variable used for cumulants.
template <typename T>
SquareMatrix<T> bloch_generator(const RateParams& p, const std::array<T, 4>& x, double omega, double gamma_phi)
{
    using std::exp;
    const std::size_t lu = index_of(Channel::left_up), ld = index_of(Channel::left_down);
    const std::size_t ru = index_of(Channel::right_up), rd = index_of(Channel::right_down);
    const double width = p.gamma_down() + gamma_phi;

    SquareMatrix<T> m(5);
    m(0, 0) = T(-p.gamma_up());
    m(0, 2) = T(p.gamma_l_down) * exp(x[ld]) + T(p.gamma_r_down) * exp(x[rd]);
    m(1, 0) = T(p.gamma_l_up) * exp(-x[lu]) + T(p.gamma_r_up) * exp(-x[ru]);
    m(1, 4) = T(-2 * omega);
    m(2, 2) = T(-p.gamma_down());
    m(2, 4) = T(2 * omega);
    m(3, 3) = T(-width);
    m(3, 4) = T(-p.delta_esr);
    m(4, 1) = T(omega);
    m(4, 2) = T(-omega);
    m(4, 3) = T(p.delta_esr);
    m(4, 4) = T(-width);
    return m;
}

template <typename T>
std::array<T, 4> imaginary_exponents(const CountingVector& chi)
{
    std::array<T, 4> x;
    for (std::size_t k = 0; k < 4; ++k) x[k] = T(cplx(0.0, chi.chi[k]));
    return x;
}

} // namespace detail

/**
 * Coherent 5x5 generator in the counting exponents x.
 *
 * Bloch equations with coherence width G_L_down + G_R_down (+ gamma_phi) and
 * effective drive omega = R_rf / sqrt(2): population rows carry -/+ 2 omega,
 * the Im rho_ud row +/- omega. With this drive the adiabatic elimination of
 * the coherences reproduces the 3x3 rate matrix and its z exactly; the
 * matrix with omega = R_rf is available as printed_coherent_generator.
 */
template <typename T>
SquareMatrix<T> coherent_generator(const RateParams& p, const std::array<T, 4>& x, double gamma_phi)
{
    return detail::bloch_generator(p, x, p.r_rf / std::numbers::sqrt2, gamma_phi);
}

/// Rate matrix with the literal drive entries -2R_rf, 2R_rf, R_rf, -R_rf. Its
/// coherence elimination gives 2z, not z; kept for diagnostics.
template <typename T>
SquareMatrix<T> printed_coherent_generator(const RateParams& p, const std::array<T, 4>& x, double gamma_phi)
{
    return detail::bloch_generator(p, x, p.r_rf, gamma_phi);
}

template <typename T>
SquareMatrix<T> incoherent_generator(const RateParams& p, const std::array<T, 4>& x)
{
    using std::exp;
    const double z = rabi_z(p);
    const std::size_t lu = index_of(Channel::left_up), ld = index_of(Channel::left_down);
    const std::size_t ru = index_of(Channel::right_up), rd = index_of(Channel::right_down);

    SquareMatrix<T> m(3);
    m(0, 0) = T(-p.gamma_up());
    m(0, 2) = T(p.gamma_l_down) * exp(x[ld]) + T(p.gamma_r_down) * exp(x[rd]);
    m(1, 0) = T(p.gamma_l_up) * exp(-x[lu]) + T(p.gamma_r_up) * exp(-x[ru]);
    m(1, 1) = T(-z);
    m(1, 2) = T(z);
    m(2, 1) = T(z);
    m(2, 2) = T(-z - p.gamma_down());
    return m;
}

/// Generator of a regime in counting exponents x (see detail::bloch_generator).
template <typename T>
SquareMatrix<T> regime_generator(Regime r, const RateParams& p, const std::array<T, 4>& x)
{
    switch (r) {
    case Regime::coherent: return coherent_generator(p, x, 0.0);
    case Regime::dephased: return coherent_generator(p, x, p.gamma_phi);
    case Regime::incoherent: return incoherent_generator(p, x);
    }
    throw InvalidParams("unknown regime");
}

inline Basis regime_basis(Regime r) { return r == Regime::incoherent ? Basis::incoherent3 : Basis::coherent5; }

/**
 * Sets d/dt Re rho_ud = d/dt Im rho_ud = 0 in a 5x5 generator, solves for the
 * coherences in terms of the populations and substitutes them back:
 *   M_red = A - D B^{-1} C
 * with A the population block, B the coherence block, C and D the couplings.
 */
template <typename T>
SquareMatrix<T> eliminate_coherence_block(const SquareMatrix<T>& m)
{
    if (m.dim() != 5) throw InvalidParams("coherence elimination needs a 5x5 generator");
    const T b00 = m(3, 3), b01 = m(3, 4), b10 = m(4, 3), b11 = m(4, 4);
    const T det = b00 * b11 - b01 * b10;
    using std::abs;
    const double scale = std::max({1.0, double(abs(b00)), double(abs(b01)), double(abs(b10)), double(abs(b11))});
    if (!(double(abs(det)) > 1e-14 * scale * scale))
        throw SingularCoherenceBlock("coherence block is singular (zero width and zero detuning)");
    // B^{-1}
    const std::array<std::array<T, 2>, 2> inv{{{b11 / det, -b01 / det}, {-b10 / det, b00 / det}}};

    SquareMatrix<T> r(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            T acc = m(i, j);
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) acc -= m(i, 3 + k) * inv[k][l] * m(3 + l, j);
            r(i, j) = acc;
        }
    return r;
}

// --- GeneratorMatrix front ends (counting fields chi, phases e^{+-i chi}) ---

inline GeneratorMatrix build_coherent(const RateParams& p, const CountingVector& chi)
{
    require_finite(p);
    require_finite(chi);
    return {Basis::coherent5, coherent_generator(p, detail::imaginary_exponents<cplx>(chi), p.gamma_phi)};
}

inline GeneratorMatrix build_coherent_printed(const RateParams& p, const CountingVector& chi)
{
    require_finite(p);
    require_finite(chi);
    return {Basis::coherent5, printed_coherent_generator(p, detail::imaginary_exponents<cplx>(chi), p.gamma_phi)};
}

inline GeneratorMatrix build_incoherent(const RateParams& p, const CountingVector& chi)
{
    require_finite(p);
    require_finite(chi);
    return {Basis::incoherent3, incoherent_generator(p, detail::imaginary_exponents<cplx>(chi))};
}

/// Adiabatic elimination of build_coherent(p, chi). Equals build_incoherent when gamma_phi = 0.
inline GeneratorMatrix eliminate_coherences(const RateParams& p, const CountingVector& chi)
{
    return {Basis::incoherent3, eliminate_coherence_block(build_coherent(p, chi).entries)};
}

inline GeneratorMatrix build_generator(Regime r, const RateParams& p, const CountingVector& chi)
{
    require_finite(p);
    require_finite(chi);
    return {regime_basis(r), regime_generator(r, p, detail::imaginary_exponents<cplx>(chi))};
}

// ---------------------------------------------------------------------------
// Stationary state
// ---------------------------------------------------------------------------

struct StateVector {
    Basis basis = Basis::incoherent3;
    std::vector<double> components;

    double rho_00() const { return components[0]; }
    double rho_up() const { return components[1]; }
    double rho_down() const { return components[2]; }
    double population_sum() const { return components[0] + components[1] + components[2]; }
};

/// Normalized null vector of a generator evaluated at zero counting fields.
inline StateVector stationary_state(const GeneratorMatrix& gen)
{
    const std::size_t n = gen.dim();
    Eigen::MatrixXd m(n, n);
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(gen(i, j)));
    if (scale == 0) throw NoNullVector("zero generator has no unique stationary state");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(gen(i, j).imag()) > 1e-12 * scale)
                throw InvalidParams("stationary_state expects a generator at zero counting fields");
            m(Eigen::Index(i), Eigen::Index(j)) = gen(i, j).real();
        }

    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        smallest = std::min(smallest, std::abs(es.eigenvalues()(k)));
    if (smallest > 1e-9 * scale) throw NoNullVector("generator has no zero eigenvalue");

    // Row 0 is linearly dependent on the other population rows; replace it by normalization.
    Eigen::MatrixXd a = m;
    a.row(0).setZero();
    a(0, 0) = a(0, 1) = a(0, 2) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(n));
    b(0) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw NoNullVector("stationary state is not unique");
    const Eigen::VectorXd rho = lu.solve(b);
    if ((m * rho).cwiseAbs().maxCoeff() > 1e-10 * scale) throw NoNullVector("null-vector residual too large");

    StateVector s{gen.basis, std::vector<double>(rho.data(), rho.data() + n)};
    return s;
}

} // namespace spinfcs

#endif // SPINFCS_MODEL_HPP
