#include <spinfcs/cgf.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace spinfcs;

namespace {

RateParams point(double r, double delta = 0) { return RateParams::symmetric(1.0, r, delta); }

CountingVector random_chi(std::mt19937_64& rng, double width = 3.0)
{
    std::uniform_real_distribution<double> u(-width, width);
    return {{u(rng), u(rng), u(rng), u(rng)}};
}

double poly_distance(const CharPoly& a, const CharPoly& b)
{
    double d = 0;
    for (std::size_t k = 0; k < a.coefficients.size(); ++k)
        d = std::max(d, std::abs(a.coefficients[k] - b.coefficients[k]));
    return d;
}

} // namespace

TEST(Cgf, CharPolyDegreeAndLeadingCoefficient)
{
    const auto q3 = char_poly(build_incoherent(point(0.5), {}));
    const auto q5 = char_poly(build_coherent(point(0.5), {}));
    ASSERT_EQ(q3.degree(), 3u);
    ASSERT_EQ(q5.degree(), 5u);
    EXPECT_EQ(q3.coefficients[3], cplx(-1));
    EXPECT_EQ(q5.coefficients[5], cplx(-1));
    EXPECT_LE(std::abs(q3.coefficients[0]), 1e-15);
    EXPECT_LE(std::abs(q5.coefficients[0]), 1e-15);
}

// det M = z (U D - G_up G_down) with U, D the dressed entry and exit sums
TEST(Cgf, IncoherentConstantTerm)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> g(0.1, 1.5);
    for (int k = 0; k < 25; ++k) {
        RateParams p{g(rng), g(rng), g(rng), g(rng), g(rng), g(rng) - 0.7, 0};
        const auto chi = random_chi(rng);
        const cplx u = p.gamma_l_up * std::exp(cplx(0, -chi[Channel::left_up])) +
                       p.gamma_r_up * std::exp(cplx(0, -chi[Channel::right_up]));
        const cplx d = p.gamma_l_down * std::exp(cplx(0, chi[Channel::left_down])) +
                       p.gamma_r_down * std::exp(cplx(0, chi[Channel::right_down]));
        const cplx expect = rabi_z(p) * (u * d - p.gamma_up() * p.gamma_down());
        EXPECT_NEAR(std::abs(char_poly(build_incoherent(p, chi)).coefficients[0] - expect), 0.0, 1e-13);
    }
}

TEST(Cgf, ConservationRoot)
{
    for (Regime r : {Regime::coherent, Regime::incoherent})
        for (double rr : {0.05, 0.5, 1.0, 3.0})
            EXPECT_LE(std::abs(dominant_eigenvalue(r, point(rr), CountingVector::zero()).lambda0), 1e-12);
}

TEST(Cgf, NoDriveMeansNoStatistics)
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k)
        EXPECT_LE(std::abs(dominant_eigenvalue(Regime::incoherent, point(0.0, 0.3), random_chi(rng)).lambda0), 1e-12);
}

TEST(Cgf, GaugeInvariance)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> c(-3, 3);
    for (Regime r : {Regime::coherent, Regime::incoherent})
        for (int k = 0; k < 20; ++k) {
            const auto chi = random_chi(rng);
            const auto p = point(0.7, 0.4);
            const double shift = c(rng);
            EXPECT_LE(poly_distance(char_poly(build_generator(r, p, chi)),
                                    char_poly(build_generator(r, p, chi + CountingVector::uniform(shift)))),
                      1e-12);
        }
}

TEST(Cgf, ConjugationAndMirrorSymmetry)
{
    std::mt19937_64 rng(13);
    for (Regime r : {Regime::coherent, Regime::incoherent})
        for (int k = 0; k < 5; ++k) {
            const auto chi = random_chi(rng, 0.8);
            const auto p = point(0.9);
            const cplx l = dominant_eigenvalue(r, p, chi).lambda0;
            EXPECT_NEAR(std::abs(dominant_eigenvalue(r, p, -chi).lambda0 - std::conj(l)), 0.0, 1e-11);
            CountingVector mirrored{{chi.chi[2], chi.chi[3], chi.chi[0], chi.chi[1]}};
            EXPECT_NEAR(std::abs(dominant_eigenvalue(r, p, mirrored).lambda0 - l), 0.0, 1e-11);
        }
}

TEST(Cgf, SmallFieldSlopeGivesCurrent)
{
    CountingVector chi;
    chi[Channel::left_down] = 1e-6;
    const cplx l = dominant_eigenvalue(Regime::incoherent, point(0.5), chi).lambda0;
    // lambda ~ i chi I with I = 1/14 for the down exit
    EXPECT_NEAR(l.imag() / 1e-6, 1.0 / 14, 1e-6);
}

TEST(Cgf, ContinuationErrors)
{
    ContinuationOptions opt;
    auto no_zero = [](const CountingVector&) { return std::vector<cplx>{1.0, 2.0}; };
    EXPECT_THROW(continue_branch(no_zero, CountingVector::uniform(1.0), opt), NoNullVector);
    auto double_zero = [](const CountingVector&) { return std::vector<cplx>{0.0, 0.0}; };
    EXPECT_THROW(continue_branch(double_zero, CountingVector::uniform(1.0), opt), DegenerateBranch);
    // square-root branch point at t = 0.5
    auto branch_point = [](const CountingVector& c) {
        const cplx s = std::sqrt(cplx(0.5 - c.chi[0]));
        const double s0 = std::sqrt(0.5);
        return std::vector<cplx>{s - s0, -s - s0};
    };
    CountingVector target;
    target.chi[0] = 1.0;
    EXPECT_THROW(continue_branch(branch_point, target, opt), BranchCrossing);
    // transversal crossing is followed
    auto lines = [](const CountingVector& c) { return std::vector<cplx>{c.chi[0], 1.0 - c.chi[0]}; };
    EXPECT_NEAR(std::abs(continue_branch(lines, target, opt) - 1.0), 0.0, 1e-15);
}

TEST(Cgf, PrintedCoefficientsExample)
{
    const auto pc = coefficients_abcd(point(0.5), CountingVector::zero());
    EXPECT_NEAR(std::abs(pc.coefficients.a - cplx(-2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(pc.coefficients.d), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(pc.x, 0.25);
    RateParams uneven = point(0.5);
    uneven.gamma_r_up = 0.3;
    EXPECT_THROW(coefficients_abcd(uneven, {}), UnequalCouplings);
}

TEST(Cgf, ExactCubicInPrintedNormalization)
{
    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k) {
        const auto p = point(0.3 + 0.2 * k, 0.1 * k - 0.4);
        const auto chi = random_chi(rng);
        const auto e = exact_cubic_printed_normalization(p, chi);
        const auto pc = coefficients_abcd(p, chi);
        const double g = 1.0, d2 = p.delta_esr * p.delta_esr, r2 = p.r_rf * p.r_rf;
        EXPECT_NEAR(std::abs(e.d - pc.coefficients.d), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(e.a - 4 * (d2 + g * g)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(e.b - (8 * g * (d2 + g * g) + 8 * r2 * g)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(e.c - (4 * g * g * (d2 + g * g) + 12 * r2 * g * g)), 0.0, 1e-12);
    }
}

TEST(Cgf, CardanoMatchesCompanion)
{
    std::mt19937_64 rng(19);
    for (int k = 0; k < 20; ++k) {
        const auto m = exact_monic_cubic(point(0.2 + 0.1 * k), random_chi(rng));
        const auto br = cardano_branches(m.a, m.b, m.c, m.d);
        ASSERT_TRUE(br.has_value());
        for (const cplx& r : *br) EXPECT_LE(std::abs(((r + m.b) * r + m.c) * r + m.d), 1e-10);
    }
}

TEST(Cgf, ClosedFormCorrectedAndVerbatim)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.05, 3.0), dl(-2.0, 2.0);
    double worst_verbatim = 0;
    for (int k = 0; k < 20; ++k) {
        const auto p = point(u(rng), dl(rng));
        const auto chi = random_chi(rng, 1.5);
        const auto fixed = closed_form_incoherent_ev0(p, chi, true);
        EXPECT_LE(fixed.deviation, 1e-9);
        const auto verbatim = closed_form_incoherent_ev0(p, chi, false);
        worst_verbatim = std::max(worst_verbatim, verbatim.deviation);
    }
    EXPECT_GT(worst_verbatim, 1e-3);
    EXPECT_LE(std::abs(closed_form_incoherent_ev0(point(0.5), {}, true).value.lambda0), 1e-12);
}

TEST(Cgf, RootResidual)
{
    const auto p = point(1.3, 0.2);
    CountingVector chi{{0.4, -0.9, 0.1, 1.2}};
    for (Regime r : {Regime::coherent, Regime::incoherent}) {
        const auto q = char_poly(build_generator(r, p, chi));
        const cplx l = dominant_eigenvalue(r, p, chi).lambda0;
        EXPECT_LE(std::abs(q(l)), 1e-12 * q.max_abs_coefficient());
    }
}

TEST(Cgf, LeadingRootNearZeroField)
{
    CountingVector chi;
    chi[Channel::left_up] = 0.01;
    const auto p = point(0.5);
    EXPECT_NEAR(std::abs(leading_root(build_incoherent(p, chi)) - dominant_eigenvalue(Regime::incoherent, p, chi).lambda0),
                0.0, 1e-13);
}
