#ifndef SPINFCS_TRAJECTORY_HPP
#define SPINFCS_TRAJECTORY_HPP

#include <spinfcs/cumulants.hpp>
#include <spinfcs/errors.hpp>
#include <spinfcs/model.hpp>
#include <spinfcs/parallel.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spinfcs {

struct TrajectoryConfig {
    double t_final = 1e4; ///< in units of 1/Gamma
    std::size_t n_trajectories = 10000;
    std::uint64_t seed = 1;
    Regime regime = Regime::incoherent;
    unsigned threads = 1;
};

/// Net transfers per channel (L_up, L_down, R_up, R_down); spin-up entries count -1, spin-down exits +1.
struct CountSample {
    std::array<std::int64_t, 4> n{};

    /// (spin-up electrons entered) - (spin-down electrons exited); always in {-1, 0, 1}.
    std::int64_t occupancy_change() const { return -(n[0] + n[2]) - (n[1] + n[3]); }

    friend bool operator==(const CountSample&, const CountSample&) = default;
};

enum class DotState : std::uint8_t { empty = 0, up = 1, down = 2 };

/// Independent stream per (seed, trajectory index).
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                          std::uint32_t(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential variate with the given rate (> 0).
    double exponential(double rate)
    {
        // (k + 0.5) 2^-53 is never 0 or 1
        const double u = (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return -std::log(u) / rate;
    }

private:
    std::mt19937_64 engine_;
};

/**
 * Jump process of the 3-state sequential rate matrix:
 *   empty -> up   at G_{eta up}   (channel (eta, up) counts -1)
 *   up   <-> down at z            (not counted)
 *   down -> empty at G_{eta down} (channel (eta, down) counts +1)
 */
class IncoherentChain {
public:
    struct Jump {
        DotState to;
        int channel; ///< -1 when the transition is not counted
        int delta;
    };

    explicit IncoherentChain(const RateParams& p) : p_(p), z_(rabi_z(p)) {}

    double z() const { return z_; }

    double exit_rate(DotState s) const
    {
        switch (s) {
        case DotState::empty: return p_.gamma_up();
        case DotState::up: return z_;
        case DotState::down: return z_ + p_.gamma_down();
        }
        return 0;
    }

    /// Picks the transition out of s; u is uniform on [0, 1).
    Jump choose(DotState s, double u) const
    {
        const double target = u * exit_rate(s);
        switch (s) {
        case DotState::empty:
            if (target < p_.gamma_l_up) return {DotState::up, int(index_of(Channel::left_up)), -1};
            return {DotState::up, int(index_of(Channel::right_up)), -1};
        case DotState::up: return {DotState::down, -1, 0};
        case DotState::down:
            if (target < z_) return {DotState::up, -1, 0};
            if (target < z_ + p_.gamma_l_down) return {DotState::empty, int(index_of(Channel::left_down)), +1};
            return {DotState::empty, int(index_of(Channel::right_down)), +1};
        }
        return {s, -1, 0};
    }

private:
    RateParams p_;
    double z_;
};

/// Warnings when t_final is too short for long-time statistics.
inline std::vector<std::string> config_warnings(const RateParams& p, const TrajectoryConfig& cfg)
{
    std::vector<std::string> w;
    double min_rate = std::numeric_limits<double>::infinity();
    for (double r : {p.gamma_l_up, p.gamma_l_down, p.gamma_r_up, p.gamma_r_down, rabi_z(p)})
        if (r > 0) min_rate = std::min(min_rate, r);
    if (std::isfinite(min_rate) && cfg.t_final * min_rate < 50)
        w.push_back("fewer than 50 expected events of the slowest transition per trajectory");
    return w;
}

/// One trajectory of length t_final started from populations `initial`.
inline CountSample simulate_trajectory(const IncoherentChain& chain, const std::array<double, 3>& initial,
                                       double t_final, TrajectoryRng& rng)
{
    CountSample out;
    const double u0 = rng.uniform();
    DotState s = u0 < initial[0] ? DotState::empty : (u0 < initial[0] + initial[1] ? DotState::up : DotState::down);
    double t = 0;
    for (;;) {
        const double rate = chain.exit_rate(s);
        if (!(rate > 0)) break; // absorbing state: counts frozen
        t += rng.exponential(rate);
        if (t > t_final) break;
        const auto jump = chain.choose(s, rng.uniform());
        if (jump.channel >= 0) out.n[std::size_t(jump.channel)] += jump.delta;
        s = jump.to;
    }
    return out;
}

/// Gillespie sampling of the incoherent regime; deterministic for a given seed and any thread count.
inline std::vector<CountSample> simulate(const RateParams& params, const TrajectoryConfig& cfg)
{
    if (cfg.regime != Regime::incoherent) throw WrongRegime("trajectory sampling covers the incoherent regime only");
    if (cfg.n_trajectories == 0) throw InvalidParams("n_trajectories must be positive");
    if (!(cfg.t_final > 0) || !std::isfinite(cfg.t_final)) throw InvalidParams("t_final must be positive");
    const IncoherentChain chain(params);
    const StateVector st = stationary_state(build_incoherent(params, CountingVector::zero()));
    const std::array<double, 3> initial{std::max(0.0, st.rho_00()), std::max(0.0, st.rho_up()),
                                        std::max(0.0, st.rho_down())};

    std::vector<CountSample> samples(cfg.n_trajectories);
    parallel_for(cfg.n_trajectories, cfg.threads, [&](std::size_t i) {
        TrajectoryRng rng(cfg.seed, i);
        samples[i] = simulate_trajectory(chain, initial, cfg.t_final, rng);
    });
    return samples;
}

/// Tab-separated dump: header, then one line per trajectory (index, n_L_up, n_L_down, n_R_up, n_R_down).
inline void write_samples(std::ostream& os, std::span<const CountSample> samples)
{
    os << "trajectory\tn_L_up\tn_L_down\tn_R_up\tn_R_down\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& n = samples[i].n;
        os << i << '\t' << n[0] << '\t' << n[1] << '\t' << n[2] << '\t' << n[3] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

struct EmpiricalCumulants {
    CumulantSet estimate;
    CumulantSet standard_error; ///< delete-one jackknife, same layout as estimate
    std::size_t samples = 0;
    double t_final = 0;
};

namespace detail {

// Power sums of counts shifted by a fixed reference point.
struct MomentSums {
    std::size_t n = 0;
    std::array<long double, 4> s1{};
    std::array<long double, 16> s2{};
    std::array<long double, 64> s3{};

    void add(const std::array<double, 4>& y, long double w)
    {
        for (std::size_t a = 0; a < 4; ++a) {
            s1[a] += w * y[a];
            for (std::size_t b = 0; b < 4; ++b) {
                s2[a * 4 + b] += w * y[a] * y[b];
                for (std::size_t c = 0; c < 4; ++c) s3[a * 16 + b * 4 + c] += w * y[a] * y[b] * y[c];
            }
        }
    }
};

inline CumulantSet cumulants_from_sums(const MomentSums& m, const std::array<double, 4>& shift, double t_final)
{
    const long double n = static_cast<long double>(m.n);
    std::array<long double, 4> mu{};
    std::array<long double, 16> e2{};
    for (std::size_t a = 0; a < 4; ++a) mu[a] = m.s1[a] / n;
    for (std::size_t k = 0; k < 16; ++k) e2[k] = m.s2[k] / n;

    CumulantSet cs;
    for (std::size_t a = 0; a < 4; ++a) {
        cs.first[a] = double((mu[a] + shift[a]) / t_final);
        for (std::size_t b = 0; b < 4; ++b) {
            cs.second[a * 4 + b] = double((e2[a * 4 + b] - mu[a] * mu[b]) / t_final);
            for (std::size_t c = 0; c < 4; ++c) {
                const long double e3 = m.s3[a * 16 + b * 4 + c] / n;
                const long double k3 = e3 - e2[a * 4 + b] * mu[c] - e2[a * 4 + c] * mu[b] - e2[b * 4 + c] * mu[a] +
                                       2 * mu[a] * mu[b] * mu[c];
                cs.third[a * 16 + b * 4 + c] = double(k3 / t_final);
            }
        }
    }
    derive_combinations(cs);
    return cs;
}

} // namespace detail

/**
 * Long-time cumulant estimates k1 = mean/T, k2 = cov/T, k3 = third central
 * comoment/T from single-window counts, with delete-one jackknife standard
 * errors over trajectories.
 */
inline EmpiricalCumulants empirical_cumulants(std::span<const CountSample> samples, double t_final)
{
    if (samples.size() < 100) throw InsufficientSamples("empirical_cumulants needs at least 100 samples");
    if (!(t_final > 0)) throw InvalidParams("t_final must be positive");
    const std::size_t n = samples.size();

    std::array<double, 4> shift{};
    for (const auto& s : samples)
        for (std::size_t a = 0; a < 4; ++a) shift[a] += double(s.n[a]);
    for (auto& x : shift) x = std::round(x / double(n));

    auto centered = [&](const CountSample& s) {
        std::array<double, 4> y;
        for (std::size_t a = 0; a < 4; ++a) y[a] = double(s.n[a]) - shift[a];
        return y;
    };

    detail::MomentSums total;
    total.n = n;
    for (const auto& s : samples) total.add(centered(s), 1.0L);

    EmpiricalCumulants out;
    out.samples = n;
    out.t_final = t_final;
    out.estimate = detail::cumulants_from_sums(total, shift, t_final);

    const auto full = out.estimate.flatten();
    std::array<long double, CumulantSet::flat_size> sum_d{}, sum_d2{};
    for (const auto& s : samples) {
        detail::MomentSums loo = total;
        loo.n = n - 1;
        loo.add(centered(s), -1.0L);
        const auto rep = detail::cumulants_from_sums(loo, shift, t_final).flatten();
        for (std::size_t k = 0; k < rep.size(); ++k) {
            const long double d = (long double)rep[k] - full[k];
            sum_d[k] += d;
            sum_d2[k] += d * d;
        }
    }
    std::array<double, CumulantSet::flat_size> se{};
    const long double nn = static_cast<long double>(n);
    for (std::size_t k = 0; k < se.size(); ++k) {
        const long double var = (sum_d2[k] - sum_d[k] * sum_d[k] / nn) * (nn - 1) / nn;
        se[k] = double(std::sqrt(std::max(0.0L, var)));
    }
    out.standard_error = CumulantSet::unflatten(se);
    return out;
}

} // namespace spinfcs

#endif // SPINFCS_TRAJECTORY_HPP
