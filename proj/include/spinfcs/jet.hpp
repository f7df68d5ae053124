#ifndef SPINFCS_JET_HPP
#define SPINFCS_JET_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace spinfcs {

/**
 * Truncated multivariate Taylor number in N independent nilpotent directions
 * (eps_j^2 = 0). Component k holds the coefficient of prod_{j in k} eps_j, so
 * the last component of f(x + eps_1 + ... + eps_N) is the mixed partial
 * d^N f / dx_1 ... dx_N, exact up to rounding.
 *
 * Repeating a variable in several directions yields higher pure derivatives,
 * e.g. f(x + eps_1 + eps_2) carries f''(x) in component 0b11.
 */
template <typename T, int N>
class Jet {
    static_assert(N >= 0 && N <= 3, "jets are used up to third order");

public:
    static constexpr std::size_t size = std::size_t{1} << N;
    static constexpr std::size_t full_mask = size - 1;

    constexpr Jet() : c_{} {}
    constexpr Jet(T value) : c_{} { c_[0] = value; } // NOLINT(implicit)

    /// Seed for direction j: value v, unit coefficient on eps_j.
    static constexpr Jet variable(T value, int direction)
    {
        Jet j(value);
        j.c_[std::size_t{1} << direction] = T(1);
        return j;
    }

    constexpr const T& value() const { return c_[0]; }
    constexpr const T& operator[](std::size_t mask) const { return c_[mask]; }
    constexpr T& operator[](std::size_t mask) { return c_[mask]; }

    Jet& operator+=(const Jet& o)
    {
        for (std::size_t k = 0; k < size; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (std::size_t k = 0; k < size; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }
    Jet& operator/=(const Jet& o) { return *this = *this / o; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a)
    {
        for (auto& x : a.c_) x = -x;
        return a;
    }

    // Subset convolution over the direction bitmask.
    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r;
        for (std::size_t m = 0; m < size; ++m) {
            T acc{};
            for (std::size_t sub = m;; sub = (sub - 1) & m) {
                acc += a.c_[sub] * b.c_[m ^ sub];
                if (sub == 0) break;
            }
            r.c_[m] = acc;
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

    friend Jet reciprocal(const Jet& b)
    {
        // 1/(b0 + n) = (1/b0) * sum_k (-n/b0)^k, terminating at k = N.
        const T inv0 = T(1) / b.c_[0];
        Jet q = b * Jet(inv0);
        q.c_[0] = T(0);
        Jet term(T(1));
        Jet sum(T(1));
        for (int k = 1; k <= N; ++k) {
            term = term * -q;
            sum += term;
        }
        return sum * Jet(inv0);
    }

    friend Jet exp(const Jet& a)
    {
        using std::exp;
        Jet nil = a;
        nil.c_[0] = T(0);
        Jet term(T(1));
        Jet sum(T(1));
        for (int k = 1; k <= N; ++k) {
            term = term * nil * Jet(T(1) / T(k));
            sum += term;
        }
        return sum * Jet(T(exp(a.c_[0])));
    }

private:
    std::array<T, size> c_;
};

} // namespace spinfcs

#endif // SPINFCS_JET_HPP
