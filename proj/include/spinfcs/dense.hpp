#ifndef SPINFCS_DENSE_HPP
#define SPINFCS_DENSE_HPP

#include <cassert>
#include <cstddef>
#include <utility>
#include <vector>

namespace spinfcs {

/// Small dense row-major square matrix over an arbitrary ring-like scalar.
template <typename T>
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, T(0)) {}

    static SquareMatrix identity(std::size_t n)
    {
        SquareMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t dim() const { return n_; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    T trace() const
    {
        T t(0);
        for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    friend SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y)
    {
        assert(x.n_ == y.n_);
        SquareMatrix r(x.n_);
        for (std::size_t i = 0; i < x.n_; ++i)
            for (std::size_t k = 0; k < x.n_; ++k) {
                const T& xik = x(i, k);
                for (std::size_t j = 0; j < x.n_; ++j) r(i, j) += xik * y(k, j);
            }
        return r;
    }

    template <typename F>
    auto map(F f) const -> SquareMatrix<decltype(f(std::declval<T>()))>
    {
        SquareMatrix<decltype(f(std::declval<T>()))> r(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) r(i, j) = f((*this)(i, j));
        return r;
    }

private:
    std::size_t n_ = 0;
    std::vector<T> a_;
};

/**
 * Coefficients of det(A - lambda I), constant term first, via the
 * Faddeev-LeVerrier recursion. Only ring operations and division by small
 * integers are used, so the result is exact for jet and extended-precision
 * scalars as well. Leading coefficient is (-1)^n.
 */
template <typename T>
std::vector<T> characteristic_coefficients(const SquareMatrix<T>& a)
{
    const std::size_t n = a.dim();
    // c[k]: coefficient of lambda^k in det(lambda I - A)
    std::vector<T> c(n + 1, T(0));
    c[n] = T(1);
    SquareMatrix<T> m(n);
    for (std::size_t k = 1; k <= n; ++k) {
        SquareMatrix<T> next = a * m;
        for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
        m = std::move(next);
        c[n - k] = -(a * m).trace() / T(double(k));
    }
    if (n % 2 == 1)
        for (auto& x : c) x = -x;
    return c;
}

} // namespace spinfcs

#endif // SPINFCS_DENSE_HPP
