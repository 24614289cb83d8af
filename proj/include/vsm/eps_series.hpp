#pragma once

// Truncated power series in eps with normalized coefficients
// c_i = d^i/d eps^i (.) at eps = 0, divided by i!.

#include "vsm/errors.hpp"
#include "vsm/fields.hpp"

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace vsm {

// Payload hooks ------------------------------------------------------------

inline double zero_like(double) { return 0.0; }
inline GridFn2D zero_like(const GridFn2D& f) { return GridFn2D(f.grid_ptr()); }
inline GridFn1D zero_like(const GridFn1D& f) { return GridFn1D(f.grid_ptr()); }
inline TripleY zero_like(const TripleY& y) { return TripleY::zeros(y.theta.grid_ptr()); }

inline bool same_shape(double, double) { return true; }
inline bool same_shape(const GridFn2D& a, const GridFn2D& b) {
    return a.values().rows() == b.values().rows() && a.values().cols() == b.values().cols();
}
inline bool same_shape(const GridFn1D& a, const GridFn1D& b) { return a.values().size() == b.values().size(); }
inline bool same_shape(const TripleY& a, const TripleY& b) {
    return same_shape(a.theta, b.theta) && same_shape(a.psi, b.psi) && same_shape(a.lambda, b.lambda);
}

/// Plain discrete L2 size used by the tail diagnostic.
inline double payload_norm(double v) { return std::abs(v); }
inline double payload_norm(const GridFn2D& f) { return weighted_norm(f, 0, 0); }
inline double payload_norm(const GridFn1D& f) { return weighted_norm(f, 0, 0); }
inline double payload_norm(const TripleY& y) {
    const double a = payload_norm(y.theta), b = payload_norm(y.psi), c = payload_norm(y.lambda);
    return std::sqrt(a * a + b * b + c * c);
}

template <class T>
concept SeriesPayload = requires(T a, const T& b, double s) {
    { a += b } -> std::same_as<T&>;
    { a *= s } -> std::same_as<T&>;
    { zero_like(b) } -> std::convertible_to<T>;
    { same_shape(b, b) } -> std::convertible_to<bool>;
    { payload_norm(b) } -> std::convertible_to<double>;
};

template <class T>
concept MultipliablePayload = SeriesPayload<T> && requires(const T& a, const T& b) {
    { a * b } -> std::convertible_to<T>;
};

// --------------------------------------------------------------------------

template <SeriesPayload T>
class EpsSeries {
public:
    EpsSeries() = default;
    explicit EpsSeries(std::vector<T> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) throw DomainError("EpsSeries needs at least one coefficient");
        for (std::size_t i = 1; i < c_.size(); ++i)
            if (!same_shape(c_[0], c_[i])) throw DomainError("EpsSeries coefficients differ in shape");
    }

    static EpsSeries zeros(std::size_t order, const T& like) {
        return EpsSeries(std::vector<T>(order + 1, zero_like(like)));
    }

    std::size_t order() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }
    const T& operator[](std::size_t i) const { return c_.at(i); }
    T& operator[](std::size_t i) { return c_.at(i); }
    const std::vector<T>& coeffs() const noexcept { return c_; }

    /// First M+1 coefficients.
    EpsSeries truncated(std::size_t m) const {
        if (m > order()) throw DomainError("cannot truncate a series above its order");
        return EpsSeries(std::vector<T>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(m) + 1));
    }

private:
    std::vector<T> c_;
};

template <SeriesPayload T>
struct Evaluated {
    T value;
    bool out_of_range = false;
};

/// Horner summation; the flag is set when |eps| exceeds eps_max.
template <SeriesPayload T>
Evaluated<T> evaluate(const EpsSeries<T>& s, double eps,
                      double eps_max = std::numeric_limits<double>::infinity()) {
    T v = s[s.order()];
    for (std::size_t i = s.order(); i-- > 0;) {
        v *= eps;
        v += s[i];
    }
    return Evaluated<T>{std::move(v), std::abs(eps) > eps_max};
}

/// Cauchy product truncated at min(M_a, M_b).
template <MultipliablePayload T>
EpsSeries<T> series_product(const EpsSeries<T>& a, const EpsSeries<T>& b) {
    if (!same_shape(a[0], b[0])) throw DomainError("series_product: shape mismatch");
    const std::size_t m = std::min(a.order(), b.order());
    std::vector<T> out;
    out.reserve(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        T acc = a[0] * b[k];
        for (std::size_t j = 1; j <= k; ++j) acc += a[j] * b[k - j];
        out.push_back(std::move(acc));
    }
    return EpsSeries<T>(std::move(out));
}

/// d/d eps in the normalized convention: coefficient k is (k+1) c_{k+1}; order drops by one.
template <SeriesPayload T>
EpsSeries<T> derivative(const EpsSeries<T>& s) {
    if (s.order() == 0) return EpsSeries<T>::zeros(0, s[0]);
    std::vector<T> out;
    out.reserve(s.order());
    for (std::size_t k = 0; k < s.order(); ++k) {
        T c = s[k + 1];
        c *= static_cast<double>(k + 1);
        out.push_back(std::move(c));
    }
    return EpsSeries<T>(std::move(out));
}

/// ||c_M|| eps^M / max(||sum c_i eps^i||, floor).
template <SeriesPayload T>
double tail_ratio(const EpsSeries<T>& s, double eps, double floor = 1e-300) {
    const double top = payload_norm(s[s.order()]) * std::pow(std::abs(eps), static_cast<double>(s.order()));
    if (top == 0.0) return 0.0;
    const double total = payload_norm(evaluate(s, eps).value);
    return top / std::max(total, floor);
}

template <SeriesPayload T>
struct CosSin {
    EpsSeries<T> cos;
    EpsSeries<T> sin;
};

/// cos and sin of base + theta(eps) as series, from the recurrences
/// (k+1) cos_{k+1} = -sum_j (j+1) theta_{j+1} sin_{k-j},
/// (k+1) sin_{k+1} =  sum_j (j+1) theta_{j+1} cos_{k-j}.
CosSin<double> cos_sin_series(const EpsSeries<double>& theta, double base);
CosSin<GridFn2D> cos_sin_series(const EpsSeries<GridFn2D>& theta, const GridFn2D& base);

}  // namespace vsm
