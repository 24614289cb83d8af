#include "vsm/eps_series.hpp"

namespace vsm {

namespace {

// The recurrence works the same on doubles and on whole arrays.
template <class A>
void cos_sin_recurrence(const std::vector<const A*>& theta, std::vector<A>& c, std::vector<A>& s) {
    const std::size_t m = theta.size() - 1;
    for (std::size_t k = 0; k < m; ++k) {
        A cs = (*theta[1]) * s[k] * 0.0;
        A sn = cs;
        for (std::size_t j = 0; j <= k; ++j) {
            const double f = static_cast<double>(j + 1);
            cs = cs - f * (*theta[j + 1]) * s[k - j];
            sn = sn + f * (*theta[j + 1]) * c[k - j];
        }
        c.push_back(cs / static_cast<double>(k + 1));
        s.push_back(sn / static_cast<double>(k + 1));
    }
}

}  // namespace

CosSin<double> cos_sin_series(const EpsSeries<double>& theta, double base) {
    std::vector<const double*> t;
    for (const double& v : theta.coeffs()) t.push_back(&v);
    std::vector<double> c{std::cos(base + theta[0])};
    std::vector<double> s{std::sin(base + theta[0])};
    if (theta.order() > 0) cos_sin_recurrence(t, c, s);
    return {EpsSeries<double>(std::move(c)), EpsSeries<double>(std::move(s))};
}

CosSin<GridFn2D> cos_sin_series(const EpsSeries<GridFn2D>& theta, const GridFn2D& base) {
    if (!same_shape(theta[0], base)) throw DomainError("cos_sin_series: shape mismatch");
    std::vector<const Array2D*> t;
    for (const GridFn2D& v : theta.coeffs()) t.push_back(&v.values());
    const Array2D full = base.values() + theta[0].values();
    std::vector<Array2D> c{full.cos()};
    std::vector<Array2D> s{full.sin()};
    if (theta.order() > 0) cos_sin_recurrence(t, c, s);
    std::vector<GridFn2D> cc, ss;
    for (auto& a : c) cc.emplace_back(base.grid_ptr(), std::move(a));
    for (auto& a : s) ss.emplace_back(base.grid_ptr(), std::move(a));
    return {EpsSeries<GridFn2D>(std::move(cc)), EpsSeries<GridFn2D>(std::move(ss))};
}

}  // namespace vsm
