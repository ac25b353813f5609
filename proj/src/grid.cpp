#include "sja/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sja {

EnergyGrid EnergyGrid::from_range(double lo, double hi, int n_e) {
    if (n_e < 1) throw std::invalid_argument("EnergyGrid: n_e must be >= 1");
    if (!(hi > lo)) throw std::invalid_argument("EnergyGrid: need hi > lo");
    EnergyGrid g;
    g.e_min = lo;
    g.n_e = n_e;
    g.de = (hi - lo) / n_e;
    return g;
}

EnergyGrid EnergyGrid::from_energies(std::span<const double> energies, int n_e,
                                     double pad_frac) {
    if (energies.empty()) throw std::invalid_argument("EnergyGrid: no energies");
    auto [mn, mx] = std::minmax_element(energies.begin(), energies.end());
    double lo = *mn, hi = *mx;
    double w = hi - lo;
    if (w <= 0) w = std::max(1.0, std::abs(lo));  // all-degenerate spectrum
    double pad = pad_frac * w;
    if (pad <= 0) pad = 1e-12;
    return from_range(lo - pad, hi + pad, n_e);
}

int EnergyGrid::e_bin(double e) const {
    int i = int(std::floor((e - e_min) / de));
    return std::clamp(i, 0, n_e - 1);
}

int EnergyGrid::omega_bin(double w) const {
    int m = int(std::lround(w / de));
    return std::clamp(m, -m_max(), m_max());
}

double Field1::sample(double e) const {
    if (v.empty()) return 0.0;
    double x = (e - g.e_min) / g.de - 0.5;  // in units of bins, 0 at first center
    if (x <= 0) return v.front();
    if (x >= g.n_e - 1) return v.back();
    int i = int(std::floor(x));
    double f = x - i;
    return (1 - f) * v[i] + f * v[i + 1];
}

double Field1::integral() const {
    double s = 0;
    for (double x : v) s += x;
    return s * g.de;
}

double Field2::sample(double e, double w) const {
    if (v.empty()) return 0.0;
    double x = (e - g.e_min) / g.de - 0.5;
    double y = w / g.de + g.m_max();
    x = std::clamp(x, 0.0, double(g.n_e - 1));
    y = std::clamp(y, 0.0, double(g.n_omega() - 1));
    int i = std::min(int(x), g.n_e - 2 >= 0 ? g.n_e - 2 : 0);
    int jm = std::min(int(y), g.n_omega() - 2 >= 0 ? g.n_omega() - 2 : 0);
    double fx = x - i, fy = y - jm;
    if (g.n_e == 1) { i = 0; fx = 0; }
    if (g.n_omega() == 1) { jm = 0; fy = 0; }
    auto val = [&](int ii, int mm) { return v[size_t(ii) * g.n_omega() + mm]; };
    double v00 = val(i, jm);
    double v10 = (i + 1 < g.n_e) ? val(i + 1, jm) : v00;
    double v01 = (jm + 1 < g.n_omega()) ? val(i, jm + 1) : v00;
    double v11 = (i + 1 < g.n_e && jm + 1 < g.n_omega()) ? val(i + 1, jm + 1) : v10;
    return (1 - fx) * ((1 - fy) * v00 + fy * v01) + fx * ((1 - fy) * v10 + fy * v11);
}

double Field2::integral() const {
    double s = 0;
    for (double x : v) s += x;
    return s * g.de * g.de;
}

double Field2::max_abs() const {
    double s = 0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double rel_l2_distance(const Field2& a, const Field2& b) {
    if (a.v.size() != b.v.size())
        throw std::invalid_argument("rel_l2_distance: mismatched grids");
    double num = 0, den = 0;
    for (size_t k = 0; k < a.v.size(); ++k) {
        double d = a.v[k] - b.v[k];
        num += d * d;
        den += 0.5 * (a.v[k] * a.v[k] + b.v[k] * b.v[k]);
    }
    if (den == 0) return 0.0;
    return std::sqrt(num / den);
}

} // namespace sja
