#include "sja/eth_extract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sja {

namespace {

// shared smoothing core; level_weights == nullptr means unit weight per level
Field1 kde_density(std::span<const double> energies, const double* level_weights,
                   const EnergyGrid& grid, double bandwidth, const char* who) {
    if (energies.empty()) throw std::invalid_argument(std::string(who) + ": no energies");
    const size_t n = energies.size();
    if (bandwidth <= 0) {
        auto [mn, mx] = std::minmax_element(energies.begin(), energies.end());
        bandwidth = (n > 1) ? 2.0 * (*mx - *mn) / double(n - 1) : grid.de;
        if (bandwidth <= 0) bandwidth = grid.de;
    }
    Field1 nu(grid);
    const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    const int reach = std::max(1, int(std::ceil(4.0 * bandwidth / grid.de)) + 1);
    std::vector<double> wbuf(2 * reach + 1);
    double total = 0.0;
    for (size_t li = 0; li < n; ++li) {
        double e = energies[li];
        double lw = level_weights ? level_weights[li] : 1.0;
        total += lw;
        int c = grid.e_bin(e);
        int lo = std::max(0, c - reach), hi = std::min(grid.n_e - 1, c + reach);
        // exponents are shifted by the smallest one so narrow bandwidths
        // cannot underflow every weight to zero
        double dmin2 = 1e300;
        for (int b = lo; b <= hi; ++b) {
            double d = grid.e_center(b) - e;
            wbuf[b - lo] = d * d;
            dmin2 = std::min(dmin2, d * d);
        }
        double tot = 0;
        for (int b = lo; b <= hi; ++b) {
            double w = std::exp(-(wbuf[b - lo] - dmin2) * inv2s2);
            wbuf[b - lo] = w;
            tot += w;
        }
        for (int b = lo; b <= hi; ++b) nu.v[b] += lw * wbuf[b - lo] / (tot * grid.de);
    }
    if (!(total > 0))
        throw std::invalid_argument(std::string(who) + ": weights sum to zero");
    // guard against exactly-empty interior bins, then restore the total mass
    const double floor = 1e-12 * total / (grid.n_e * grid.de);
    for (double& x : nu.v) x = std::max(x, floor);
    double scale = total / nu.integral();
    for (double& x : nu.v) x *= scale;
    return nu;
}

} // namespace

Field1 estimate_dos(std::span<const double> energies, const EnergyGrid& grid,
                    double bandwidth) {
    return kde_density(energies, nullptr, grid, bandwidth, "estimate_dos");
}

Field1 estimate_weighted_density(std::span<const double> energies,
                                 std::span<const double> weights, const EnergyGrid& grid,
                                 double bandwidth) {
    if (weights.size() != energies.size())
        throw std::invalid_argument("estimate_weighted_density: size mismatch");
    return kde_density(energies, weights.data(), grid, bandwidth,
                       "estimate_weighted_density");
}

std::vector<std::pair<double, double>> extract_diagonal(std::span<const double> values,
                                                        std::span<const double> energies,
                                                        int n_bin, bool density) {
    if (values.size() != energies.size())
        throw std::invalid_argument("extract_diagonal: size mismatch");
    if (n_bin < 1) throw std::invalid_argument("extract_diagonal: n_bin must be >= 1");
    const int n = int(values.size());
    std::vector<std::pair<double, double>> out;
    for (int start = 0; start < n; start += n_bin) {
        int stop = std::min(start + n_bin, n);
        double esum = 0, vsum = 0;
        for (int i = start; i < stop; ++i) {
            esum += energies[i];
            vsum += values[i];
        }
        int count = stop - start;
        double e_mid = esum / count;
        if (!density) {
            out.emplace_back(e_mid, vsum / count);
            continue;
        }
        // group width from midpoints to the neighboring groups
        double lo = (start > 0) ? 0.5 * (energies[start - 1] + energies[start])
                                : energies[start] - 0.5 * (energies[std::min(start + 1, n - 1)] -
                                                           energies[start]);
        double hi = (stop < n) ? 0.5 * (energies[stop - 1] + energies[stop])
                               : energies[stop - 1] +
                                     0.5 * (energies[stop - 1] - energies[std::max(stop - 2, 0)]);
        double width = hi - lo;
        if (width <= 0) width = 1e-300;  // degenerate cluster
        out.emplace_back(e_mid, vsum / width);
    }
    return out;
}

Field1 diag_density_to_grid(std::span<const double> weights,
                            std::span<const double> energies, const EnergyGrid& grid) {
    if (weights.size() != energies.size())
        throw std::invalid_argument("diag_density_to_grid: size mismatch");
    Field1 f(grid);
    for (size_t i = 0; i < weights.size(); ++i)
        f.v[grid.e_bin(energies[i])] += weights[i] / grid.de;
    return f;
}

Field1 diag_average_to_grid(std::span<const double> values,
                            std::span<const double> energies, const EnergyGrid& grid) {
    if (values.size() != energies.size())
        throw std::invalid_argument("diag_average_to_grid: size mismatch");
    Field1 f(grid);
    std::vector<double> cnt(grid.n_e, 0.0);
    for (size_t i = 0; i < values.size(); ++i) {
        int b = grid.e_bin(energies[i]);
        f.v[b] += values[i];
        cnt[b] += 1.0;
    }
    int prev = -1;
    for (int b = 0; b < grid.n_e; ++b) {
        if (cnt[b] == 0) continue;
        f.v[b] /= cnt[b];
        if (prev < 0) {
            for (int k = 0; k < b; ++k) f.v[k] = f.v[b];
        } else {
            for (int k = prev + 1; k < b; ++k) {
                double t = double(k - prev) / double(b - prev);
                f.v[k] = (1 - t) * f.v[prev] + t * f.v[b];
            }
        }
        prev = b;
    }
    if (prev < 0) return f;  // no samples at all
    for (int k = prev + 1; k < grid.n_e; ++k) f.v[k] = f.v[prev];
    return f;
}

Field2 extract_offdiag_f2(const HermitianMatrix& m, std::span<const double> energies,
                          const EnergyGrid& grid, const Field1& nu) {
    const int n = m.dim();
    if (int(energies.size()) != n)
        throw std::invalid_argument("extract_offdiag_f2: size mismatch");
    std::vector<int> bin(n);
    for (int i = 0; i < n; ++i) bin[i] = grid.e_bin(energies[i]);
    Field2 f2(grid);
    const double cell = grid.de * grid.de;
    for (int a = 0; a < n; ++a) {
        double norm_a = nu.v[bin[a]] * cell;
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            f2.at(bin[a], bin[b] - bin[a]) += std::norm(m(a, b)) / norm_a;
        }
    }
    return f2;
}

BExtract extract_b(const HermitianMatrix& rho, const HermitianMatrix& a,
                   std::span<const double> energies, const EnergyGrid& grid) {
    const int n = rho.dim();
    if (a.dim() != n || int(energies.size()) != n)
        throw std::invalid_argument("extract_b: size mismatch");
    std::vector<int> bin(n);
    for (int i = 0; i < n; ++i) bin[i] = grid.e_bin(energies[i]);
    BExtract out;
    out.re = Field2(grid);
    Field2 im(grid);
    const double cell = grid.de * grid.de;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            if (i == k) continue;
            cplx z = rho(i, k) * a(k, i) / cell;
            out.re.at(bin[i], bin[k] - bin[i]) += z.real();
            im.at(bin[i], bin[k] - bin[i]) += z.imag();
        }
    }
    out.max_imag = im.max_abs();
    return out;
}

FormFactorSet extract_form_factors(const HermitianMatrix& rho, const HermitianMatrix& a,
                                   std::span<const double> energies,
                                   const EnergyGrid& grid, double w_label) {
    FormFactorSet s;
    s.w_label = w_label;
    s.nu = estimate_dos(energies, grid);
    std::vector<double> rho_d(rho.dim()), a_d(a.dim());
    for (int i = 0; i < rho.dim(); ++i) rho_d[i] = rho.diag(i);
    for (int i = 0; i < a.dim(); ++i) a_d[i] = a.diag(i);
    // same kernel and bandwidth as nu, so a structureless state keeps p
    // proportional to the level density bin by bin
    s.p = estimate_weighted_density(energies, rho_d, grid);
    // A(E) as a kernel regression sharing nu's smoothing: the ratio keeps
    // the trace sum rule integral(nu*A) == sum_k A_kk exact at every w
    bool all_zero = true;
    for (double x : a_d)
        if (x != 0.0) { all_zero = false; break; }
    s.a = Field1(grid);
    if (!all_zero) {
        Field1 wa = estimate_weighted_density(energies, a_d, grid);
        for (int i = 0; i < grid.n_e; ++i) s.a.v[i] = wa.v[i] / s.nu.v[i];
    }
    s.b = extract_b(rho, a, energies, grid).re;
    s.f2 = extract_offdiag_f2(a, energies, grid, s.nu);
    return s;
}

} // namespace sja
