#pragma once
#include <span>
#include <vector>

namespace sja {

// Energy axis split into n_e uniform bins; the omega/Delta axis shares the same
// spacing, with centers at integer multiples of de. Pairs (i,j) are assigned to
// the omega cell m = bin(E_j) - bin(E_i), so every shifted argument appearing in
// the flow operators (E - Delta, omega + Delta, E + omega) is again exactly a
// grid point. m ranges over [-(n_e-1), n_e-1].
struct EnergyGrid {
    double e_min = 0.0;
    double de = 1.0;
    int n_e = 0;

    static EnergyGrid from_range(double lo, double hi, int n_e);
    // covers [min(energies), max(energies)] with a small relative pad
    static EnergyGrid from_energies(std::span<const double> energies, int n_e,
                                    double pad_frac = 1e-6);

    int m_max() const { return n_e - 1; }
    int n_omega() const { return 2 * n_e - 1; }
    double e_max() const { return e_min + n_e * de; }
    double e_center(int i) const { return e_min + (i + 0.5) * de; }
    double omega(int m) const { return m * de; }

    int e_bin(double e) const;      // clamped into [0, n_e-1]
    int omega_bin(double w) const;  // nearest multiple of de, clamped

    bool operator==(const EnergyGrid&) const = default;
};

// scalar function of E, one value per bin center
struct Field1 {
    EnergyGrid g;
    std::vector<double> v;

    Field1() = default;
    explicit Field1(const EnergyGrid& grid) : g(grid), v(grid.n_e, 0.0) {}

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
    double sample(double e) const;  // linear between centers, clamped ends
    double integral() const;        // sum * de
};

// function of (E, omega) on the aligned grid; storage row-major in E,
// omega index m stored at offset m + m_max
struct Field2 {
    EnergyGrid g;
    std::vector<double> v;

    Field2() = default;
    explicit Field2(const EnergyGrid& grid)
        : g(grid), v(size_t(grid.n_e) * grid.n_omega(), 0.0) {}

    size_t idx(int i, int m) const { return size_t(i) * g.n_omega() + (m + g.m_max()); }
    double& at(int i, int m) { return v[idx(i, m)]; }
    double at(int i, int m) const { return v[idx(i, m)]; }
    // 0 outside the stored index ranges
    double get(int i, int m) const {
        if (i < 0 || i >= g.n_e || m < -g.m_max() || m > g.m_max()) return 0.0;
        return v[idx(i, m)];
    }
    double sample(double e, double w) const;  // bilinear, clamped
    double integral() const;                  // sum * de * de
    double max_abs() const;
};

// relative L2 distance restricted to cells where either field is nonzero
double rel_l2_distance(const Field2& a, const Field2& b);

} // namespace sja
