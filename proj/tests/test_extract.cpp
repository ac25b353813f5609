#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sja/eth_extract.hpp"
#include "sja/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace sja;

namespace {

HermitianMatrix random_hermitian(int n, uint64_t seed, bool real_only = false) {
    GaussianSampler gs(seed);
    HermitianMatrix m(n);
    for (int j = 0; j < n; ++j) {
        m.set(j, j, gs.next());
        for (int k = j + 1; k < n; ++k) {
            double re = gs.next();
            double im = real_only ? 0.0 : gs.next();
            m.set(j, k, cplx(re, im));
        }
    }
    return m;
}

std::vector<double> equally_spaced(int n, double lo, double hi) {
    std::vector<double> e(n);
    for (int i = 0; i < n; ++i) e[i] = lo + (i + 0.5) * (hi - lo) / n;
    return e;
}

} // namespace

TEST_CASE("density estimate: exact mass, flat profile for flat levels") {
    const int n = 4000;
    std::vector<double> e = equally_spaced(n, -2.5, 2.5);
    EnergyGrid grid = EnergyGrid::from_range(-2.6, 2.6, 65);
    Field1 nu = estimate_dos(e, grid);
    CHECK(nu.integral() == doctest::Approx(double(n)).epsilon(1e-9));
    const double flat = n / 5.0;
    for (int b = 0; b < grid.n_e; ++b) {
        if (std::abs(grid.e_center(b)) > 2.3) continue;
        CHECK(nu.v[b] == doctest::Approx(flat).epsilon(0.05));
    }
}

TEST_CASE("density estimate: degenerate spike stays local and keeps its mass") {
    std::vector<double> e(500, 0.37);
    EnergyGrid grid = EnergyGrid::from_range(-1, 1, 40);
    Field1 nu = estimate_dos(e, grid);
    CHECK(nu.integral() == doctest::Approx(500.0).epsilon(1e-9));
    int c = grid.e_bin(0.37);
    double near = 0;
    for (int b = std::max(0, c - 3); b <= std::min(grid.n_e - 1, c + 3); ++b)
        near += nu.v[b] * grid.de;
    CHECK(near > 0.99 * 500.0);
}

TEST_CASE("density estimate: random draws match the flat expectation loosely") {
    SplitMix64 rng(77);
    const int n = 20000;
    std::vector<double> e(n);
    for (double& x : e) x = rng.uniform(-2.5, 2.5);
    std::sort(e.begin(), e.end());
    EnergyGrid grid = EnergyGrid::from_range(-2.6, 2.6, 65);
    Field1 nu = estimate_dos(e, grid);
    CHECK(nu.integral() == doctest::Approx(double(n)).epsilon(1e-9));
    for (int b = 0; b < grid.n_e; ++b) {
        if (std::abs(grid.e_center(b)) > 2.2) continue;
        CHECK(nu.v[b] == doctest::Approx(n / 5.0).epsilon(0.25));
    }
}

TEST_CASE("diagonal coarse-graining: group means and densities") {
    std::vector<double> v{1, 2, 3, 4, 5, 6};
    std::vector<double> e{0, 1, 2, 3, 4, 10};

    auto mean = extract_diagonal(v, e, 2, false);
    REQUIRE(mean.size() == 3);
    CHECK(mean[0].first == doctest::Approx(0.5));
    CHECK(mean[0].second == doctest::Approx(1.5));
    CHECK(mean[1].first == doctest::Approx(2.5));
    CHECK(mean[1].second == doctest::Approx(3.5));
    CHECK(mean[2].first == doctest::Approx(7.0));
    CHECK(mean[2].second == doctest::Approx(5.5));

    auto one = extract_diagonal(v, e, 1, false);
    REQUIRE(one.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(one[i].first == e[i]);
        CHECK(one[i].second == v[i]);
    }

    auto dens = extract_diagonal(v, e, 2, true);
    REQUIRE(dens.size() == 3);
    // group widths from midpoints: [-0.5,1.5], [1.5,3.5], [3.5,13]
    CHECK(dens[0].second == doctest::Approx(3.0 / 2.0));
    CHECK(dens[1].second == doctest::Approx(7.0 / 2.0));
    CHECK(dens[2].second == doctest::Approx(11.0 / 9.5));
    // density times width returns each group's total weight
    double recon = dens[0].second * 2.0 + dens[1].second * 2.0 + dens[2].second * 9.5;
    CHECK(recon == doctest::Approx(21.0).epsilon(1e-12));

    CHECK_THROWS_AS(extract_diagonal(v, std::vector<double>{1.0, 2.0}, 2, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(extract_diagonal(v, e, 0, false), std::invalid_argument);
}

TEST_CASE("diagonal densities on the grid conserve weight and track the dos") {
    const int n = 2000;
    std::vector<double> e = equally_spaced(n, -2.5, 2.5);
    std::vector<double> w(n, 1.0 / n);
    EnergyGrid grid = EnergyGrid::from_range(-2.6, 2.6, 65);
    Field1 p = diag_density_to_grid(w, e, grid);
    CHECK(p.integral() == doctest::Approx(1.0).epsilon(1e-12));
    Field1 nu = estimate_dos(e, grid);
    for (int b = 0; b < grid.n_e; ++b) {
        if (std::abs(grid.e_center(b)) > 2.3) continue;
        CHECK(p.v[b] * n == doctest::Approx(nu.v[b]).epsilon(0.05));
    }
}

TEST_CASE("bin averages interpolate across empty bins") {
    EnergyGrid grid = EnergyGrid::from_range(0, 5, 5);
    std::vector<double> e{0.5, 2.5};
    std::vector<double> v{10, 20};
    Field1 f = diag_average_to_grid(v, e, grid);
    CHECK(f.v[0] == 10.0);
    CHECK(f.v[1] == doctest::Approx(15.0));
    CHECK(f.v[2] == 20.0);
    CHECK(f.v[3] == 20.0);
    CHECK(f.v[4] == 20.0);

    // repeated entries in the same bin average
    Field1 g = diag_average_to_grid(std::vector<double>{1, 3}, std::vector<double>{2.4, 2.6}, grid);
    CHECK(g.v[2] == doctest::Approx(2.0));
}

TEST_CASE("off-diagonal strength: hand-checkable two-level deposit") {
    EnergyGrid grid = EnergyGrid::from_range(-2, 2, 4);
    HermitianMatrix m(2);
    cplx c(0.3, -0.4);
    m.set(0, 1, c);
    std::vector<double> e{-1.0, 1.0};
    Field1 nu(grid);
    nu.v = {1, 2, 4, 8};

    Field2 f2 = extract_offdiag_f2(m, e, grid, nu);
    // E=-1 sits in bin 1, E=+1 in bin 3; both orientations deposit once
    CHECK(f2.at(1, 2) == doctest::Approx(std::norm(c) / (2.0 * 1.0 * 1.0)).epsilon(1e-14));
    CHECK(f2.at(3, -2) == doctest::Approx(std::norm(c) / (8.0 * 1.0 * 1.0)).epsilon(1e-14));
    double other = 0;
    for (int i = 0; i < grid.n_e; ++i)
        for (int mm = -grid.m_max(); mm <= grid.m_max(); ++mm) {
            if ((i == 1 && mm == 2) || (i == 3 && mm == -2)) continue;
            other += std::abs(f2.get(i, mm));
        }
    CHECK(other == 0.0);

    HermitianMatrix d = HermitianMatrix::diagonal(std::vector<double>{1.0, 2.0});
    CHECK(extract_offdiag_f2(d, e, grid, nu).max_abs() == 0.0);
}

TEST_CASE("off-diagonal strength obeys the total weight sum rule") {
    const int n = 40;
    HermitianMatrix m = random_hermitian(n, 3);
    SplitMix64 rng(4);
    std::vector<double> e(n);
    for (double& x : e) x = rng.uniform(-2, 2);
    std::sort(e.begin(), e.end());
    EnergyGrid grid = EnergyGrid::from_range(-2.2, 2.2, 21);
    Field1 nu = estimate_dos(e, grid);
    Field2 f2 = extract_offdiag_f2(m, e, grid, nu);

    double lhs = 0;
    for (int i = 0; i < grid.n_e; ++i)
        for (int mm = -grid.m_max(); mm <= grid.m_max(); ++mm)
            lhs += f2.get(i, mm) * nu.v[i] * grid.de * grid.de;
    double rhs = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) rhs += std::norm(m(a, b));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("coherence field: zeros, positivity and the trace sum rule") {
    EnergyGrid grid = EnergyGrid::from_range(-2.2, 2.2, 21);
    const int n = 24;
    SplitMix64 rng(11);
    std::vector<double> e(n);
    for (double& x : e) x = rng.uniform(-2, 2);
    std::sort(e.begin(), e.end());

    HermitianMatrix rho_diag = HermitianMatrix::diagonal(std::vector<double>(n, 1.0 / n));
    HermitianMatrix a = random_hermitian(n, 8);
    BExtract bd = extract_b(rho_diag, a, e, grid);
    CHECK(bd.re.max_abs() == 0.0);
    CHECK(bd.max_imag == 0.0);

    HermitianMatrix r = random_hermitian(n, 9);
    BExtract same = extract_b(r, r, e, grid);
    CHECK(same.max_imag < 1e-14);
    for (double x : same.re.v) CHECK(x >= 0.0);

    BExtract gen = extract_b(r, a, e, grid);
    double lhs = gen.re.integral();
    cplx rhs(0, 0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            if (i != k) rhs += r(i, k) * a(k, i);
    CHECK(std::abs(rhs.imag()) < 1e-12);
    CHECK(lhs == doctest::Approx(rhs.real()).epsilon(1e-12));

    // real symmetric inputs leave no imaginary residue at all
    HermitianMatrix rr = random_hermitian(n, 10, true), ar = random_hermitian(n, 12, true);
    CHECK(extract_b(rr, ar, e, grid).max_imag == 0.0);
}

TEST_CASE("full form-factor snapshot is consistent with its parts") {
    const int n = 60;
    SplitMix64 rng(15);
    std::vector<double> e(n);
    for (double& x : e) x = rng.uniform(-2, 2);
    std::sort(e.begin(), e.end());
    EnergyGrid grid = EnergyGrid::from_range(-2.2, 2.2, 33);

    std::vector<double> rho_d(n, 0.0);
    for (int i = n / 3; i < 2 * n / 3; ++i) rho_d[i] = 1.0;
    double z = std::accumulate(rho_d.begin(), rho_d.end(), 0.0);
    for (double& x : rho_d) x /= z;
    HermitianMatrix rho = HermitianMatrix::diagonal(rho_d);
    rho.set(2, 5, cplx(0.01, 0.002));
    HermitianMatrix a = random_hermitian(n, 19);

    FormFactorSet s = extract_form_factors(rho, a, e, grid, 0.125);
    CHECK(s.w_label == 0.125);
    CHECK(s.p.integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.nu.integral() == doctest::Approx(double(n)).epsilon(1e-9));

    Field2 f2_direct = extract_offdiag_f2(a, e, grid, s.nu);
    CHECK(rel_l2_distance(s.f2, f2_direct) == 0.0);
    Field2 b_direct = extract_b(rho, a, e, grid).re;
    CHECK(rel_l2_distance(s.b, b_direct) == 0.0);
}
