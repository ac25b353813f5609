#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sja/grid.hpp"

#include <cmath>
#include <vector>

using namespace sja;

TEST_CASE("from_range covers the interval with uniform bins") {
    EnergyGrid g = EnergyGrid::from_range(-2.5, 2.5, 65);
    CHECK(g.n_e == 65);
    CHECK(g.e_min == doctest::Approx(-2.5));
    CHECK(g.e_max() == doctest::Approx(2.5));
    CHECK(g.de == doctest::Approx(5.0 / 65));
    CHECK(g.n_omega() == 129);
    CHECK(g.m_max() == 64);
}

TEST_CASE("bin centers and omega centers share the spacing") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 1.0, 10);
    CHECK(g.e_center(0) == doctest::Approx(0.05));
    CHECK(g.e_center(9) == doctest::Approx(0.95));
    CHECK(g.omega(0) == 0.0);
    CHECK(g.omega(3) == doctest::Approx(0.3));
    CHECK(g.omega(-3) == doctest::Approx(-0.3));
    // difference of two bin centers is an exact omega center
    for (int i = 0; i < g.n_e; ++i)
        for (int j = 0; j < g.n_e; ++j)
            CHECK(g.e_center(j) - g.e_center(i) ==
                  doctest::Approx(g.omega(j - i)).epsilon(1e-12));
}

TEST_CASE("e_bin assigns and clamps") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 1.0, 4);
    CHECK(g.e_bin(0.1) == 0);
    CHECK(g.e_bin(0.30) == 1);
    CHECK(g.e_bin(0.99) == 3);
    CHECK(g.e_bin(-5.0) == 0);
    CHECK(g.e_bin(5.0) == 3);
    // center of every bin maps back to its index
    for (int i = 0; i < g.n_e; ++i) CHECK(g.e_bin(g.e_center(i)) == i);
}

TEST_CASE("omega_bin picks the nearest multiple of de") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 1.0, 5);  // de = 0.2
    CHECK(g.omega_bin(0.0) == 0);
    CHECK(g.omega_bin(0.19) == 1);
    CHECK(g.omega_bin(0.09) == 0);
    CHECK(g.omega_bin(-0.41) == -2);
    CHECK(g.omega_bin(100.0) == g.m_max());
    CHECK(g.omega_bin(-100.0) == -g.m_max());
}

TEST_CASE("from_energies pads the hull") {
    std::vector<double> e{-1.0, 0.3, 2.0};
    EnergyGrid g = EnergyGrid::from_energies(e, 16);
    CHECK(g.e_min <= -1.0);
    CHECK(g.e_max() >= 2.0);
    CHECK(g.e_bin(-1.0) == 0);
    CHECK(g.e_bin(2.0) == 15);
}

TEST_CASE("Field1 integral and sampling") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 2.0, 8);
    Field1 f(g);
    for (int i = 0; i < g.n_e; ++i) f[i] = 3.0;
    CHECK(f.integral() == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(f.sample(1.234) == doctest::Approx(3.0));
    // linear function is reproduced exactly between centers
    for (int i = 0; i < g.n_e; ++i) f[i] = 2.0 * g.e_center(i) + 1.0;
    CHECK(f.sample(0.6) == doctest::Approx(2.0 * 0.6 + 1.0).epsilon(1e-12));
    // clamped beyond the end centers
    CHECK(f.sample(-10.0) == doctest::Approx(f[0]));
    CHECK(f.sample(10.0) == doctest::Approx(f[g.n_e - 1]));
}

TEST_CASE("Field2 indexing covers the full omega range") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 1.0, 6);
    Field2 f(g);
    CHECK(f.v.size() == size_t(6 * 11));
    f.at(0, -5) = 1.0;
    f.at(5, 5) = 2.0;
    CHECK(f.v.front() == 1.0);
    CHECK(f.v.back() == 2.0);
    CHECK(f.get(0, -5) == 1.0);
    CHECK(f.get(-1, 0) == 0.0);
    CHECK(f.get(0, -6) == 0.0);
    CHECK(f.get(6, 0) == 0.0);
    CHECK(f.max_abs() == doctest::Approx(2.0));
}

TEST_CASE("Field2 integral uses both measures") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 1.0, 4);  // de = 0.25
    Field2 f(g);
    f.at(2, 1) = 8.0;
    CHECK(f.integral() == doctest::Approx(8.0 * 0.25 * 0.25).epsilon(1e-12));
}

TEST_CASE("Field2 bilinear sample reproduces a bilinear surface") {
    EnergyGrid g = EnergyGrid::from_range(-1.0, 1.0, 10);
    Field2 f(g);
    auto surf = [](double e, double w) { return 1.0 + 2.0 * e - 0.5 * w + 0.25 * e * w; };
    for (int i = 0; i < g.n_e; ++i)
        for (int m = -g.m_max(); m <= g.m_max(); ++m)
            f.at(i, m) = surf(g.e_center(i), g.omega(m));
    CHECK(f.sample(0.137, 0.46) == doctest::Approx(surf(0.137, 0.46)).epsilon(1e-10));
    CHECK(f.sample(-0.7, -1.13) == doctest::Approx(surf(-0.7, -1.13)).epsilon(1e-10));
}

TEST_CASE("rel_l2_distance basic properties") {
    EnergyGrid g = EnergyGrid::from_range(0.0, 1.0, 4);
    Field2 a(g), b(g);
    a.at(1, 0) = 3.0;
    b.at(1, 0) = 3.0;
    CHECK(rel_l2_distance(a, b) == doctest::Approx(0.0));
    b.at(1, 0) = 6.0;
    CHECK(rel_l2_distance(a, b) > 0.0);
    Field2 z(g);
    CHECK(rel_l2_distance(z, z) == doctest::Approx(0.0));
}
