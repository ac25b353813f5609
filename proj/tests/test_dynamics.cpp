#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sja/dynamics.hpp"
#include "sja/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

using namespace sja;

namespace {

QuenchProblem random_problem(int n, double j, uint64_t seed, bool complex_v) {
    SplitMix64 rng(seed);
    QuenchProblem p;
    p.j = j;
    p.energies.resize(n);
    for (double& e : p.energies) e = rng.uniform(-2, 2);
    std::sort(p.energies.begin(), p.energies.end());
    p.e0 = p.energies;
    GaussianSampler gs(rng.next_u64());
    p.v = HermitianMatrix(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double re = 0.3 * gs.next();
            double im = complex_v ? 0.3 * gs.next() : 0.0;
            p.v.set(a, b, cplx(re, im));
        }
    p.rho_diag.assign(n, 0.0);
    double z = 0;
    for (int i = 0; i < n; ++i) {
        p.rho_diag[i] = std::abs(gs.next());
        z += p.rho_diag[i];
    }
    for (double& r : p.rho_diag) r /= z;
    p.a_diag.resize(n);
    for (int i = 0; i < n; ++i) p.a_diag[i] = p.e0[i] * p.e0[i];
    return p;
}

// reference propagation straight from a dense eigensolver
std::vector<double> eigen_quench(const QuenchProblem& p, const std::vector<double>& times) {
    const int n = p.dim();
    Eigen::MatrixXcd h(n, n);
    HermitianMatrix hm = p.hamiltonian();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h(a, b) = hm(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::MatrixXcd u = es.eigenvectors();
    Eigen::VectorXcd rho(n), av(n);
    for (int i = 0; i < n; ++i) {
        rho(i) = p.rho_diag[i];
        av(i) = p.a_diag[i];
    }
    Eigen::MatrixXcd rt = u.adjoint() * rho.asDiagonal() * u;
    Eigen::MatrixXcd at = u.adjoint() * av.asDiagonal() * u;
    std::vector<double> out(times.size(), 0.0);
    for (size_t it = 0; it < times.size(); ++it) {
        cplx s(0, 0);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double w = es.eigenvalues()(k) - es.eigenvalues()(l);
                s += rt(k, l) * at(l, k) * std::polar(1.0, -w * times[it]);
            }
        out[it] = s.real();
    }
    return out;
}

std::vector<double> eigen_autocorr(const QuenchProblem& p, const std::vector<double>& times) {
    const int n = p.dim();
    Eigen::MatrixXcd h(n, n);
    HermitianMatrix hm = p.hamiltonian();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h(a, b) = hm(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::MatrixXcd u = es.eigenvectors();
    Eigen::VectorXcd av(n);
    for (int i = 0; i < n; ++i) av(i) = p.a_diag[i];
    Eigen::MatrixXcd at = u.adjoint() * av.asDiagonal() * u;
    std::vector<double> out(times.size(), 0.0);
    for (size_t it = 0; it < times.size(); ++it) {
        cplx s(0, 0);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double w = es.eigenvalues()(k) - es.eigenvalues()(l);
                s += at(k, l) * at(l, k) * std::polar(1.0, -w * times[it]);
            }
        out[it] = s.real() / n;
    }
    return out;
}

JacobiResult decimate_with_basis(const QuenchProblem& p, double w_min = 1e-10) {
    HermitianMatrix h = p.hamiltonian();
    JacobiOptions opt;
    opt.w_min = w_min;
    opt.accumulate_basis = true;
    return jacobi_diagonalize(h, {}, opt);
}

} // namespace

TEST_CASE("time grid: base count and the sampling guard") {
    std::vector<double> t = make_time_grid(10.0, 5, 0.01);
    REQUIRE(t.size() == 5);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 10.0);
    CHECK(t[1] == doctest::Approx(2.5));

    std::vector<double> dense = make_time_grid(10.0, 5, 100.0);
    CHECK(dense.size() > 5u);
    double dt = dense[1] - dense[0];
    CHECK(100.0 * dt <= std::numbers::pi / 4 + 1e-12);
    CHECK(dense.back() == 10.0);

    CHECK_THROWS_AS(make_time_grid(0.0, 5, 1.0), std::invalid_argument);
}

TEST_CASE("uncoupled problem gives flat series") {
    QuenchProblem p = random_problem(20, 0.0, 3, false);
    JacobiResult jac = decimate_with_basis(p);
    CHECK(jac.rotations == 0);
    std::vector<double> times = make_time_grid(30.0, 64, 0.1);
    double a0 = 0;
    for (int i = 0; i < p.dim(); ++i) a0 += p.rho_diag[i] * p.a_diag[i];

    TimeSeries ex = exact_quench(jac, p.rho_diag, p.a_diag, times);
    for (double v : ex.v) CHECK(v == doctest::Approx(a0).epsilon(1e-12));
    TdptResult td = tdpt_quench(p, times);
    for (double v : td.series.v) CHECK(v == doctest::Approx(a0).epsilon(1e-12));
}

TEST_CASE("initial values are reproduced") {
    QuenchProblem p = random_problem(24, 0.3, 7, true);
    JacobiResult jac = decimate_with_basis(p);
    std::vector<double> times{0.0, 0.5, 1.0};

    double a0 = 0, tra2 = 0;
    for (int i = 0; i < p.dim(); ++i) {
        a0 += p.rho_diag[i] * p.a_diag[i];
        tra2 += p.a_diag[i] * p.a_diag[i];
    }

    TimeSeries ex = exact_quench(jac, p.rho_diag, p.a_diag, times);
    CHECK(ex.v[0] == doctest::Approx(a0).epsilon(1e-10));
    TimeSeries ac = exact_autocorrelator(jac, p.a_diag, times);
    CHECK(ac.v[0] == doctest::Approx(tra2 / p.dim()).epsilon(1e-10));
    TdptResult td = tdpt_quench(p, times);
    CHECK(td.series.v[0] == doctest::Approx(a0).epsilon(1e-13));
    TdptResult ta = tdpt_autocorr(p, times);
    CHECK(ta.series.v[0] == doctest::Approx(tra2 / p.dim()).epsilon(1e-13));
}

TEST_CASE("decimated propagation matches the dense reference") {
    for (bool complex_v : {false, true}) {
        QuenchProblem p = random_problem(48, 0.35, complex_v ? 11 : 12, complex_v);
        JacobiResult jac = decimate_with_basis(p);
        CHECK(jac.real_path == !complex_v);
        std::vector<double> times = make_time_grid(18.0, 40, 0.0);

        TimeSeries ex = exact_quench(jac, p.rho_diag, p.a_diag, times);
        std::vector<double> ref = eigen_quench(p, times);
        for (size_t i = 0; i < times.size(); ++i) CHECK(std::abs(ex.v[i] - ref[i]) < 1e-6);

        TimeSeries ac = exact_autocorrelator(jac, p.a_diag, times);
        std::vector<double> rac = eigen_autocorr(p, times);
        for (size_t i = 0; i < times.size(); ++i) CHECK(std::abs(ac.v[i] - rac[i]) < 1e-6);
    }
}

TEST_CASE("late-time mean settles onto the dephased value") {
    QuenchProblem p = random_problem(48, 0.35, 19, false);
    JacobiResult jac = decimate_with_basis(p);

    // dephased value and a rigorous bound on the residual time average
    const int n = p.dim();
    auto rt_at = [&](const std::vector<double>& d) {
        std::vector<cplx> out(size_t(n) * n, cplx(0, 0));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                cplx s(0, 0);
                for (int k = 0; k < n; ++k)
                    s += std::conj(jac.u(k, a)) * d[k] * jac.u(k, b);
                out[size_t(a) * n + b] = s;
            }
        return out;
    };
    auto rt = rt_at(p.rho_diag);
    auto at = rt_at(p.a_diag);
    double c0 = 0;
    for (int k = 0; k < n; ++k) c0 += (rt[size_t(k) * n + k] * at[size_t(k) * n + k]).real();

    const double t_lo = 500.0, t_hi = 1500.0;
    double bound = 0.0;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            double w = std::abs(jac.eigenvalues[k] - jac.eigenvalues[l]);
            if (w < 1e-12) continue;
            bound += std::abs(rt[size_t(k) * n + l] * at[size_t(l) * n + k]) * 2.0 / (w * (t_hi - t_lo));
        }

    const int samples = 4096;
    std::vector<double> times(samples);
    for (int i = 0; i < samples; ++i)
        times[i] = t_lo + (t_hi - t_lo) * double(i) / double(samples - 1);
    TimeSeries ex = exact_quench(jac, p.rho_diag, p.a_diag, times);
    double mean = 0;
    for (double v : ex.v) mean += v;
    mean /= samples;
    CHECK(std::abs(mean - c0) < bound * 1.2 + 1e-9);
}

TEST_CASE("perturbative response scales exactly with the coupling squared") {
    QuenchProblem p1 = random_problem(40, 0.4, 23, false);
    QuenchProblem p2 = p1;
    p2.j = 0.2;
    std::vector<double> times = make_time_grid(25.0, 160, 0.0);

    TdptResult t1 = tdpt_quench(p1, times), t2 = tdpt_quench(p2, times);
    CHECK(t1.degenerate_skipped == t2.degenerate_skipped);
    double a0 = t1.series.v[0];
    for (size_t i = 1; i < times.size(); ++i) {
        double d1 = t1.series.v[i] - a0, d2 = t2.series.v[i] - a0;
        if (std::abs(d1) < 1e-12) continue;
        CHECK(d1 == doctest::Approx(4.0 * d2).epsilon(1e-11));
    }

    TdptResult a1 = tdpt_autocorr(p1, times), a2 = tdpt_autocorr(p2, times);
    double base = a1.series.v[0];
    for (size_t i = 1; i < times.size(); ++i) {
        double d1 = a1.series.v[i] - base, d2 = a2.series.v[i] - base;
        if (std::abs(d1) < 1e-12) continue;
        CHECK(d1 == doctest::Approx(4.0 * d2).epsilon(1e-11));
    }
}

TEST_CASE("degenerate coupled pairs are counted and skipped") {
    QuenchProblem p;
    p.j = 0.5;
    p.energies = {0.0, 0.0, 1.0};
    p.e0 = p.energies;
    p.v = HermitianMatrix(3);
    p.v.set(0, 1, cplx(0.4, 0.0));   // degenerate pair
    p.v.set(0, 2, cplx(0.3, 0.0));
    p.v.set(1, 2, cplx(0.2, 0.0));
    p.rho_diag = {0.5, 0.3, 0.2};
    p.a_diag = {0.0, 0.0, 1.0};
    std::vector<double> times{0.0, 1.0, 2.0};

    TdptResult td = tdpt_quench(p, times);
    CHECK(td.degenerate_skipped == 1);
    for (double v : td.series.v) CHECK(std::isfinite(v));

    TdptResult ta = tdpt_autocorr(p, times);
    CHECK(ta.degenerate_skipped == 1);
}

TEST_CASE("synthesized quench equals the explicit tone sum") {
    EnergyGrid g = EnergyGrid::from_range(0, 5, 5);
    Field2 b(g);
    b.at(1, 2) = 0.7;
    b.at(3, -1) = -0.4;
    b.at(2, 0) = 99.0;  // zero-frequency cell never contributes
    double v0 = 1.25;

    std::vector<double> times{0.0, 0.3, 1.7, 4.0};
    TimeSeries s = synthesize_quench(b, v0, times);

    for (size_t it = 0; it < times.size(); ++it) {
        double want = v0;
        want += 0.7 * g.de * g.de * (std::cos(g.omega(2) * times[it]) - 1.0);
        want += -0.4 * g.de * g.de * (std::cos(g.omega(-1) * times[it]) - 1.0);
        CHECK(s.v[it] == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(s.v[0] == doctest::Approx(v0).epsilon(1e-14));
}

TEST_CASE("synthesized autocorrelator equals the explicit tone sum") {
    EnergyGrid g = EnergyGrid::from_range(0, 4, 4);
    Field2 f2(g);
    Field1 a(g), nu(g);
    nu.v = {1, 2, 3, 4};
    a.v = {0.5, -0.5, 1.0, 0.0};
    f2.at(0, 1) = 0.6;
    f2.at(2, -2) = 0.9;
    f2.at(1, 0) = 0.2;
    double n_levels = 10.0;

    std::vector<double> times{0.0, 0.4, 2.2};
    TimeSeries s = synthesize_autocorr(f2, a, nu, n_levels, times);

    double diag = 0;
    for (int i = 0; i < g.n_e; ++i) diag += nu.v[i] * a.v[i] * a.v[i] * g.de;
    for (size_t it = 0; it < times.size(); ++it) {
        double want = diag;
        want += nu.v[0] * 0.6 * g.de * g.de * std::cos(g.omega(1) * times[it]);
        want += nu.v[2] * 0.9 * g.de * g.de * std::cos(g.omega(-2) * times[it]);
        want += nu.v[1] * 0.2 * g.de * g.de;  // zero-frequency tone stays flat
        want /= n_levels;
        CHECK(s.v[it] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("irregular time grids fall back to direct evaluation") {
    EnergyGrid g = EnergyGrid::from_range(0, 5, 5);
    Field2 b(g);
    b.at(1, 2) = 0.7;
    b.at(0, 4) = 0.1;
    std::vector<double> irregular{0.0, 0.13, 0.9, 1.0, 3.7};
    std::vector<double> uniformish{0.0, 1.0, 2.0, 3.0, 4.0};
    TimeSeries si = synthesize_quench(b, 2.0, irregular);
    TimeSeries su = synthesize_quench(b, 2.0, uniformish);
    auto tone = [&](double t) {
        return 2.0 + 0.7 * g.de * g.de * (std::cos(g.omega(2) * t) - 1.0) +
               0.1 * g.de * g.de * (std::cos(g.omega(4) * t) - 1.0);
    };
    for (size_t i = 0; i < irregular.size(); ++i)
        CHECK(si.v[i] == doctest::Approx(tone(irregular[i])).epsilon(1e-12));
    for (size_t i = 0; i < uniformish.size(); ++i)
        CHECK(su.v[i] == doctest::Approx(tone(uniformish[i])).epsilon(1e-12));
}

TEST_CASE("series comparison windows") {
    TimeSeries ref, test;
    for (int i = 0; i <= 100; ++i) {
        double t = 0.1 * i;
        ref.t.push_back(t);
        ref.v.push_back(std::cos(t));
        test.t.push_back(t);
        test.v.push_back(std::cos(t) + ((t <= 1.0) ? 0.02 : 0.05));
    }
    ErrorSummary e = compare_series(test, ref, 1.0);
    CHECK(e.short_max == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(e.long_mean == doctest::Approx(0.05).epsilon(1e-12));
    double vmax = *std::max_element(ref.v.begin(), ref.v.end());
    double vmin = *std::min_element(ref.v.begin(), ref.v.end());
    CHECK(e.scale == doctest::Approx(vmax - vmin).epsilon(1e-12));

    TimeSeries shorter = ref;
    shorter.t.pop_back();
    shorter.v.pop_back();
    CHECK_THROWS_AS(compare_series(shorter, ref, 1.0), std::invalid_argument);
}

TEST_CASE("basis integrity is enforced") {
    QuenchProblem p = random_problem(12, 0.3, 31, false);
    HermitianMatrix h = p.hamiltonian();
    JacobiResult no_basis = jacobi_diagonalize(h);
    std::vector<double> times{0.0, 1.0};
    CHECK_THROWS_AS(exact_quench(no_basis, p.rho_diag, p.a_diag, times), std::invalid_argument);

    JacobiResult jac = decimate_with_basis(p);
    jac.basis_t_real[3] += 0.37;
    CHECK_THROWS_AS(exact_quench(jac, p.rho_diag, p.a_diag, times), std::runtime_error);

    JacobiResult jac2 = decimate_with_basis(p);
    std::vector<double> wrong(p.dim() + 1, 0.1);
    CHECK_THROWS_AS(exact_quench(jac2, wrong, p.a_diag, times), std::invalid_argument);
}
