#include "sja/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sja {

namespace {

bool uniform_spacing(const std::vector<double>& t, double& dt) {
    if (t.size() < 2) {
        dt = 0.0;
        return false;
    }
    dt = t[1] - t[0];
    for (size_t i = 2; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt))) return false;
    return true;
}

// acc[it] += 2 Re(z exp(-i w t[it]))
void add_pair_tone(std::vector<double>& acc, const std::vector<double>& t, bool uniform,
                   double dt, cplx z, double w) {
    if (uniform) {
        cplx ph = std::polar(1.0, -w * t[0]);
        const cplx rot = std::polar(1.0, -w * dt);
        for (size_t it = 0; it < t.size(); ++it) {
            acc[it] += 2.0 * (z.real() * ph.real() - z.imag() * ph.imag());
            ph *= rot;
        }
    } else {
        for (size_t it = 0; it < t.size(); ++it) {
            double c = std::cos(w * t[it]), s = std::sin(w * t[it]);
            acc[it] += 2.0 * (z.real() * c + z.imag() * s);
        }
    }
}

// sampled row orthonormality; rounding across the rotation product stays many
// orders below the 1e-8 budget, so a violation means a corrupted basis
void check_basis_unitary(const JacobiResult& jac) {
    const int n = jac.n;
    const int picks = std::min(n, 8);
    std::vector<int> ks(picks);
    for (int i = 0; i < picks; ++i)
        ks[i] = picks == 1 ? 0 : int((int64_t(i) * (n - 1)) / (picks - 1));
    for (int i = 0; i < picks; ++i) {
        for (int j = i; j < picks; ++j) {
            cplx acc(0, 0);
            if (jac.basis_real) {
                const double* ri = jac.basis_t_real.data() + size_t(ks[i]) * n;
                const double* rj = jac.basis_t_real.data() + size_t(ks[j]) * n;
                double s = 0.0;
                for (int m = 0; m < n; ++m) s += ri[m] * rj[m];
                acc = s;
            } else {
                const cplx* ri = jac.basis_t_cplx.data() + size_t(ks[i]) * n;
                const cplx* rj = jac.basis_t_cplx.data() + size_t(ks[j]) * n;
                for (int m = 0; m < n; ++m) acc += std::conj(ri[m]) * rj[m];
            }
            double want = (i == j && ks[i] == ks[j]) ? 1.0 : 0.0;
            if (std::abs(acc - want) > 1e-8)
                throw std::runtime_error("dynamics: accumulated basis is not unitary");
        }
    }
}

// out[k*n+l] = sum_j conj(U_jk) d_j U_jl, Hermitian
std::vector<cplx> rotate_diagonal(const JacobiResult& jac, const std::vector<double>& d) {
    if (!jac.has_basis())
        throw std::invalid_argument("dynamics: JacobiResult carries no accumulated basis");
    const int n = jac.n;
    if (int(d.size()) != n) throw std::invalid_argument("dynamics: diagonal size mismatch");
    check_basis_unitary(jac);
    std::vector<cplx> out(size_t(n) * n);
    if (jac.basis_real) {
        const double* bt = jac.basis_t_real.data();
        for (int k = 0; k < n; ++k) {
            const double* rk = bt + size_t(k) * n;
            for (int l = k; l < n; ++l) {
                const double* rl = bt + size_t(l) * n;
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += rk[j] * d[j] * rl[j];
                out[size_t(k) * n + l] = acc;
                out[size_t(l) * n + k] = acc;
            }
        }
    } else {
        const cplx* bt = jac.basis_t_cplx.data();
        for (int k = 0; k < n; ++k) {
            const cplx* rk = bt + size_t(k) * n;
            for (int l = k; l < n; ++l) {
                const cplx* rl = bt + size_t(l) * n;
                cplx acc(0, 0);
                for (int j = 0; j < n; ++j) acc += std::conj(rk[j]) * d[j] * rl[j];
                out[size_t(k) * n + l] = acc;
                out[size_t(l) * n + k] = std::conj(acc);
            }
        }
    }
    return out;
}

} // namespace

std::vector<double> make_time_grid(double t_max, int n_samples, double omega_max) {
    if (!(t_max > 0)) throw std::invalid_argument("make_time_grid: t_max must be positive");
    int n = std::max(n_samples, 2);
    double needed = omega_max * t_max * 4.0 / std::numbers::pi;
    if (needed > double(n - 1)) n = int(std::ceil(needed)) + 1;
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t_max * double(i) / double(n - 1);
    return t;
}

TimeSeries exact_quench(const JacobiResult& jac, const std::vector<double>& rho0,
                        const std::vector<double>& a0, const std::vector<double>& times) {
    const int n = jac.n;
    auto rt = rotate_diagonal(jac, rho0);
    auto at = rotate_diagonal(jac, a0);
    const auto& lam = jac.eigenvalues;

    double c0 = 0.0;
    for (int k = 0; k < n; ++k)
        c0 += rt[size_t(k) * n + k].real() * at[size_t(k) * n + k].real();

    std::vector<double> acc(times.size(), 0.0);
    double dt = 0.0;
    bool uni = uniform_spacing(times, dt);
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            cplx z = rt[size_t(k) * n + l] * at[size_t(l) * n + k];
            if (z == cplx(0, 0)) continue;
            add_pair_tone(acc, times, uni, dt, z, lam[k] - lam[l]);
        }
    }
    TimeSeries s;
    s.t = times;
    s.v.resize(times.size());
    for (size_t it = 0; it < times.size(); ++it) s.v[it] = c0 + acc[it];
    s.label = "exact";
    return s;
}

TimeSeries exact_autocorrelator(const JacobiResult& jac, const std::vector<double>& a0,
                                const std::vector<double>& times) {
    const int n = jac.n;
    auto at = rotate_diagonal(jac, a0);
    const auto& lam = jac.eigenvalues;

    double c0 = 0.0;
    for (int k = 0; k < n; ++k) {
        double d = at[size_t(k) * n + k].real();
        c0 += d * d;
    }
    std::vector<double> acc(times.size(), 0.0);
    double dt = 0.0;
    bool uni = uniform_spacing(times, dt);
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            double w2 = std::norm(at[size_t(k) * n + l]);
            if (w2 == 0.0) continue;
            add_pair_tone(acc, times, uni, dt, cplx(w2, 0.0), lam[k] - lam[l]);
        }
    }
    TimeSeries s;
    s.t = times;
    s.v.resize(times.size());
    for (size_t it = 0; it < times.size(); ++it) s.v[it] = (c0 + acc[it]) / double(n);
    s.label = "exact";
    return s;
}

TdptResult tdpt_quench(const QuenchProblem& prob, const std::vector<double>& times,
                       double degeneracy_cut) {
    const int n = prob.dim();
    TdptResult out;
    double a0 = 0.0;
    for (int i = 0; i < n; ++i) a0 += prob.rho_diag[i] * prob.a_diag[i];

    std::vector<double> acc(times.size(), 0.0);
    double dt = 0.0;
    bool uni = uniform_spacing(times, dt);
    double flat = 0.0;  // sum of pair weights, the t-independent part of 1-cos
    const double j2 = prob.j * prob.j;
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            double v2 = std::norm(prob.v(k, l));
            if (v2 == 0.0) continue;
            double w = prob.energies[k] - prob.energies[l];
            if (std::abs(w) <= degeneracy_cut) {
                ++out.degenerate_skipped;
                continue;
            }
            double weight = j2 * v2 * 2.0 / (w * w) *
                            (prob.rho_diag[l] - prob.rho_diag[k]) *
                            (prob.a_diag[k] - prob.a_diag[l]);
            if (weight == 0.0) continue;
            flat += weight;
            add_pair_tone(acc, times, uni, dt, cplx(-0.5 * weight, 0.0), w);
        }
    }
    out.series.t = times;
    out.series.v.resize(times.size());
    for (size_t it = 0; it < times.size(); ++it) out.series.v[it] = a0 + flat + acc[it];
    out.series.label = "tdpt";
    return out;
}

TdptResult tdpt_autocorr(const QuenchProblem& prob, const std::vector<double>& times,
                         double degeneracy_cut) {
    const int n = prob.dim();
    TdptResult out;
    double tra2 = 0.0;
    for (int i = 0; i < n; ++i) tra2 += prob.a_diag[i] * prob.a_diag[i];

    std::vector<double> acc(times.size(), 0.0);
    double dt = 0.0;
    bool uni = uniform_spacing(times, dt);
    double flat = 0.0;
    const double j2 = prob.j * prob.j;
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            double v2 = std::norm(prob.v(k, l));
            if (v2 == 0.0) continue;
            double w = prob.energies[k] - prob.energies[l];
            if (std::abs(w) <= degeneracy_cut) {
                ++out.degenerate_skipped;
                continue;
            }
            double da = prob.a_diag[k] - prob.a_diag[l];
            double weight = 2.0 * j2 * v2 * da * da / (w * w);
            if (weight == 0.0) continue;
            flat -= weight;
            add_pair_tone(acc, times, uni, dt, cplx(0.5 * weight, 0.0), w);
        }
    }
    out.series.t = times;
    out.series.v.resize(times.size());
    for (size_t it = 0; it < times.size(); ++it)
        out.series.v[it] = (tra2 + flat + acc[it]) / double(n);
    out.series.label = "tdpt";
    return out;
}

TimeSeries synthesize_quench(const Field2& b, double value_t0, const std::vector<double>& times) {
    const EnergyGrid& g = b.g;
    TimeSeries s;
    s.t = times;
    double dt = 0.0;
    bool uni = uniform_spacing(times, dt);
    const double cell = g.de * g.de;
    double total = 0.0;
    std::vector<double> acc(times.size(), 0.0);
    for (int m = -g.m_max(); m <= g.m_max(); ++m) {
        if (m == 0) continue;  // cos(0) - 1 vanishes identically
        double wm = 0.0;
        for (int i = 0; i < g.n_e; ++i) wm += b.at(i, m);
        wm *= cell;
        if (wm == 0.0) continue;
        total += wm;
        add_pair_tone(acc, times, uni, dt, cplx(0.5 * wm, 0.0), g.omega(m));
    }
    s.v.resize(times.size());
    for (size_t it = 0; it < times.size(); ++it) s.v[it] = value_t0 + acc[it] - total;
    s.label = "synthesized";
    return s;
}

TimeSeries synthesize_autocorr(const Field2& f2, const Field1& a, const Field1& nu,
                               double n_levels, const std::vector<double>& times) {
    const EnergyGrid& g = f2.g;
    double diag = 0.0;
    for (int i = 0; i < g.n_e; ++i) diag += nu.v[i] * a[i] * a[i] * g.de;

    TimeSeries s;
    s.t = times;
    s.v.assign(times.size(), 0.0);
    double dt = 0.0;
    bool uni = uniform_spacing(times, dt);
    const double cell = g.de * g.de;
    for (int m = -g.m_max(); m <= g.m_max(); ++m) {
        double fm = 0.0;
        for (int i = 0; i < g.n_e; ++i) fm += nu.v[i] * f2.at(i, m);
        fm *= cell;
        if (fm == 0.0) continue;
        add_pair_tone(s.v, times, uni, dt, cplx(0.5 * fm, 0.0), g.omega(m));
    }
    for (size_t it = 0; it < times.size(); ++it) s.v[it] = (diag + s.v[it]) / n_levels;
    s.label = "synthesized";
    return s;
}

ErrorSummary compare_series(const TimeSeries& test, const TimeSeries& ref, double j_coupling) {
    if (test.t.size() != ref.t.size() || test.t.empty())
        throw std::invalid_argument("compare_series: incompatible time grids");
    ErrorSummary e;
    double t_end = ref.t.back();
    double t_short = (j_coupling > 0) ? 1.0 / j_coupling : t_end;
    double lo = 1e300, hi = -1e300;
    double long_sum = 0.0;
    int long_n = 0;
    for (size_t i = 0; i < ref.t.size(); ++i) {
        double err = std::abs(test.v[i] - ref.v[i]);
        if (ref.t[i] <= t_short) e.short_max = std::max(e.short_max, err);
        if (ref.t[i] >= 0.75 * t_end) {
            long_sum += err;
            ++long_n;
        }
        lo = std::min(lo, ref.v[i]);
        hi = std::max(hi, ref.v[i]);
    }
    e.long_mean = long_n ? long_sum / long_n : 0.0;
    e.scale = hi - lo;
    return e;
}

} // namespace sja
