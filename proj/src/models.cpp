#include "sja/models.hpp"

#include "sja/jacobi.hpp"
#include "sja/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sja {

HermitianMatrix QuenchProblem::hamiltonian() const {
    const int n = dim();
    HermitianMatrix h = HermitianMatrix::diagonal(energies);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) h.set(a, b, j * v(a, b));
    return h;
}

double rmt_fv(RmtKind kind, double omega, const RmtSpec& spec) {
    const double s2 = spec.sigma_omega * spec.sigma_omega;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * s2);
    if (kind == RmtKind::gaussian) {
        return norm * std::exp(-omega * omega / (2.0 * s2));
    }
    double dm = omega - spec.omega0, dp = omega + spec.omega0;
    return 0.5 * norm * (std::exp(-dm * dm / (2.0 * s2)) + std::exp(-dp * dp / (2.0 * s2)));
}

QuenchProblem build_rmt(const RmtSpec& spec, RmtKind kind, double e_cut) {
    if (spec.n < 2) throw std::invalid_argument("build_rmt: n must be >= 2");
    if (!(spec.band > 0) || !(spec.sigma_omega > 0))
        throw std::invalid_argument("build_rmt: band and sigma_omega must be > 0");

    QuenchProblem p;
    p.j = spec.j;
    SplitMix64 rng(spec.seed);
    p.energies.resize(spec.n);
    for (double& e : p.energies) e = rng.uniform(-spec.band, spec.band);
    std::sort(p.energies.begin(), p.energies.end());

    const double nu = spec.n / (2.0 * spec.band);
    const double inv_sqrt_nu = 1.0 / std::sqrt(nu);
    GaussianSampler gauss(rng.next_u64());
    p.v = HermitianMatrix(spec.n);
    for (int a = 0; a < spec.n; ++a) {
        for (int b = a + 1; b < spec.n; ++b) {
            double omega = p.energies[b] - p.energies[a];
            double amp = rmt_fv(kind, omega, spec) * inv_sqrt_nu;
            p.v.set(a, b, cplx(amp * gauss.next(), 0.0));
        }
    }
    p.e0 = p.energies;  // V has zero diagonal, no first-order level shift
    p.rho_diag = microcanonical_state(p.energies, e_cut);
    p.a_diag.resize(spec.n);
    for (int a = 0; a < spec.n; ++a) p.a_diag[a] = p.energies[a] * p.energies[a];
    return p;
}

namespace {

uint32_t rotate_bits(uint32_t x, int l) {
    return ((x >> 1) | ((x & 1u) << (l - 1))) & ((l < 32 ? (1u << l) : 0u) - 1u);
}

struct OrbitTable {
    std::vector<uint32_t> reps;
    std::vector<int> periods;
    std::vector<int> index_of_rep;  // dense map rep -> sector index, -1 elsewhere
};

OrbitTable enumerate_orbits(int l) {
    OrbitTable t;
    const uint32_t states = 1u << l;
    t.index_of_rep.assign(states, -1);
    for (uint32_t x = 0; x < states; ++x) {
        uint32_t mn = x, y = x;
        int period = 0;
        for (int d = 1; d <= l; ++d) {
            y = rotate_bits(y, l);
            if (y < mn) mn = y;
            if (y == x && period == 0) period = d;
        }
        if (mn != x) continue;
        t.index_of_rep[x] = int(t.reps.size());
        t.reps.push_back(x);
        t.periods.push_back(period);
    }
    return t;
}

int rep_index(const OrbitTable& t, uint32_t x, int l) {
    uint32_t mn = x, y = x;
    for (int d = 1; d < l; ++d) {
        y = rotate_bits(y, l);
        if (y < mn) mn = y;
    }
    return t.index_of_rep[mn];
}

} // namespace

IsingSector build_ising_sector(const SpinChainSpec& spec) {
    const int l = spec.l;
    if (l < 2 || l > 24) throw std::invalid_argument("build_ising_sector: need 2 <= L <= 24");
    OrbitTable t = enumerate_orbits(l);
    const int dim = int(t.reps.size());

    IsingSector sec;
    sec.dim = dim;
    sec.reps = t.reps;
    sec.periods = t.periods;
    sec.h0 = HermitianMatrix(dim);
    sec.v = HermitianMatrix(dim);

    auto zval = [](uint32_t x, int i) { return (x >> i) & 1u ? -1.0 : 1.0; };

    for (int col = 0; col < dim; ++col) {
        uint32_t a = t.reps[col];
        double pa = double(t.periods[col]);

        double diag = 0;
        for (int i = 0; i < l; ++i) {
            int ip = (i + 1) % l;
            diag += zval(a, i) * zval(a, ip);
            diag += spec.h * zval(a, i);
        }

        // single-site flips from g*X_i, collapsed onto orbit representatives
        std::map<int, double> h0_off;
        for (int i = 0; i < l; ++i) {
            uint32_t y = a ^ (1u << i);
            h0_off[rep_index(t, y, l)] += spec.g;
        }
        // (X X - Y Y) flips adjacent equal pairs with amplitude 2
        std::map<int, double> v_col;
        for (int i = 0; i < l; ++i) {
            int ip = (i + 1) % l;
            if (((a >> i) & 1u) == ((a >> ip) & 1u)) {
                uint32_t y = a ^ (1u << i) ^ (1u << ip);
                v_col[rep_index(t, y, l)] += 2.0;
            }
        }

        sec.h0.set(col, col, diag);
        for (auto [row, amp] : h0_off) {
            if (row > col) continue;  // filled from the other column's pass
            double pb = double(t.periods[row]);
            if (row == col)
                sec.h0.add(col, col, amp);
            else
                sec.h0.set(row, col, amp * std::sqrt(pa / pb));
        }
        for (auto [row, amp] : v_col) {
            if (row > col) continue;
            double pb = double(t.periods[row]);
            if (row == col)
                sec.v.add(col, col, amp);
            else
                sec.v.set(row, col, amp * std::sqrt(pa / pb));
        }
    }
    return sec;
}

namespace {

// W = Bt^* M Bt^T restricted to real inputs: out_kl = sum_ij Bt[k][i] M_ij Bt[l][j]
HermitianMatrix conjugate_by_basis(const JacobiResult& basis, const HermitianMatrix& m) {
    const int n = m.dim();
    HermitianMatrix out(n);
    if (basis.basis_real && m.is_real()) {
        std::vector<double> mr(size_t(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mr[size_t(i) * n + j] = m(i, j).real();
        const std::vector<double>& bt = basis.basis_t_real;
        std::vector<double> w(size_t(n) * n, 0.0);  // w[i][l] = sum_j M_ij Bt[l][j]
        for (int i = 0; i < n; ++i)
            for (int ll = 0; ll < n; ++ll) {
                const double* mrow = &mr[size_t(i) * n];
                const double* brow = &bt[size_t(ll) * n];
                double s = 0;
                for (int jj = 0; jj < n; ++jj) s += mrow[jj] * brow[jj];
                w[size_t(i) * n + ll] = s;
            }
        for (int k = 0; k < n; ++k)
            for (int ll = k; ll < n; ++ll) {
                const double* brow = &bt[size_t(k) * n];
                double s = 0;
                for (int i = 0; i < n; ++i) s += brow[i] * w[size_t(i) * n + ll];
                out.set(k, ll, cplx(s, 0.0));
            }
        return out;
    }
    std::vector<cplx> w(size_t(n) * n, cplx(0, 0));
    for (int i = 0; i < n; ++i)
        for (int ll = 0; ll < n; ++ll) {
            cplx s = 0;
            for (int jj = 0; jj < n; ++jj) s += m(i, jj) * basis.u(jj, ll);
            w[size_t(i) * n + ll] = s;
        }
    for (int k = 0; k < n; ++k)
        for (int ll = k; ll < n; ++ll) {
            cplx s = 0;
            for (int i = 0; i < n; ++i) s += std::conj(basis.u(i, k)) * w[size_t(i) * n + ll];
            out.set(k, ll, s);
        }
    return out;
}

} // namespace

QuenchProblem to_h0_eigenbasis(const HermitianMatrix& h0, const HermitianMatrix& v,
                               double w_min, double j) {
    const int n = h0.dim();
    if (v.dim() != n) throw std::invalid_argument("to_h0_eigenbasis: dimension mismatch");

    HermitianMatrix work = h0;
    JacobiOptions opt;
    opt.w_min = w_min * 1e-2;
    opt.accumulate_basis = true;
    JacobiResult res = jacobi_diagonalize(work, {}, opt);

    HermitianMatrix vt = conjugate_by_basis(res, v);

    std::vector<double> energies(n);
    for (int k = 0; k < n; ++k) energies[k] = res.eigenvalues[k] + j * vt(k, k).real();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&](int x, int y) { return energies[x] < energies[y]; });

    QuenchProblem p;
    p.j = j;
    p.energies.resize(n);
    p.e0.resize(n);
    for (int k = 0; k < n; ++k) {
        p.energies[k] = energies[perm[k]];
        p.e0[k] = res.eigenvalues[perm[k]];
    }
    p.v = HermitianMatrix(n);
    for (int k = 0; k < n; ++k)
        for (int ll = k + 1; ll < n; ++ll) p.v.set(k, ll, vt(perm[k], perm[ll]));
    p.rho_diag.assign(n, 1.0 / n);
    p.a_diag.resize(n);
    for (int k = 0; k < n; ++k) p.a_diag[k] = p.e0[k] * p.e0[k];
    return p;
}

std::vector<double> microcanonical_state(const std::vector<double>& energies, double e_cut) {
    std::vector<double> rho(energies.size(), 0.0);
    int inside = 0;
    for (size_t i = 0; i < energies.size(); ++i) {
        if (std::abs(energies[i]) <= e_cut) {
            rho[i] = 1.0;
            ++inside;
        }
    }
    if (inside == 0)
        throw std::invalid_argument("microcanonical_state: empty energy window");
    for (double& r : rho) r /= inside;
    return rho;
}

} // namespace sja
