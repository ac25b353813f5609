#pragma once
#include "sja/hermitian.hpp"

#include <cstdint>
#include <vector>

namespace sja {

struct RmtSpec {
    int n = 256;
    double j = 0.5;            // perturbation strength multiplying V
    double sigma_omega = 1.5;  // width parameter of the target spectral profile
    double omega0 = 0.7;       // peak offset (bimodal profile only)
    double band = 2.5;         // unperturbed levels i.i.d. uniform on [-band, band]
    uint64_t seed = 1;
};

enum class RmtKind { gaussian, bimodal };

struct SpinChainSpec {
    int l = 12;
    double g = 0.9045;
    double h = 0.809;
    double j = 0.1;
};

// Perturbed problem in the basis where H0 is diagonal: H = diag(energies) + J*V
struct QuenchProblem {
    std::vector<double> energies;  // ascending; includes any first-order diagonal shift
    std::vector<double> e0;        // unperturbed eigenvalues, same order; defaults for rho
                                   // and A are functions of these
    HermitianMatrix v;             // v_ii = 0
    std::vector<double> rho_diag;  // initial state, diagonal in this basis
    std::vector<double> a_diag;    // observable, diagonal in this basis
    double j = 0.0;

    int dim() const { return int(energies.size()); }
    HermitianMatrix hamiltonian() const;
};

// target off-diagonal amplitude profile; variance of sqrt(nu)*V_jk at
// separation omega equals the square of this
double rmt_fv(RmtKind kind, double omega, const RmtSpec& spec);

// levels i.i.d. uniform on [-band, band] (sorted); V_jk = fv(omega_jk)/sqrt(nu) * R_jk
// with R a symmetric standard-normal matrix, zero diagonal, nu = n/(2*band).
// rho defaults to a microcanonical window |E| <= e_cut, A to H0^2.
QuenchProblem build_rmt(const RmtSpec& spec, RmtKind kind, double e_cut = 0.5);

struct IsingSector {
    HermitianMatrix h0;  // sum_i Z_i Z_{i+1} + g X_i + h Z_i, periodic chain
    HermitianMatrix v;   // sum_i (X_i X_{i+1} - Y_i Y_{i+1})
    int dim = 0;
    std::vector<uint32_t> reps;     // orbit representatives (momentum-zero sector)
    std::vector<int> periods;
};

IsingSector build_ising_sector(const SpinChainSpec& spec);

// Diagonalize H0 (Jacobi down to w_min*1e-2, basis accumulated), rotate V,
// absorb j*V_ii into the energies, zero the diagonal of V, sort ascending.
// rho defaults to uniform, A to H0^2.
QuenchProblem to_h0_eigenbasis(const HermitianMatrix& h0, const HermitianMatrix& v,
                               double w_min, double j);

// uniform weights on eigenstates with |E| <= e_cut, normalized to sum 1;
// throws if the window is empty
std::vector<double> microcanonical_state(const std::vector<double>& energies, double e_cut);

} // namespace sja
