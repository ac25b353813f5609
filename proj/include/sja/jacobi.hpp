#pragma once
#include "sja/hermitian.hpp"

#include <functional>

namespace sja {

struct JacobiOptions {
    double w_min = 1e-6;
    int64_t max_rotations = 0;      // 0 -> 50 * n^2 safety cap
    bool accumulate_basis = false;  // track U with H_final = U^dag H_0 U
    // thresholds on the current maximal off-diagonal magnitude, descending;
    // each fires once, the first time the pivot magnitude drops to or below it
    std::vector<double> checkpoints;
    std::function<void(double w_checkpoint, double w_current,
                       const std::vector<double>& diag,
                       const std::vector<HermitianMatrix>& observers)>
        on_checkpoint;
};

struct JacobiResult {
    std::vector<double> eigenvalues;  // final diagonal, basis order (not sorted)
    DecimationLog log;
    int64_t rotations = 0;
    bool real_path = false;
    int n = 0;

    // basis accumulator, stored transposed: row k = eigenvector k in the
    // original basis; exactly one of the two buffers is filled
    bool basis_real = false;
    std::vector<double> basis_t_real;
    std::vector<cplx> basis_t_cplx;

    std::vector<double> eigenvalues_sorted() const;
    cplx u(int j, int k) const;  // U_jk = <j_0|k>
    bool has_basis() const { return !basis_t_real.empty() || !basis_t_cplx.empty(); }
};

// Classical max-pivot Jacobi with decimation instrumentation. H is reduced in
// place; every rotation applied to H is also applied two-sidedly to the
// observers (co-rotation). A real-arithmetic fast path is selected
// automatically when H and all observers have exactly zero imaginary parts.
// Throws std::invalid_argument on non-finite input and std::runtime_error if
// the rotation cap is exceeded.
JacobiResult jacobi_diagonalize(HermitianMatrix& h,
                                std::vector<HermitianMatrix*> observers = {},
                                const JacobiOptions& opt = {});

} // namespace sja
