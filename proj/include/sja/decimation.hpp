#pragma once
#include "sja/grid.hpp"
#include "sja/hermitian.hpp"

#include <vector>

namespace sja {

// One decimation-scale window [w_lo, w_hi]. weight(i, m) is the window- and
// cell-integrated transfer kernel: for every logged event with row energy in
// bin i and partner offset Delta in cell m, sin^2(eta/2) / (nu_i dE) summed
// over both orientations of the pair. count holds raw event deposits.
struct KernelSlice {
    double w_hi = 0.0, w_lo = 0.0;
    Field2 weight;
    Field2 count;
};

struct KernelTable {
    EnergyGrid grid;
    Field1 nu;
    std::vector<KernelSlice> slices;  // descending in w
    int64_t events = 0;
};

// Events sorted descending in w, split into n_slices near-equal-count groups
// (leading slices take the remainder). small_angle replaces sin^2(eta/2) by
// min(w^2/Delta^2, 1/2).
KernelTable build_kernel_table(const DecimationLog& log, const Field1& nu,
                               const EnergyGrid& grid, int n_slices,
                               bool small_angle = false);

// cell-wise mean over realizations; slice structure must match
KernelTable average_kernel_tables(const std::vector<KernelTable>& tables);

// |f_Jac(E, omega)|^2 from the decimation record: deposits w^2/(J^2 nu_i dE dw)
// at (bin(E_row), bin(E_partner) - bin(E_row)) for both orientations
Field2 jacobi_spectral_function(const DecimationLog& log, const Field1& nu,
                                const EnergyGrid& grid, double j);

struct DenseRegimeReport {
    double k1 = 0.25, k2 = 1.0;
    int64_t window_events_a = 0, window_events_b = 0;
    std::vector<double> ratios;   // per qualifying energy bin, I_b / I_a
    double median_ratio = 0.0;
    bool inconclusive = false;    // too few populated bins to decide
    bool pass = false;            // median within [1/2, 2]
};

// Compares the second moment of the decimation density over the scaling window
// [k1/sqrt(n), k2/sqrt(n)] between two system sizes; both logs must be binned
// on the same grid.
DenseRegimeReport dense_regime_check(const DecimationLog& log_a, const Field1& nu_a, int n_a,
                                     const DecimationLog& log_b, const Field1& nu_b, int n_b,
                                     double k1 = 0.25, double k2 = 1.0);

} // namespace sja
