#pragma once
#include "sja/decimation.hpp"
#include "sja/eth_extract.hpp"
#include "sja/jacobi.hpp"
#include "sja/models.hpp"

#include <vector>

namespace sja {

// Binned fields carried along the decimation flow.
struct FlowFields {
    Field1 p;    // state occupation density, integral() == Tr rho
    Field1 a;    // bin-averaged observable diagonal
    Field2 b;    // Re rho_ab A_ba pair density
    Field2 f2;   // observable off-diagonal strength |f_A|^2
};

struct FlowOptions {
    double ratio_clip = 50.0;  // bound on density ratios entering the operators
    // apply the density ratio also in the row-shift term of f2; off keeps the
    // norm integral nu*a^2 + nu*f2 conserved exactly by the discrete operators
    bool f2_ratio = false;
};

// Right-hand side for one kernel slice, evaluated on "fields". p and a relax
// toward their shifted values; b and f2 additionally pick up source terms
// produced by the pairs decimated inside the slice.
FlowFields flow_step(const FlowFields& fields, const KernelSlice& slice,
                     const Field1& nu, const FlowOptions& opt);

struct FlowState {
    // orders[k][s]: fields after s slices at iteration order k. orders[k] has
    // n_slices + 1 entries; order 0 is the initial set frozen in w.
    std::vector<std::vector<FlowFields>> orders;
    // relative endpoint change of b between consecutive orders, one per order >= 1
    std::vector<double> order_delta;
    // set when the corrections after the leading one grow, saturate at or
    // above one, or stop being finite
    bool diverging = false;
};

// Order-by-order scheme: the order-k trajectory integrates the RHS evaluated
// on the order-(k-1) trajectory at each slice start.
FlowState solve_iterative(const FlowFields& init, const KernelTable& kernel,
                          int k_max, const FlowOptions& opt = {});

// Forward Euler with the RHS on the running fields (self-consistent limit),
// returning the trajectory at slice boundaries.
std::vector<FlowFields> solve_direct(const FlowFields& init, const KernelTable& kernel,
                                     const FlowOptions& opt = {});

// Endpoint b to leading order in J^2, read off the spectral function of the
// decimation record instead of integrating slices:
//   J^2 fjac2(E,w)/w^2 * (p(E) - r p(E+w)) * (a(E) - a(E+w)).
Field2 first_order_closed_form(const Field1& p0, const Field1& a0, const Field2& fjac2,
                               const Field1& nu, double j, const EnergyGrid& grid,
                               double ratio_clip = 50.0);

// integrals watched by the conservation checks
struct FlowTrace {
    double sum_p = 0.0;  // integral p dE
    double nu_a = 0.0;   // integral nu a dE
    double trace = 0.0;  // integral p a dE + integral b dE dw
    double frob = 0.0;   // integral nu a^2 dE + integral nu f2 dE dw
};
FlowTrace flow_trace(const FlowFields& f, const Field1& nu);

struct EmpiricalFlowResult {
    std::vector<FormFactorSet> snapshots;  // one per checkpoint, descending w
    JacobiResult jacobi;
};

// Decimates H = diag(E) + J V with rho and A co-rotating, extracting form
// factors each time the pivot scale crosses a checkpoint value.
EmpiricalFlowResult empirical_flow(const QuenchProblem& prob, const EnergyGrid& grid,
                                   const std::vector<double>& w_checkpoints,
                                   double w_min, bool keep_basis = false);

// geometric ladder from w_hi down to (at least) w_lo
std::vector<double> checkpoint_ladder(double w_hi, double w_lo, int points_per_decade);

} // namespace sja
