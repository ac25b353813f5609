#pragma once
#include "sja/grid.hpp"
#include "sja/hermitian.hpp"

#include <utility>
#include <vector>

namespace sja {

// Smoothed density of states: per-level mass spread over bins with a discrete
// Gaussian (bandwidth defaults to 2 mean level spacings), then renormalized so
// integral() == number of levels exactly.
Field1 estimate_dos(std::span<const double> energies, const EnergyGrid& grid,
                    double bandwidth = 0.0);

// same smoothing kernel with one weight per level; integral equals the weight
// total, so uniform weights reproduce estimate_dos up to an overall factor
Field1 estimate_weighted_density(std::span<const double> energies,
                                 std::span<const double> weights, const EnergyGrid& grid,
                                 double bandwidth = 0.0);

// Microcanonical coarse-graining of a diagonal: consecutive groups of n_bin
// levels (energies assumed ascending). density=false averages the values in
// each group (observable convention); density=true sums them and divides by the
// group's energy extent (state-occupation convention).
std::vector<std::pair<double, double>> extract_diagonal(std::span<const double> values,
                                                        std::span<const double> energies,
                                                        int n_bin, bool density);

// per-bin sum of weights divided by the bin width
Field1 diag_density_to_grid(std::span<const double> weights,
                            std::span<const double> energies, const EnergyGrid& grid);

// per-bin mean of values; empty bins filled by linear interpolation between the
// nearest occupied neighbors (constant extrapolation at the ends)
Field1 diag_average_to_grid(std::span<const double> values,
                            std::span<const double> energies, const EnergyGrid& grid);

// |f_A(E, omega)|^2: for every ordered pair a != b, |M_ab|^2 / (nu(E_a) dE dw)
// deposited at row bin i = bin(E_a), omega cell m = bin(E_b) - bin(E_a)
Field2 extract_offdiag_f2(const HermitianMatrix& m, std::span<const double> energies,
                          const EnergyGrid& grid, const Field1& nu);

struct BExtract {
    Field2 re;
    double max_imag = 0.0;  // largest accumulated imaginary part over cells
};

// B(E, omega): sum of rho_ab A_ba / (dE dw) over ordered pairs a != b, same
// cell assignment as extract_offdiag_f2
BExtract extract_b(const HermitianMatrix& rho, const HermitianMatrix& a,
                   std::span<const double> energies, const EnergyGrid& grid);

struct FormFactorSet {
    double w_label = 0.0;  // decimation scale this snapshot belongs to
    Field1 nu;
    Field1 p;   // diagonal of rho as a density
    Field1 a;   // observable diagonal, kernel regression against nu
    Field2 b;
    Field2 f2;
};

FormFactorSet extract_form_factors(const HermitianMatrix& rho, const HermitianMatrix& a,
                                   std::span<const double> energies,
                                   const EnergyGrid& grid, double w_label);

} // namespace sja
