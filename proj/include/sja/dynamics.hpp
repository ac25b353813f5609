#pragma once
#include "sja/grid.hpp"
#include "sja/hermitian.hpp"
#include "sja/jacobi.hpp"
#include "sja/models.hpp"

#include <string>
#include <vector>

namespace sja {

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v;
    std::string label;
};

// uniform grid on [0, t_max]; the sample count is raised above n_samples when
// needed to keep omega_max * dt <= pi/4
std::vector<double> make_time_grid(double t_max, int n_samples, double omega_max);

// <A(t)> propagated with the accumulated eigenbasis; rho0 and a0 are the
// diagonals of the state and the observable in the original basis
TimeSeries exact_quench(const JacobiResult& jac, const std::vector<double>& rho0,
                        const std::vector<double>& a0, const std::vector<double>& times);

// Tr(A(t) A) / N for A diagonal (a0) in the original basis
TimeSeries exact_autocorrelator(const JacobiResult& jac, const std::vector<double>& a0,
                                const std::vector<double>& times);

struct TdptResult {
    TimeSeries series;
    int64_t degenerate_skipped = 0;  // coupled pairs with |omega| below the cut
};

// second order in J on the bare matrix elements:
// <A(t)> = <A(0)> + J^2 sum_{n<m} |V_nm|^2 2(1-cos w t)/w^2 (rho_mm - rho_nn)(A_nn - A_mm)
TdptResult tdpt_quench(const QuenchProblem& prob, const std::vector<double>& times,
                       double degeneracy_cut = 1e-9);

// Tr A^2/N + (J^2/N) sum_{n != m} |V_nm|^2 (A_nn - A_mm)^2 / w^2 (cos w t - 1)
TdptResult tdpt_autocorr(const QuenchProblem& prob, const std::vector<double>& times,
                         double degeneracy_cut = 1e-9);

// value_t0 + sum_m W(m) (cos(w_m t) - 1) with W(m) = sum_i b(i, m) dE dw
TimeSeries synthesize_quench(const Field2& b, double value_t0, const std::vector<double>& times);

// (1/N) [ integral nu a^2 dE + sum_m cos(w_m t) sum_i nu_i f2(i, m) dE dw ]
TimeSeries synthesize_autocorr(const Field2& f2, const Field1& a, const Field1& nu,
                               double n_levels, const std::vector<double>& times);

struct ErrorSummary {
    double short_max = 0.0;  // max |test - ref| over J t <= 1
    double long_mean = 0.0;  // mean |test - ref| over the last quarter of the window
    double scale = 0.0;      // max(ref) - min(ref), the response amplitude
};

ErrorSummary compare_series(const TimeSeries& test, const TimeSeries& ref, double j_coupling);

} // namespace sja
