#pragma once
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sja {

using cplx = std::complex<double>;

// Dense Hermitian matrix, full row-major storage (both triangles kept in sync
// through set()/add(); diagonal imaginary parts are pinned to zero).
class HermitianMatrix {
  public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(int n) : n_(n), a_(size_t(n) * n, cplx(0, 0)) {}

    static HermitianMatrix diagonal(std::span<const double> d);

    int dim() const { return n_; }

    cplx operator()(int j, int k) const { return a_[size_t(j) * n_ + k]; }

    void set(int j, int k, cplx v);
    void add(int j, int k, cplx v);

    double diag(int j) const { return a_[size_t(j) * n_ + j].real(); }
    std::vector<double> diagonal_real() const;

    double trace() const;
    double frobenius_norm2() const;  // sum |M_jk|^2
    bool is_real() const;            // all imaginary parts exactly zero
    bool is_finite() const;

    cplx* data() { return a_.data(); }
    const cplx* data() const { return a_.data(); }

  private:
    int n_ = 0;
    std::vector<cplx> a_;
};

// Gamma(M) = (1/N) sum_{j != k} |M_jk|^2
double offdiagonal_norm(const HermitianMatrix& m);

struct Pivot {
    int a = -1, b = -1;   // a < b
    double w = 0.0;       // |M_ab|
    double phase = 0.0;   // phi with M_ab = w e^{-i phi}, in (-pi, pi]
};

// largest |M_jk| over j<k; ties broken by smallest (j,k) lexicographically
Pivot find_max_offdiagonal(const HermitianMatrix& m);

struct TwoLevelRotation {
    int a = -1, b = -1;
    double eta = 0.0;    // tan(eta) = 2w / (E_a - E_b), eta in (-pi/2, pi/2]
    double phase = 0.0;
    double w = 0.0;
};

// eta choice that zeroes the pivot element of [[E_a, w e^{-i phi}],[w e^{i phi}, E_b]];
// degenerate diagonal with w > 0 picks eta = pi/2
TwoLevelRotation rotation_from_pivot(double e_a, double e_b, const Pivot& p);

// two-sided update M -> R^dag M R with
//   R_aa = c, R_ab = -e^{-i phi} s, R_ba = e^{i phi} s, R_bb = c,
//   c = cos(eta/2), s = sin(eta/2)
void apply_rotation(HermitianMatrix& m, const TwoLevelRotation& r);

// right-multiplication U -> U R on a basis accumulator stored transposed
// (row k of basis_t = k-th column of U, i.e. the k-th basis vector)
void apply_rotation_to_basis(std::vector<cplx>& basis_t, int n, const TwoLevelRotation& r);

struct DecimationEvent {
    int64_t n = 0;      // rotation counter at which the event was logged
    double w = 0.0;     // pivot magnitude (maximal off-diagonal at this step)
    double e_a = 0.0;   // diagonal entries right before the rotation
    double e_b = 0.0;
    double eta = 0.0;
    double phase = 0.0;
};

struct DecimationLog {
    std::vector<DecimationEvent> events;

    int64_t size() const { return int64_t(events.size()); }
    void save_csv(const std::string& path) const;
    static DecimationLog load_csv(const std::string& path);
};

} // namespace sja
