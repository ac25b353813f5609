#include "sja/hermitian.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace sja {

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
    HermitianMatrix m(int(d.size()));
    for (int j = 0; j < m.n_; ++j) m.a_[size_t(j) * m.n_ + j] = cplx(d[j], 0);
    return m;
}

void HermitianMatrix::set(int j, int k, cplx v) {
    if (j == k) {
        a_[size_t(j) * n_ + j] = cplx(v.real(), 0);
        return;
    }
    a_[size_t(j) * n_ + k] = v;
    a_[size_t(k) * n_ + j] = std::conj(v);
}

void HermitianMatrix::add(int j, int k, cplx v) {
    set(j, k, operator()(j, k) + v);
}

std::vector<double> HermitianMatrix::diagonal_real() const {
    std::vector<double> d(n_);
    for (int j = 0; j < n_; ++j) d[j] = diag(j);
    return d;
}

double HermitianMatrix::trace() const {
    double t = 0;
    for (int j = 0; j < n_; ++j) t += diag(j);
    return t;
}

double HermitianMatrix::frobenius_norm2() const {
    double s = 0;
    for (const cplx& z : a_) s += std::norm(z);
    return s;
}

bool HermitianMatrix::is_real() const {
    for (const cplx& z : a_)
        if (z.imag() != 0.0) return false;
    return true;
}

bool HermitianMatrix::is_finite() const {
    for (const cplx& z : a_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

double offdiagonal_norm(const HermitianMatrix& m) {
    int n = m.dim();
    if (n == 0) return 0;
    double s = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (j != k) s += std::norm(m(j, k));
    return s / n;
}

Pivot find_max_offdiagonal(const HermitianMatrix& m) {
    int n = m.dim();
    Pivot p;
    double best2 = -1.0;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            double m2 = std::norm(m(j, k));
            if (m2 > best2) {
                best2 = m2;
                p.a = j;
                p.b = k;
            }
        }
    }
    if (p.a < 0) return p;  // n < 2
    cplx v = m(p.a, p.b);
    p.w = std::abs(v);
    p.phase = (p.w == 0.0) ? 0.0 : std::arg(std::conj(v));
    return p;
}

TwoLevelRotation rotation_from_pivot(double e_a, double e_b, const Pivot& p) {
    TwoLevelRotation r;
    r.a = p.a;
    r.b = p.b;
    r.w = p.w;
    r.phase = p.phase;
    if (e_a == e_b) {
        r.eta = (p.w > 0.0) ? std::acos(0.0) : 0.0;  // pi/2
    } else {
        r.eta = std::atan(2.0 * p.w / (e_a - e_b));
    }
    return r;
}

void apply_rotation(HermitianMatrix& m, const TwoLevelRotation& r) {
    const int n = m.dim();
    const int a = r.a, b = r.b;
    if (a < 0 || b < 0 || a >= n || b >= n || a == b)
        throw std::invalid_argument("apply_rotation: bad indices");
    const double c = std::cos(0.5 * r.eta);
    const double s = std::sin(0.5 * r.eta);
    const cplx u = std::polar(1.0, r.phase);
    const cplx uc = std::conj(u);
    cplx* d = m.data();
    auto at = [&](int j, int k) -> cplx& { return d[size_t(j) * n + k]; };

    for (int j = 0; j < n; ++j) {
        if (j == a || j == b) continue;
        cplx x = at(a, j), y = at(b, j);
        cplx na = c * x + uc * s * y;
        cplx nb = c * y - u * s * x;
        at(a, j) = na;
        at(b, j) = nb;
        at(j, a) = std::conj(na);
        at(j, b) = std::conj(nb);
    }
    double haa = at(a, a).real(), hbb = at(b, b).real();
    cplx hab = at(a, b);
    double cross = 2.0 * (u * hab).real();
    double naa = c * c * haa + s * s * hbb + c * s * cross;
    double nbb = s * s * haa + c * c * hbb - c * s * cross;
    cplx nab = c * c * hab - s * s * uc * uc * std::conj(hab) + c * s * uc * (hbb - haa);
    at(a, a) = cplx(naa, 0);
    at(b, b) = cplx(nbb, 0);
    at(a, b) = nab;
    at(b, a) = std::conj(nab);
}

void apply_rotation_to_basis(std::vector<cplx>& basis_t, int n, const TwoLevelRotation& r) {
    const double c = std::cos(0.5 * r.eta);
    const double s = std::sin(0.5 * r.eta);
    const cplx u = std::polar(1.0, r.phase);
    const cplx uc = std::conj(u);
    cplx* ra = basis_t.data() + size_t(r.a) * n;
    cplx* rb = basis_t.data() + size_t(r.b) * n;
    // |a'> = c|a> + e^{i phi} s |b>,  |b'> = c|b> - e^{-i phi} s |a>
    for (int j = 0; j < n; ++j) {
        cplx x = ra[j], y = rb[j];
        ra[j] = c * x + u * s * y;
        rb[j] = c * y - uc * s * x;
    }
}

void DecimationLog::save_csv(const std::string& path) const {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    std::fputs("n,w,E_a,E_b,eta,phase\n", f);
    for (const auto& e : events)
        std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     (long long)e.n, e.w, e.e_a, e.e_b, e.eta, e.phase);
    std::fclose(f);
}

DecimationLog DecimationLog::load_csv(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw std::runtime_error("cannot open for read: " + path);
    DecimationLog log;
    char line[512];
    bool header = true;
    while (std::fgets(line, sizeof line, f)) {
        if (header) {
            header = false;
            if (std::strncmp(line, "n,", 2) == 0) continue;
        }
        DecimationEvent e;
        long long n = 0;
        if (std::sscanf(line, "%lld,%lg,%lg,%lg,%lg,%lg",
                        &n, &e.w, &e.e_a, &e.e_b, &e.eta, &e.phase) == 6) {
            e.n = n;
            log.events.push_back(e);
        }
    }
    std::fclose(f);
    return log;
}

} // namespace sja
