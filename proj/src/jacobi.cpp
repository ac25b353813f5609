#include "sja/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sja {

namespace {

template <class T> struct Ops;

template <> struct Ops<double> {
    static double mag2(double v) { return v * v; }
    static double absval(double v) { return std::abs(v); }
    static double conjv(double v) { return v; }
    static double phase_of(double v) { return v < 0 ? std::numbers::pi : 0.0; }
    static double unit(double v, double) { return v < 0 ? -1.0 : 1.0; }
    static cplx to_cplx(double v) { return {v, 0.0}; }
    static double from_cplx(const cplx& v) { return v.real(); }
};

template <> struct Ops<cplx> {
    static double mag2(const cplx& v) { return std::norm(v); }
    static double absval(const cplx& v) { return std::abs(v); }
    static cplx conjv(const cplx& v) { return std::conj(v); }
    static double phase_of(const cplx& v) { return std::arg(std::conj(v)); }
    static cplx unit(const cplx& v, double w) { return std::conj(v) / w; }
    static cplx to_cplx(const cplx& v) { return v; }
    static cplx from_cplx(const cplx& v) { return v; }
};

// Row cache for the max-pivot search: for each row j, the largest |h_jk|^2 over
// k > j together with the smallest such k. Pivot lookup is then O(n), and the
// cache is repaired in O(n) amortized after each rotation.
template <class T>
class Engine {
  public:
    using O = Ops<T>;

    Engine(int n) : n_(n), h_(size_t(n) * n), max2_(std::max(n - 1, 0)), arg_(std::max(n - 1, 0)) {}

    int n_;
    std::vector<T> h_;
    std::vector<std::vector<T>> obs_;
    std::vector<T> basis_;  // transposed accumulator, row k = eigenvector k
    std::vector<double> max2_;
    std::vector<int> arg_;

    T& at(int j, int k) { return h_[size_t(j) * n_ + k]; }

    void load(const HermitianMatrix& m) {
        const cplx* src = m.data();
        for (size_t i = 0; i < h_.size(); ++i) h_[i] = O::from_cplx(src[i]);
    }
    void load_observer(const HermitianMatrix& m) {
        std::vector<T> o(h_.size());
        const cplx* src = m.data();
        for (size_t i = 0; i < o.size(); ++i) o[i] = O::from_cplx(src[i]);
        obs_.push_back(std::move(o));
    }
    void init_basis() {
        basis_.assign(size_t(n_) * n_, T(0));
        for (int k = 0; k < n_; ++k) basis_[size_t(k) * n_ + k] = T(1);
    }
    void store(const std::vector<T>& buf, HermitianMatrix& m) const {
        cplx* dst = m.data();
        for (size_t i = 0; i < buf.size(); ++i) dst[i] = O::to_cplx(buf[i]);
    }
    HermitianMatrix materialize(const std::vector<T>& buf) const {
        HermitianMatrix m(n_);
        store(buf, m);
        return m;
    }

    void recompute_row(int j) {
        const T* row = &h_[size_t(j) * n_];
        double best = -1.0;
        int argk = j + 1;
        for (int k = j + 1; k < n_; ++k) {
            double m2 = O::mag2(row[k]);
            if (m2 > best) {
                best = m2;
                argk = k;
            }
        }
        max2_[j] = best;
        arg_[j] = argk;
    }

    void init_cache() {
        for (int j = 0; j + 1 < n_; ++j) recompute_row(j);
    }

    struct Found {
        int a = -1, b = -1;
        double mag2 = 0.0;
    };

    Found find_pivot() const {
        Found f;
        double best = -1.0;
        for (int j = 0; j + 1 < n_; ++j) {
            if (max2_[j] > best) {
                best = max2_[j];
                f.a = j;
                f.b = arg_[j];
            }
        }
        if (f.a >= 0) f.mag2 = best;
        return f;
    }

    void touch_entry(int j, int k) {
        double m2 = O::mag2(at(j, k));
        if (m2 > max2_[j]) {
            max2_[j] = m2;
            arg_[j] = k;
        } else if (m2 == max2_[j] && k < arg_[j]) {
            arg_[j] = k;
        } else if (arg_[j] == k && m2 < max2_[j]) {
            recompute_row(j);
        }
    }

    void update_cache(int a, int b) {
        recompute_row(a);
        if (b + 1 < n_) recompute_row(b);
        for (int j = 0; j < b; ++j) {
            if (j == a) continue;
            if (j < a) touch_entry(j, a);
            touch_entry(j, b);
        }
    }

    // two-sided conjugation of one stored matrix by the rotation (a,b,c,s,u);
    // if zero_pivot, the (a,b) element is set exactly to zero (used for H)
    void rotate_matrix(std::vector<T>& m, int a, int b, double c, double s, T u,
                       bool zero_pivot) {
        T* ra = &m[size_t(a) * n_];
        T* rb = &m[size_t(b) * n_];
        const T uc = O::conjv(u);
        for (int j = 0; j < n_; ++j) {
            if (j == a || j == b) continue;
            T x = ra[j], y = rb[j];
            T na = c * x + uc * (s * y);
            T nb = c * y - u * (s * x);
            ra[j] = na;
            rb[j] = nb;
            m[size_t(j) * n_ + a] = O::conjv(na);
            m[size_t(j) * n_ + b] = O::conjv(nb);
        }
        double maa = real_part(ra[a]);
        double mbb = real_part(rb[b]);
        T mab = ra[b];
        double cross = 2.0 * real_part(u * mab);
        double naa = c * c * maa + s * s * mbb + c * s * cross;
        double nbb = s * s * maa + c * c * mbb - c * s * cross;
        ra[a] = T(naa);
        rb[b] = T(nbb);
        if (zero_pivot) {
            ra[b] = T(0);
            rb[a] = T(0);
        } else {
            T nab = c * c * mab - s * s * uc * (uc * O::conjv(mab)) + (c * s) * uc * T(mbb - maa);
            ra[b] = nab;
            rb[a] = O::conjv(nab);
        }
    }

    void rotate_basis(int a, int b, double c, double s, T u) {
        T* ra = &basis_[size_t(a) * n_];
        T* rb = &basis_[size_t(b) * n_];
        const T uc = O::conjv(u);
        for (int j = 0; j < n_; ++j) {
            T x = ra[j], y = rb[j];
            ra[j] = c * x + u * (s * y);
            rb[j] = c * y - uc * (s * x);
        }
    }

    static double real_part(double v) { return v; }
    static double real_part(const cplx& v) { return v.real(); }

    JacobiResult run(const JacobiOptions& opt) {
        JacobiResult res;
        res.n = n_;
        int64_t cap = opt.max_rotations > 0 ? opt.max_rotations : int64_t(50) * n_ * n_;
        std::vector<double> chk = opt.checkpoints;
        std::sort(chk.begin(), chk.end(), std::greater<double>());
        size_t ci = 0;

        if (opt.accumulate_basis) init_basis();
        init_cache();

        auto fire = [&](double w_chk, double w_cur) {
            if (!opt.on_checkpoint) return;
            std::vector<double> diag(n_);
            for (int j = 0; j < n_; ++j) diag[j] = real_part(at(j, j));
            std::vector<HermitianMatrix> mats;
            mats.reserve(obs_.size());
            for (const auto& o : obs_) mats.push_back(materialize(o));
            opt.on_checkpoint(w_chk, w_cur, diag, mats);
        };

        int64_t rot = 0;
        while (true) {
            Found f = find_pivot();
            double w = (f.a >= 0) ? O::absval(at(f.a, f.b)) : 0.0;
            while (ci < chk.size() && w <= chk[ci]) {
                fire(chk[ci], w);
                ++ci;
            }
            if (w < opt.w_min) break;
            if (rot >= cap)
                throw std::runtime_error("jacobi_diagonalize: rotation cap exceeded, no convergence");

            T piv = at(f.a, f.b);
            double e_a = real_part(at(f.a, f.a));
            double e_b = real_part(at(f.b, f.b));
            double phase = O::phase_of(piv);
            T u = O::unit(piv, w);
            double eta;
            if (e_a == e_b) {
                eta = std::numbers::pi / 2;  // w >= w_min > 0 here
            } else {
                eta = std::atan(2.0 * w / (e_a - e_b));
            }
            res.log.events.push_back({rot, w, e_a, e_b, eta, phase});

            double c = std::cos(0.5 * eta);
            double s = std::sin(0.5 * eta);
            rotate_matrix(h_, f.a, f.b, c, s, u, true);
            for (auto& o : obs_) rotate_matrix(o, f.a, f.b, c, s, u, false);
            if (opt.accumulate_basis) rotate_basis(f.a, f.b, c, s, u);
            update_cache(f.a, f.b);
            ++rot;
        }
        for (; ci < chk.size(); ++ci) {
            Found f = find_pivot();
            double w = (f.a >= 0) ? O::absval(at(f.a, f.b)) : 0.0;
            fire(chk[ci], w);
        }

        res.rotations = rot;
        res.eigenvalues.resize(n_);
        for (int j = 0; j < n_; ++j) res.eigenvalues[j] = real_part(at(j, j));
        return res;
    }
};

} // namespace

std::vector<double> JacobiResult::eigenvalues_sorted() const {
    std::vector<double> s = eigenvalues;
    std::sort(s.begin(), s.end());
    return s;
}

cplx JacobiResult::u(int j, int k) const {
    if (basis_real) return {basis_t_real[size_t(k) * n + j], 0.0};
    return basis_t_cplx[size_t(k) * n + j];
}

JacobiResult jacobi_diagonalize(HermitianMatrix& h, std::vector<HermitianMatrix*> observers,
                                const JacobiOptions& opt) {
    if (!h.is_finite()) throw std::invalid_argument("jacobi_diagonalize: non-finite input");
    for (auto* o : observers) {
        if (o->dim() != h.dim())
            throw std::invalid_argument("jacobi_diagonalize: observer dimension mismatch");
        if (!o->is_finite())
            throw std::invalid_argument("jacobi_diagonalize: non-finite observer");
    }
    if (!(opt.w_min > 0)) throw std::invalid_argument("jacobi_diagonalize: w_min must be > 0");

    const int n = h.dim();
    bool real = h.is_real();
    for (auto* o : observers) real = real && o->is_real();

    if (real) {
        Engine<double> e(n);
        e.load(h);
        for (auto* o : observers) e.load_observer(*o);
        JacobiResult res = e.run(opt);
        res.real_path = true;
        e.store(e.h_, h);
        for (size_t i = 0; i < observers.size(); ++i) e.store(e.obs_[i], *observers[i]);
        if (opt.accumulate_basis) {
            res.basis_real = true;
            res.basis_t_real = std::move(e.basis_);
        }
        return res;
    }
    Engine<cplx> e(n);
    e.load(h);
    for (auto* o : observers) e.load_observer(*o);
    JacobiResult res = e.run(opt);
    e.store(e.h_, h);
    for (size_t i = 0; i < observers.size(); ++i) e.store(e.obs_[i], *observers[i]);
    if (opt.accumulate_basis) {
        res.basis_real = false;
        res.basis_t_cplx = std::move(e.basis_);
    }
    return res;
}

} // namespace sja
