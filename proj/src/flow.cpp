#include "sja/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace sja {

namespace {

double clipped_ratio(double num, double den, double clip) {
    double r = num / den;
    if (!(r > 1.0 / clip)) return 1.0 / clip;
    if (r > clip) return clip;
    return r;
}

} // namespace

FlowFields flow_step(const FlowFields& fields, const KernelSlice& slice,
                     const Field1& nu, const FlowOptions& opt) {
    const EnergyGrid& g = nu.g;
    const int ne = g.n_e;
    const int mm = g.m_max();
    const Field2& S = slice.weight;

    FlowFields d;
    d.p = Field1(g);
    d.a = Field1(g);
    d.b = Field2(g);
    d.f2 = Field2(g);

    for (int i = 0; i < ne; ++i) {
        double dp = 0.0, da = 0.0;
        for (int m = -mm; m <= mm; ++m) {
            double s = S.at(i, m);
            if (s == 0.0) continue;
            int src = i - m;  // deposits exist only when the partner bin does
            double r = clipped_ratio(nu.v[i], nu.v[src], opt.ratio_clip);
            dp += s * (r * fields.p[src] - fields.p[i]);
            da += s * (fields.a[src] - fields.a[i]);
        }
        d.p[i] = dp;
        d.a[i] = da;
    }

    for (int i = 0; i < ne; ++i) {
        for (int jm = -mm; jm <= mm; ++jm) {
            int c = i + jm;  // bin of the pair's second level
            if (c < 0 || c >= ne) continue;
            double db = 0.0, df = 0.0;
            double b_here = fields.b.at(i, jm);
            double f_here = fields.f2.at(i, jm);
            for (int m = -mm; m <= mm; ++m) {
                double s = S.at(i, m);
                if (s != 0.0) {
                    int src = i - m;
                    double r = clipped_ratio(nu.v[i], nu.v[src], opt.ratio_clip);
                    db += s * (r * fields.b.get(src, jm + m) - b_here);
                    df += s * ((opt.f2_ratio ? r : 1.0) * fields.f2.get(src, jm + m) - f_here);
                }
                double sc = S.get(c, m);
                if (sc != 0.0) {
                    int csrc = c - m;
                    double rc = clipped_ratio(nu.v[c], nu.v[csrc], opt.ratio_clip);
                    db += sc * (rc * fields.b.get(i, jm - m) - b_here);
                    df += sc * (rc * fields.f2.get(i, jm - m) - f_here);
                }
            }
            double sg = S.at(i, -jm);  // pairs linking bins i and c get decimated here
            if (sg != 0.0) {
                double da_ic = fields.a[i] - fields.a[c];
                double rg = clipped_ratio(nu.v[i], nu.v[c], opt.ratio_clip);
                db += sg / g.de * da_ic * (fields.p[i] - rg * fields.p[c]);
                df += sg / g.de * da_ic * da_ic;
            }
            d.b.at(i, jm) = db;
            d.f2.at(i, jm) = df;
        }
    }
    return d;
}

namespace {

void add_scaled(FlowFields& x, const FlowFields& d) {
    for (size_t k = 0; k < x.p.v.size(); ++k) x.p.v[k] += d.p.v[k];
    for (size_t k = 0; k < x.a.v.size(); ++k) x.a.v[k] += d.a.v[k];
    for (size_t k = 0; k < x.b.v.size(); ++k) x.b.v[k] += d.b.v[k];
    for (size_t k = 0; k < x.f2.v.size(); ++k) x.f2.v[k] += d.f2.v[k];
}

void check_init(const FlowFields& init, const KernelTable& kernel) {
    if (!(init.p.g == kernel.grid) || !(init.b.g == kernel.grid))
        throw std::invalid_argument("flow: initial fields and kernel use different grids");
}

} // namespace

FlowState solve_iterative(const FlowFields& init, const KernelTable& kernel,
                          int k_max, const FlowOptions& opt) {
    check_init(init, kernel);
    if (k_max < 1) throw std::invalid_argument("solve_iterative: k_max >= 1");
    const size_t ns = kernel.slices.size();

    FlowState st;
    st.orders.resize(size_t(k_max) + 1);
    st.orders[0].assign(ns + 1, init);

    for (int k = 1; k <= k_max; ++k) {
        const auto& prev = st.orders[size_t(k) - 1];
        auto& cur = st.orders[size_t(k)];
        cur.reserve(ns + 1);
        cur.push_back(init);
        for (size_t s = 0; s < ns; ++s) {
            FlowFields next = cur.back();
            add_scaled(next, flow_step(prev[s], kernel.slices[s], kernel.nu, opt));
            cur.push_back(std::move(next));
        }
        st.order_delta.push_back(rel_l2_distance(cur.back().b, prev.back().b));
    }
    // the first delta only measures the size of the leading correction; from
    // then on the corrections must keep shrinking and stay below one
    for (size_t k = 1; k < st.order_delta.size(); ++k) {
        double d = st.order_delta[k];
        if (!std::isfinite(d) || d >= 1.0 || (d > st.order_delta[k - 1] && d > 1e-10)) {
            st.diverging = true;
            break;
        }
    }
    return st;
}

std::vector<FlowFields> solve_direct(const FlowFields& init, const KernelTable& kernel,
                                     const FlowOptions& opt) {
    check_init(init, kernel);
    std::vector<FlowFields> traj;
    traj.reserve(kernel.slices.size() + 1);
    traj.push_back(init);
    for (const auto& slice : kernel.slices) {
        FlowFields next = traj.back();
        add_scaled(next, flow_step(traj.back(), slice, kernel.nu, opt));
        traj.push_back(std::move(next));
    }
    return traj;
}

Field2 first_order_closed_form(const Field1& p0, const Field1& a0, const Field2& fjac2,
                               const Field1& nu, double j, const EnergyGrid& grid,
                               double ratio_clip) {
    Field2 b1(grid);
    for (int i = 0; i < grid.n_e; ++i) {
        for (int m = -grid.m_max(); m <= grid.m_max(); ++m) {
            if (m == 0) continue;
            int c = i + m;
            if (c < 0 || c >= grid.n_e) continue;
            double w = grid.omega(m);
            double r = clipped_ratio(nu.v[i], nu.v[c], ratio_clip);
            b1.at(i, m) = j * j * fjac2.at(i, m) / (w * w) * (p0[i] - r * p0[c]) * (a0[i] - a0[c]);
        }
    }
    return b1;
}

FlowTrace flow_trace(const FlowFields& f, const Field1& nu) {
    const EnergyGrid& g = nu.g;
    FlowTrace t;
    t.sum_p = f.p.integral();
    double pa = 0.0;
    for (int i = 0; i < g.n_e; ++i) {
        t.nu_a += nu.v[i] * f.a[i] * g.de;
        t.frob += nu.v[i] * f.a[i] * f.a[i] * g.de;
        pa += f.p[i] * f.a[i] * g.de;
    }
    t.trace = pa + f.b.integral();
    double nf = 0.0;
    for (int i = 0; i < g.n_e; ++i)
        for (int m = -g.m_max(); m <= g.m_max(); ++m) nf += nu.v[i] * f.f2.at(i, m);
    t.frob += nf * g.de * g.de;
    return t;
}

EmpiricalFlowResult empirical_flow(const QuenchProblem& prob, const EnergyGrid& grid,
                                   const std::vector<double>& w_checkpoints,
                                   double w_min, bool keep_basis) {
    HermitianMatrix h = prob.hamiltonian();
    HermitianMatrix rho = HermitianMatrix::diagonal(prob.rho_diag);
    HermitianMatrix a = HermitianMatrix::diagonal(prob.a_diag);

    EmpiricalFlowResult out;
    JacobiOptions opt;
    opt.w_min = w_min;
    opt.accumulate_basis = keep_basis;
    opt.checkpoints = w_checkpoints;
    opt.on_checkpoint = [&](double w_chk, double, const std::vector<double>& diag,
                            const std::vector<HermitianMatrix>& obs) {
        out.snapshots.push_back(extract_form_factors(obs[0], obs[1], diag, grid, w_chk));
    };
    out.jacobi = jacobi_diagonalize(h, {&rho, &a}, opt);
    return out;
}

std::vector<double> checkpoint_ladder(double w_hi, double w_lo, int points_per_decade) {
    if (!(w_hi > w_lo) || !(w_lo > 0) || points_per_decade < 1)
        throw std::invalid_argument("checkpoint_ladder: need w_hi > w_lo > 0");
    std::vector<double> out;
    double step = std::pow(10.0, -1.0 / points_per_decade);
    for (double w = w_hi; w > w_lo * (1.0 + 1e-12); w *= step) out.push_back(w);
    out.push_back(w_lo);
    return out;
}

} // namespace sja
