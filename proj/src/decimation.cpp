#include "sja/decimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sja {

namespace {

double event_weight(const DecimationEvent& e, bool small_angle) {
    if (!small_angle) {
        double s = std::sin(0.5 * e.eta);
        return s * s;
    }
    double d = e.e_a - e.e_b;
    if (d == 0.0) return 0.5;
    double r = (e.w * e.w) / (d * d);
    return std::min(r, 0.5);
}

// Levels drift into the padding bins as the flow proceeds, where the
// reference density estimate is vanishingly small; a 1/nu weight there would
// dwarf every bulk cell. Keep the normalizing density within the same 50x
// contrast the flow ratios allow.
Field1 clip_density(const Field1& nu) {
    Field1 out = nu;
    double mean = nu.integral() / (nu.g.e_max() - nu.g.e_min);
    for (double& x : out.v) x = std::max(x, mean / 50.0);
    return out;
}

} // namespace

KernelTable build_kernel_table(const DecimationLog& log, const Field1& nu,
                               const EnergyGrid& grid, int n_slices, bool small_angle) {
    if (n_slices < 1) throw std::invalid_argument("build_kernel_table: n_slices >= 1");
    KernelTable t;
    t.grid = grid;
    t.nu = clip_density(nu);
    t.events = log.size();

    std::vector<const DecimationEvent*> ev;
    ev.reserve(log.events.size());
    for (const auto& e : log.events) ev.push_back(&e);
    std::stable_sort(ev.begin(), ev.end(),
                     [](const DecimationEvent* x, const DecimationEvent* y) { return x->w > y->w; });

    const int64_t n_ev = int64_t(ev.size());
    const int64_t base = n_ev / n_slices;
    const int64_t extra = n_ev % n_slices;
    int64_t pos = 0;
    for (int s = 0; s < n_slices; ++s) {
        int64_t take = base + (s < extra ? 1 : 0);
        KernelSlice sl;
        sl.weight = Field2(grid);
        sl.count = Field2(grid);
        sl.w_hi = (take > 0) ? ev[pos]->w : 0.0;
        sl.w_lo = (take > 0) ? ev[pos + take - 1]->w : 0.0;
        for (int64_t k = 0; k < take; ++k) {
            const DecimationEvent& e = *ev[pos + k];
            double wgt = event_weight(e, small_angle);
            int ia = grid.e_bin(e.e_a);
            int ib = grid.e_bin(e.e_b);
            int m = ia - ib;
            sl.weight.at(ia, m) += wgt / (t.nu.v[ia] * grid.de);
            sl.weight.at(ib, -m) += wgt / (t.nu.v[ib] * grid.de);
            sl.count.at(ia, m) += 1.0;
            sl.count.at(ib, -m) += 1.0;
        }
        pos += take;
        t.slices.push_back(std::move(sl));
    }
    return t;
}

KernelTable average_kernel_tables(const std::vector<KernelTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("average_kernel_tables: empty input");
    KernelTable out = tables.front();
    for (size_t r = 1; r < tables.size(); ++r) {
        const KernelTable& t = tables[r];
        if (t.slices.size() != out.slices.size() || !(t.grid == out.grid))
            throw std::invalid_argument("average_kernel_tables: mismatched structure");
        for (size_t s = 0; s < out.slices.size(); ++s) {
            for (size_t k = 0; k < out.slices[s].weight.v.size(); ++k) {
                out.slices[s].weight.v[k] += t.slices[s].weight.v[k];
                out.slices[s].count.v[k] += t.slices[s].count.v[k];
            }
            out.slices[s].w_hi += t.slices[s].w_hi;
            out.slices[s].w_lo += t.slices[s].w_lo;
        }
        for (int b = 0; b < out.grid.n_e; ++b) out.nu.v[b] += t.nu.v[b];
        out.events += t.events;
    }
    const double inv = 1.0 / double(tables.size());
    for (auto& s : out.slices) {
        for (double& x : s.weight.v) x *= inv;
        for (double& x : s.count.v) x *= inv;
        s.w_hi *= inv;
        s.w_lo *= inv;
    }
    for (double& x : out.nu.v) x *= inv;
    return out;
}

Field2 jacobi_spectral_function(const DecimationLog& log, const Field1& nu,
                                const EnergyGrid& grid, double j) {
    if (!(j != 0.0)) throw std::invalid_argument("jacobi_spectral_function: j must be nonzero");
    Field2 f(grid);
    Field1 nuc = clip_density(nu);
    const double cell = grid.de * grid.de * j * j;
    for (const auto& e : log.events) {
        int ia = grid.e_bin(e.e_a);
        int ib = grid.e_bin(e.e_b);
        double w2 = e.w * e.w;
        f.at(ia, ib - ia) += w2 / (nuc.v[ia] * cell);
        f.at(ib, ia - ib) += w2 / (nuc.v[ib] * cell);
    }
    return f;
}

DenseRegimeReport dense_regime_check(const DecimationLog& log_a, const Field1& nu_a, int n_a,
                                     const DecimationLog& log_b, const Field1& nu_b, int n_b,
                                     double k1, double k2) {
    if (!(nu_a.g == nu_b.g))
        throw std::invalid_argument("dense_regime_check: logs must share one grid");
    if (!(0 < k1 && k1 < k2)) throw std::invalid_argument("dense_regime_check: need 0 < k1 < k2");
    const EnergyGrid& g = nu_a.g;

    auto moment = [&](const DecimationLog& log, const Field1& nu, int n,
                      std::vector<double>& out, std::vector<double>& cnt) -> int64_t {
        double lo = k1 / std::sqrt(double(n)), hi = k2 / std::sqrt(double(n));
        out.assign(g.n_e, 0.0);
        cnt.assign(g.n_e, 0.0);
        int64_t used = 0;
        for (const auto& e : log.events) {
            if (e.w < lo || e.w > hi) continue;
            int ia = g.e_bin(e.e_a), ib = g.e_bin(e.e_b);
            out[ia] += e.w * e.w / (nu.v[ia] * g.de);
            out[ib] += e.w * e.w / (nu.v[ib] * g.de);
            cnt[ia] += 1;
            cnt[ib] += 1;
            ++used;
        }
        return used;
    };

    DenseRegimeReport rep;
    rep.k1 = k1;
    rep.k2 = k2;
    std::vector<double> ia, ca, ib, cb;
    rep.window_events_a = moment(log_a, nu_a, n_a, ia, ca);
    rep.window_events_b = moment(log_b, nu_b, n_b, ib, cb);

    const double min_count = 8.0;
    for (int k = 0; k < g.n_e; ++k) {
        if (ca[k] >= min_count && cb[k] >= min_count && ia[k] > 0)
            rep.ratios.push_back(ib[k] / ia[k]);
    }
    if (rep.ratios.size() < 5) {
        rep.inconclusive = true;
        return rep;
    }
    std::vector<double> sorted = rep.ratios;
    std::sort(sorted.begin(), sorted.end());
    size_t mid = sorted.size() / 2;
    rep.median_ratio = (sorted.size() % 2) ? sorted[mid]
                                           : 0.5 * (sorted[mid - 1] + sorted[mid]);
    rep.pass = rep.median_ratio >= 0.5 && rep.median_ratio <= 2.0;
    return rep;
}

} // namespace sja
