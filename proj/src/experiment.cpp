#include "sja/experiment.hpp"
#include "sja/eth_extract.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sja {

namespace {

std::vector<std::string> all_labels(const ExperimentConfig& cfg) {
    std::vector<std::string> ls{"exact", "tdpt"};
    for (int k = 1; k <= cfg.k_max; ++k) ls.push_back("sja-" + std::to_string(k));
    ls.push_back("empirical");
    return ls;
}

void validate_config(const ExperimentConfig& c) {
    auto bad = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (c.model != "rmt-gaussian" && c.model != "rmt-bimodal" && c.model != "ising")
        bad("unknown model \"" + c.model + "\"");
    if (c.n < 2 || c.n > 65536) bad("n out of range");
    if (c.l < 2 || c.l > 24) bad("l out of range");
    if (!(c.j > 0.0)) bad("j must be positive");
    if (!(c.sigma_omega > 0.0)) bad("sigma_omega must be positive");
    if (!(c.omega0 >= 0.0)) bad("omega0 must be non-negative");
    if (!(c.band > 0.0)) bad("band must be positive");
    if (!(c.e_cut > 0.0)) bad("e_cut must be positive");
    if (c.realizations < 1) bad("realizations must be at least 1");
    if (!(c.w_min > 0.0) || c.w_min >= 1.0) bad("w_min must be in (0, 1)");
    if (c.n_bin < 1) bad("n_bin must be at least 1");
    if (c.n_slices < 1 || c.n_slices > 4096) bad("n_slices out of range");
    if (c.e_bins < 8 || c.e_bins > 4096) bad("e_bins out of range");
    if (c.omega_bins != 0 && c.omega_bins != 2 * c.e_bins - 1)
        bad("omega_bins must equal 2*e_bins - 1 (aligned grids)");
    if (c.k_max < 1 || c.k_max > 16) bad("k_max out of range");
    if (!(c.t_max >= 0.0)) bad("t_max must be non-negative");
    if (c.samples < 2) bad("samples must be at least 2");
    for (int s : c.sizes)
        if (s < 2) bad("sizes entries must be at least 2");
    if (c.out_dir.empty()) bad("out_dir must not be empty");
}

std::string size_tag(const ExperimentConfig& cfg, int s) {
    return (cfg.is_ising() ? "l" : "n") + std::to_string(s);
}

void save_pairs_csv(const std::vector<std::pair<double, double>>& rows, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fprintf(fp, "E,value\n");
    for (auto& [e, v] : rows) std::fprintf(fp, "%.17g,%.17g\n", e, v);
    std::fclose(fp);
}

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << doc.dump(2) << "\n";
}

json base_extra(const ExperimentConfig& cfg) {
    return json{{"model", cfg.model}, {"j", cfg.j}};
}

RealizationOutput realization_core(const ExperimentConfig& cfg, uint64_t seed, bool autocorr,
                                   const QuenchProblem* prob_in,
                                   const std::vector<double>* times_in,
                                   std::string* stage_out = nullptr) {
    auto stage = [&](const char* s) {
        if (stage_out) *stage_out = s;
    };
    RealizationOutput out;
    out.seed = seed;

    stage("build");
    QuenchProblem prob = prob_in ? *prob_in : build_problem(cfg, seed);
    const int n = prob.dim();
    if (autocorr) {
        prob.rho_diag.assign(n, 1.0 / n);
        prob.a_diag = prob.e0;
    }

    EnergyGrid grid = experiment_grid(cfg, prob);
    std::vector<double> times = times_in ? *times_in : experiment_times(cfg, grid);

    Pivot pv = find_max_offdiagonal(prob.v);
    double w0 = cfg.j * pv.w;
    if (w0 <= cfg.w_min)
        throw std::runtime_error("perturbation scale " + std::to_string(w0) +
                                 " is not above w_min");
    std::vector<double> ladder = checkpoint_ladder(w0 * (1 + 1e-9), cfg.w_min, 8);

    // epsilon for the sidecars: configured width for rmt, measured width of
    // the perturbation's omega profile for the chain
    if (!cfg.is_ising()) {
        out.epsilon = cfg.j / cfg.sigma_omega;
    } else {
        Field1 nu0 = estimate_dos(prob.energies, grid);
        Field2 f2v = extract_offdiag_f2(prob.v, prob.energies, grid, nu0);
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (int m = -grid.m_max(); m <= grid.m_max(); ++m) {
            double pm = 0.0;
            for (int i = 0; i < grid.n_e; ++i) pm += nu0.v[i] * f2v.at(i, m);
            double wm = grid.omega(m);
            s0 += pm;
            s1 += pm * wm;
            s2 += pm * wm * wm;
        }
        double var = s0 > 0 ? std::max(0.0, s2 / s0 - (s1 / s0) * (s1 / s0)) : 0.0;
        out.epsilon = var > 0 ? cfg.j / std::sqrt(var) : 0.0;
    }

    stage("decimate");
    EmpiricalFlowResult ef = empirical_flow(prob, grid, ladder, cfg.w_min, true);
    const FormFactorSet& first = ef.snapshots.front();
    const FormFactorSet& last = ef.snapshots.back();

    stage("kernel");
    out.kernel = build_kernel_table(ef.jacobi.log, first.nu, grid, cfg.n_slices);
    out.fjac2 = jacobi_spectral_function(ef.jacobi.log, first.nu, grid, cfg.j);

    stage("flow");
    FlowFields init{first.p, first.a, first.b, first.f2};
    out.flow = solve_iterative(init, out.kernel, cfg.k_max);

    stage("series");
    out.value_t0 = 0.0;
    for (int i = 0; i < n; ++i) out.value_t0 += prob.rho_diag[i] * prob.a_diag[i];

    if (!autocorr) {
        out.series.push_back(exact_quench(ef.jacobi, prob.rho_diag, prob.a_diag, times));
        TdptResult td = tdpt_quench(prob, times);
        out.tdpt_degenerate = td.degenerate_skipped;
        out.series.push_back(std::move(td.series));
        for (int k = 1; k <= cfg.k_max; ++k) {
            TimeSeries s = synthesize_quench(out.flow.orders[k].back().b, out.value_t0, times);
            s.label = "sja-" + std::to_string(k);
            out.series.push_back(std::move(s));
        }
        TimeSeries emp = synthesize_quench(last.b, out.value_t0, times);
        emp.label = "empirical";
        out.series.push_back(std::move(emp));
    } else {
        out.series.push_back(exact_autocorrelator(ef.jacobi, prob.a_diag, times));
        TdptResult td = tdpt_autocorr(prob, times);
        out.tdpt_degenerate = td.degenerate_skipped;
        out.series.push_back(std::move(td.series));
        for (int k = 1; k <= cfg.k_max; ++k) {
            const FlowFields& end = out.flow.orders[k].back();
            TimeSeries s = synthesize_autocorr(end.f2, end.a, out.kernel.nu, double(n), times);
            s.label = "sja-" + std::to_string(k);
            out.series.push_back(std::move(s));
        }
        TimeSeries emp = synthesize_autocorr(last.f2, last.a, last.nu, double(n), times);
        emp.label = "empirical";
        out.series.push_back(std::move(emp));
    }

    stage("extract");
    out.snapshots = std::move(ef.snapshots);
    out.eigenvalues = ef.jacobi.eigenvalues_sorted();
    out.rho_coarse = extract_diagonal(prob.rho_diag, prob.energies, cfg.n_bin, true);
    out.a_coarse = extract_diagonal(prob.a_diag, prob.energies, cfg.n_bin, false);
    return out;
}

void emit_realization(const ExperimentConfig& cfg, const RealizationOutput& ro,
                      const std::string& dir, const std::string& man_prefix, Manifest& man) {
    fs::create_directories(dir);
    json extra = base_extra(cfg);
    extra["seed"] = ro.seed;
    extra["epsilon"] = ro.epsilon;
    extra["tdpt_degenerate_skipped"] = ro.tdpt_degenerate;
    for (const TimeSeries& s : ro.series) {
        if (!cfg.wants(s.label)) continue;
        std::string p = dir + "/series_" + s.label + ".csv";
        save_series_csv(s, p, extra.dump());
        man.add(man_prefix + "series_" + s.label, p);
    }
    save_kernel_csv(ro.kernel, dir + "/kernel.csv");
    man.add(man_prefix + "kernel", dir + "/kernel.csv");
    save_field1_csv(ro.kernel.nu, dir + "/nu.csv");
    man.add(man_prefix + "nu", dir + "/nu.csv");
    save_field2_csv(ro.fjac2, dir + "/fjac2.csv");
    man.add(man_prefix + "fjac2", dir + "/fjac2.csv");
    save_pairs_csv(ro.rho_coarse, dir + "/rho_coarse.csv");
    man.add(man_prefix + "rho_coarse", dir + "/rho_coarse.csv");
    save_pairs_csv(ro.a_coarse, dir + "/a_coarse.csv");
    man.add(man_prefix + "a_coarse", dir + "/a_coarse.csv");
}

// realization slots filled by the pool, merged in index order afterwards
struct RealSlot {
    bool ok = false;
    RealizationOutput out;
    std::string stage;
    std::string error;
    uint64_t seed = 0;
};

RunSummary run_batch(const ExperimentConfig& cfg_in, bool autocorr) {
    validate_config(cfg_in);
    ExperimentConfig cfg = cfg_in;
    Manifest man;
    if (cfg.is_ising() && cfg.realizations > 1) {
        man.warnings.push_back("model is deterministic; forcing realizations = 1");
        std::fprintf(stderr, "warning: %s\n", man.warnings.back().c_str());
        cfg.realizations = 1;
    }
    fs::create_directories(cfg.out_dir);
    man.config_text = cfg.to_json_text();
    RunSummary sum;

    const int nreal = cfg.realizations;
    std::vector<RealSlot> slots(nreal);
    std::atomic<int> cursor{0};
    auto worker = [&] {
        for (;;) {
            int r = cursor.fetch_add(1);
            if (r >= nreal) return;
            RealSlot& slot = slots[r];
            slot.seed = cfg.base_seed + uint64_t(r);
            try {
                slot.out = realization_core(cfg, slot.seed, autocorr, nullptr, nullptr,
                                            &slot.stage);
                slot.ok = true;
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
    };
    int workers = int(std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                         unsigned(nreal)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    const std::vector<std::string> labels = all_labels(cfg);
    std::vector<std::vector<TimeSeries>> parts(labels.size());
    std::vector<uint64_t> seeds;
    double eps_sum = 0.0;

    for (int r = 0; r < nreal; ++r) {
        RealSlot& slot = slots[r];
        ++sum.attempted;
        if (!slot.ok) {
            ++sum.aborted;
            std::string ctx =
                "realization " + std::to_string(r) + " seed " + std::to_string(slot.seed) +
                " stage " + slot.stage;
            sum.abort_messages.push_back(ctx + ": " + slot.error);
            man.aborts.emplace_back(ctx, slot.error);
            std::fprintf(stderr, "warning: aborted %s: %s\n", ctx.c_str(), slot.error.c_str());
            continue;
        }
        seeds.push_back(slot.seed);
        eps_sum += slot.out.epsilon;
        char sub[32];
        std::snprintf(sub, sizeof sub, "real_%03d", r);
        emit_realization(cfg, slot.out, cfg.out_dir + "/" + sub, std::string(sub) + "/", man);
        for (size_t li = 0; li < labels.size(); ++li) {
            if (li >= slot.out.series.size() || slot.out.series[li].label != labels[li])
                throw std::logic_error("series label order mismatch");
            parts[li].push_back(std::move(slot.out.series[li]));
        }
        slot.out = RealizationOutput{};
    }

    if (!parts[0].empty()) {
        std::vector<TimeSeries> avg(labels.size());
        for (size_t li = 0; li < labels.size(); ++li) avg[li] = average_series(parts[li]);
        const TimeSeries& ref = avg[0];
        for (size_t li = 0; li < labels.size(); ++li) {
            json extra = base_extra(cfg);
            extra["seeds"] = seeds;
            extra["epsilon"] = eps_sum / double(seeds.size());
            if (li != 0) {
                ErrorSummary es = compare_series(avg[li], ref, cfg.j);
                extra["summary"] = json{{"short_time_max_err", es.short_max},
                                        {"long_time_mean_err", es.long_mean},
                                        {"response_scale", es.scale}};
            }
            if (cfg.wants(labels[li])) {
                std::string p = cfg.out_dir + "/series_" + labels[li] + ".csv";
                save_series_csv(avg[li], p, extra.dump());
                man.add("series_" + labels[li], p);
            }
            if (li != 0) {
                TimeSeries err = abs_difference(avg[li], ref);
                std::string p = cfg.out_dir + "/err_" + labels[li] + ".csv";
                save_series_csv(err, p, base_extra(cfg).dump());
                man.add("err_" + labels[li], p);
            }
        }
    }

    sum.manifest_path = cfg.out_dir + "/manifest.json";
    man.write(sum.manifest_path);
    return sum;
}

} // namespace

bool ExperimentConfig::wants(const std::string& label) const {
    if (emit.empty()) return true;
    return std::find(emit.begin(), emit.end(), label) != emit.end();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
    ExperimentConfig c;
    try {
        for (auto& [key, val] : doc.items()) {
            if (key == "model") c.model = val.get<std::string>();
            else if (key == "n") c.n = val.get<int>();
            else if (key == "l") c.l = val.get<int>();
            else if (key == "j") c.j = val.get<double>();
            else if (key == "sigma_omega") c.sigma_omega = val.get<double>();
            else if (key == "omega0") c.omega0 = val.get<double>();
            else if (key == "band") c.band = val.get<double>();
            else if (key == "g") c.g = val.get<double>();
            else if (key == "h") c.h = val.get<double>();
            else if (key == "e_cut") c.e_cut = val.get<double>();
            else if (key == "realizations") c.realizations = val.get<int>();
            else if (key == "base_seed") c.base_seed = val.get<uint64_t>();
            else if (key == "w_min") c.w_min = val.get<double>();
            else if (key == "n_bin") c.n_bin = val.get<int>();
            else if (key == "n_slices") c.n_slices = val.get<int>();
            else if (key == "e_bins") c.e_bins = val.get<int>();
            else if (key == "omega_bins") c.omega_bins = val.get<int>();
            else if (key == "k_max") c.k_max = val.get<int>();
            else if (key == "t_max") c.t_max = val.get<double>();
            else if (key == "samples") c.samples = val.get<int>();
            else if (key == "sizes") c.sizes = val.get<std::vector<int>>();
            else if (key == "emit") c.emit = val.get<std::vector<std::string>>();
            else if (key == "out_dir") c.out_dir = val.get<std::string>();
            else throw ConfigError("config: unknown key \"" + key + "\"");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate_config(c);
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string ExperimentConfig::to_json_text() const {
    json doc{{"model", model},       {"n", n},
             {"l", l},               {"j", j},
             {"sigma_omega", sigma_omega}, {"omega0", omega0},
             {"band", band},         {"g", g},
             {"h", h},               {"e_cut", e_cut},
             {"realizations", realizations}, {"base_seed", base_seed},
             {"w_min", w_min},       {"n_bin", n_bin},
             {"n_slices", n_slices}, {"e_bins", e_bins},
             {"k_max", k_max},       {"samples", samples},
             {"sizes", sizes},       {"out_dir", out_dir}};
    doc["t_max"] = horizon();
    doc["omega_bins"] = 2 * e_bins - 1;
    doc["emit"] = emit.empty() ? all_labels(*this) : emit;
    return doc.dump(2) + "\n";
}

QuenchProblem build_problem(const ExperimentConfig& cfg, uint64_t seed) {
    if (cfg.model == "rmt-gaussian" || cfg.model == "rmt-bimodal") {
        RmtSpec spec;
        spec.n = cfg.n;
        spec.j = cfg.j;
        spec.sigma_omega = cfg.sigma_omega;
        spec.omega0 = cfg.omega0;
        spec.band = cfg.band;
        spec.seed = seed;
        RmtKind kind = cfg.model == "rmt-gaussian" ? RmtKind::gaussian : RmtKind::bimodal;
        return build_rmt(spec, kind, cfg.e_cut);
    }
    if (cfg.model == "ising") {
        SpinChainSpec spec;
        spec.l = cfg.l;
        spec.g = cfg.g;
        spec.h = cfg.h;
        spec.j = cfg.j;
        IsingSector sector = build_ising_sector(spec);
        QuenchProblem p = to_h0_eigenbasis(sector.h0, sector.v, cfg.w_min, cfg.j);
        p.rho_diag = microcanonical_state(p.e0, cfg.e_cut * cfg.l);
        return p;
    }
    throw ConfigError("config: unknown model \"" + cfg.model + "\"");
}

EnergyGrid experiment_grid(const ExperimentConfig& cfg, const QuenchProblem& prob) {
    if (cfg.is_ising()) {
        const int n = prob.dim();
        double vrow = 0.0;
        for (int a = 0; a < n; ++a) {
            double s = 0.0;
            for (int b = 0; b < n; ++b)
                if (b != a) s += std::norm(prob.v(a, b));
            vrow = std::max(vrow, std::sqrt(s));
        }
        double pad = cfg.j * vrow + 1e-9;
        return EnergyGrid::from_range(prob.energies.front() - pad,
                                      prob.energies.back() + pad, cfg.e_bins);
    }
    // range fixed by the ensemble, not the draw, so every realization shares it
    double pad = 2.0 * cfg.j;
    return EnergyGrid::from_range(-cfg.band - pad, cfg.band + pad, cfg.e_bins);
}

std::vector<double> experiment_times(const ExperimentConfig& cfg, const EnergyGrid& grid) {
    return make_time_grid(cfg.horizon(), cfg.samples, grid.e_max() - grid.e_min);
}

RealizationOutput run_quench_realization(const ExperimentConfig& cfg, uint64_t seed) {
    validate_config(cfg);
    return realization_core(cfg, seed, false, nullptr, nullptr);
}

RealizationOutput run_autocorr_realization(const ExperimentConfig& cfg, uint64_t seed) {
    validate_config(cfg);
    return realization_core(cfg, seed, true, nullptr, nullptr);
}

TimeSeries average_series(const std::vector<TimeSeries>& parts) {
    if (parts.empty()) throw std::invalid_argument("average_series: no input");
    TimeSeries out = parts.front();
    for (size_t p = 1; p < parts.size(); ++p) {
        if (parts[p].t.size() != out.t.size())
            throw std::invalid_argument("average_series: time grids differ");
        for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += parts[p].v[i];
    }
    double inv = 1.0 / double(parts.size());
    for (double& v : out.v) v *= inv;
    return out;
}

TimeSeries abs_difference(const TimeSeries& a, const TimeSeries& ref) {
    if (a.t.size() != ref.t.size())
        throw std::invalid_argument("abs_difference: time grids differ");
    TimeSeries out;
    out.t = a.t;
    out.v.resize(a.v.size());
    for (size_t i = 0; i < a.v.size(); ++i) out.v[i] = std::abs(a.v[i] - ref.v[i]);
    out.label = "err-" + a.label;
    return out;
}

RunSummary run_quench_experiment(const ExperimentConfig& cfg) { return run_batch(cfg, false); }

RunSummary run_autocorr_experiment(const ExperimentConfig& cfg) { return run_batch(cfg, true); }

RunSummary run_finite_size_study(const ExperimentConfig& cfg_in) {
    validate_config(cfg_in);
    ExperimentConfig cfg = cfg_in;
    if (cfg.sizes.size() < 2)
        throw ConfigError("config: finite-size study needs at least two sizes");
    fs::create_directories(cfg.out_dir);

    Manifest man;
    man.config_text = cfg.to_json_text();
    RunSummary sum;
    json report;

    if (cfg.is_ising()) {
        // one shared time grid wide enough for the largest spectrum
        std::vector<ExperimentConfig> sized;
        std::vector<QuenchProblem> probs;
        double span = 0.0;
        for (int L : cfg.sizes) {
            ExperimentConfig c = cfg;
            c.l = L;
            c.realizations = 1;
            QuenchProblem p = build_problem(c, cfg.base_seed);
            EnergyGrid gr = experiment_grid(c, p);
            span = std::max(span, gr.e_max() - gr.e_min);
            sized.push_back(std::move(c));
            probs.push_back(std::move(p));
        }
        std::vector<double> times = make_time_grid(cfg.horizon(), cfg.samples, span);

        // intensive autocorrelators: value per site pair, comparable across sizes
        std::vector<std::vector<TimeSeries>> per_size;
        std::vector<int> done_sizes;
        for (size_t si = 0; si < sized.size(); ++si) {
            ++sum.attempted;
            try {
                RealizationOutput ro =
                    realization_core(sized[si], cfg.base_seed, true, &probs[si], &times);
                double scale = 1.0 / (double(cfg.sizes[si]) * double(cfg.sizes[si]));
                for (TimeSeries& s : ro.series)
                    for (double& v : s.v) v *= scale;
                std::string tag = size_tag(cfg, cfg.sizes[si]);
                json extra = base_extra(cfg);
                extra["size"] = cfg.sizes[si];
                extra["intensive"] = true;
                for (const TimeSeries& s : ro.series) {
                    if (!cfg.wants(s.label)) continue;
                    std::string p = cfg.out_dir + "/series_" + s.label + "_" + tag + ".csv";
                    save_series_csv(s, p, extra.dump());
                    man.add("series_" + s.label + "_" + tag, p);
                }
                per_size.push_back(std::move(ro.series));
                done_sizes.push_back(cfg.sizes[si]);
            } catch (const std::exception& e) {
                ++sum.aborted;
                std::string ctx = "size " + std::to_string(cfg.sizes[si]);
                sum.abort_messages.push_back(ctx + ": " + e.what());
                man.aborts.emplace_back(ctx, e.what());
                std::fprintf(stderr, "warning: %s\n", sum.abort_messages.back().c_str());
            }
        }

        json cross = json::object();
        for (size_t si = 0; si + 1 < per_size.size(); ++si) {
            std::string pair =
                size_tag(cfg, done_sizes[si]) + "_vs_" + size_tag(cfg, done_sizes[si + 1]);
            json entry = json::object();
            for (size_t li = 0; li < per_size[si].size(); ++li) {
                ErrorSummary es =
                    compare_series(per_size[si][li], per_size[si + 1][li], cfg.j);
                entry[per_size[si][li].label] = json{{"long_time_mean_dev", es.long_mean},
                                                     {"short_time_max_dev", es.short_max}};
            }
            cross[pair] = entry;
        }
        report["cross_size"] = cross;
    } else {
        // decimation statistics across sizes on one grid; pass means the
        // small-pivot window keeps the same density once sizes are rescaled
        EnergyGrid grid = EnergyGrid::from_range(-cfg.band - 2.0 * cfg.j,
                                                 cfg.band + 2.0 * cfg.j, cfg.e_bins);
        struct SizeRun {
            int n = 0;
            DecimationLog log;
            Field1 nu;
        };
        std::vector<SizeRun> runs;
        for (size_t si = 0; si < cfg.sizes.size(); ++si) {
            ++sum.attempted;
            ExperimentConfig c = cfg;
            c.n = cfg.sizes[si];
            try {
                QuenchProblem prob = build_problem(c, cfg.base_seed + uint64_t(si));
                JacobiOptions opt;
                opt.w_min = cfg.w_min;
                HermitianMatrix h = prob.hamiltonian();
                JacobiResult jr = jacobi_diagonalize(h, {}, opt);
                SizeRun run;
                run.n = c.n;
                run.nu = estimate_dos(prob.energies, grid);
                run.log = std::move(jr.log);
                std::string tag = size_tag(cfg, c.n);
                KernelTable kt = build_kernel_table(run.log, run.nu, grid, cfg.n_slices);
                save_kernel_csv(kt, cfg.out_dir + "/kernel_" + tag + ".csv");
                man.add("kernel_" + tag, cfg.out_dir + "/kernel_" + tag + ".csv");
                runs.push_back(std::move(run));
            } catch (const std::exception& e) {
                ++sum.aborted;
                std::string ctx = "size " + std::to_string(c.n);
                sum.abort_messages.push_back(ctx + ": " + e.what());
                man.aborts.emplace_back(ctx, e.what());
                std::fprintf(stderr, "warning: %s\n", sum.abort_messages.back().c_str());
            }
        }
        json checks = json::object();
        for (size_t si = 0; si + 1 < runs.size(); ++si) {
            DenseRegimeReport rep = dense_regime_check(runs[si].log, runs[si].nu, runs[si].n,
                                                       runs[si + 1].log, runs[si + 1].nu,
                                                       runs[si + 1].n);
            std::string pair =
                size_tag(cfg, runs[si].n) + "_vs_" + size_tag(cfg, runs[si + 1].n);
            checks[pair] = json{{"median_ratio", rep.median_ratio},
                                {"ratios", rep.ratios},
                                {"window_events", {rep.window_events_a, rep.window_events_b}},
                                {"inconclusive", rep.inconclusive},
                                {"pass", rep.pass}};
        }
        report["dense_regime"] = checks;
    }

    std::string rep_path = cfg.out_dir + "/finite_size_report.json";
    write_json_file(report, rep_path);
    man.add("finite_size_report", rep_path);
    sum.manifest_path = cfg.out_dir + "/manifest.json";
    man.write(sum.manifest_path);
    return sum;
}

} // namespace sja
