#include "sja/experiment.hpp"
#include "sja/eth_extract.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sja;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    int64_t seed = -1;
    bool paper_scale = false;
    int order = 0;
    int realizations = 0;
};

void attach_common(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--config", fl.config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", fl.out_dir, "override the output directory");
    cmd->add_option("--seed", fl.seed, "override base_seed");
    cmd->add_flag("--paper-scale", fl.paper_scale,
                  "run at publication sizes (N = 2048 / L = 16) instead of desk scale");
    cmd->add_option("--order", fl.order, "override k_max");
    cmd->add_option("--realizations", fl.realizations, "override the realization count");
}

ExperimentConfig load_config(const CommonFlags& fl, bool finite_size) {
    ExperimentConfig cfg = ExperimentConfig::from_file(fl.config_path);
    if (!fl.out_dir.empty()) cfg.out_dir = fl.out_dir;
    if (fl.seed >= 0) cfg.base_seed = uint64_t(fl.seed);
    if (fl.order > 0) cfg.k_max = fl.order;
    if (fl.realizations > 0) cfg.realizations = fl.realizations;
    if (fl.paper_scale) {
        if (cfg.is_ising()) {
            cfg.l = 16;
            if (finite_size) cfg.sizes = {12, 14, 16};
        } else {
            cfg.n = 2048;
            cfg.realizations = std::max(cfg.realizations, 10);
            if (finite_size) cfg.sizes = {1024, 2048};
        }
    }
    return cfg;
}

int finish(const RunSummary& sum) {
    if (sum.failed()) {
        std::fprintf(stderr, "run failed: %d of %d realizations aborted\n", sum.aborted,
                     sum.attempted);
        return 2;
    }
    std::printf("manifest: %s\n", sum.manifest_path.c_str());
    if (sum.aborted > 0)
        std::printf("completed with %d of %d realizations aborted\n", sum.aborted,
                    sum.attempted);
    return 0;
}

// decimation record plus the initial form-factor snapshot, enough for a later
// flow-only pass
int run_jacobi_stats(const ExperimentConfig& cfg) {
    QuenchProblem prob = build_problem(cfg, cfg.base_seed);
    EnergyGrid grid = experiment_grid(cfg, prob);

    Pivot pv = find_max_offdiagonal(prob.v);
    double w0 = cfg.j * pv.w;
    if (w0 <= cfg.w_min) throw std::runtime_error("perturbation scale is not above w_min");

    EmpiricalFlowResult ef =
        empirical_flow(prob, grid, {w0 * (1 + 1e-9)}, cfg.w_min, false);
    const FormFactorSet& snap = ef.snapshots.front();

    fs::create_directories(cfg.out_dir);
    Manifest man;
    man.config_text = cfg.to_json_text();
    auto emit = [&](const std::string& name, auto&& saver) {
        std::string p = cfg.out_dir + "/" + name;
        saver(p);
        man.add(name, p);
    };
    emit("log.csv", [&](const std::string& p) { ef.jacobi.log.save_csv(p); });
    emit("nu.csv", [&](const std::string& p) { save_field1_csv(snap.nu, p); });
    emit("p0.csv", [&](const std::string& p) { save_field1_csv(snap.p, p); });
    emit("a0.csv", [&](const std::string& p) { save_field1_csv(snap.a, p); });
    emit("b0.csv", [&](const std::string& p) { save_field2_csv(snap.b, p); });
    emit("f20.csv", [&](const std::string& p) { save_field2_csv(snap.f2, p); });
    emit("fjac2.csv", [&](const std::string& p) {
        save_field2_csv(jacobi_spectral_function(ef.jacobi.log, snap.nu, grid, cfg.j), p);
    });
    emit("eigenvalues.csv", [&](const std::string& p) {
        std::ofstream out(p);
        out << "k,value\n";
        std::vector<double> ev = ef.jacobi.eigenvalues_sorted();
        char buf[64];
        for (size_t k = 0; k < ev.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, ev[k]);
            out << buf;
        }
    });
    man.write(cfg.out_dir + "/manifest.json");
    std::printf("rotations: %lld\nevents: %lld\nmanifest: %s/manifest.json\n",
                (long long)ef.jacobi.rotations, (long long)ef.jacobi.log.size(),
                cfg.out_dir.c_str());
    return 0;
}

// rebuild the kernel from a saved decimation record and rerun the solver
int run_flow_only(const ExperimentConfig& cfg, const std::string& in_dir) {
    DecimationLog log = DecimationLog::load_csv(in_dir + "/log.csv");
    Field1 nu = load_field1_csv(in_dir + "/nu.csv");
    FlowFields init{load_field1_csv(in_dir + "/p0.csv"), load_field1_csv(in_dir + "/a0.csv"),
                    load_field2_csv(in_dir + "/b0.csv"), load_field2_csv(in_dir + "/f20.csv")};

    KernelTable kernel = build_kernel_table(log, nu, nu.g, cfg.n_slices);
    FlowState flow = solve_iterative(init, kernel, cfg.k_max);

    fs::create_directories(cfg.out_dir);
    Manifest man;
    man.config_text = cfg.to_json_text();
    json traces = json::array();
    for (int k = 0; k <= cfg.k_max; ++k) {
        const FlowFields& end = flow.orders[k].back();
        std::string bk = cfg.out_dir + "/b_order" + std::to_string(k) + ".csv";
        std::string fk = cfg.out_dir + "/f2_order" + std::to_string(k) + ".csv";
        save_field2_csv(end.b, bk);
        save_field2_csv(end.f2, fk);
        man.add("b_order" + std::to_string(k), bk);
        man.add("f2_order" + std::to_string(k), fk);
        FlowTrace tr = flow_trace(end, nu);
        traces.push_back({{"order", k},
                          {"sum_p", tr.sum_p},
                          {"nu_a", tr.nu_a},
                          {"trace", tr.trace},
                          {"frob", tr.frob}});
    }
    json rep{{"traces", traces},
             {"order_delta", flow.order_delta},
             {"diverging", flow.diverging}};
    {
        std::ofstream out(cfg.out_dir + "/flow_report.json");
        out << rep.dump(2) << "\n";
    }
    man.add("flow_report", cfg.out_dir + "/flow_report.json");
    man.write(cfg.out_dir + "/manifest.json");
    std::printf("manifest: %s/manifest.json\n", cfg.out_dir.c_str());
    for (size_t k = 0; k < flow.order_delta.size(); ++k)
        std::printf("order %zu endpoint change: %.3e\n", k + 1, flow.order_delta[k]);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical treatment of Jacobi decimation for quench dynamics"};
    app.require_subcommand(1);

    CommonFlags fq, fa, ff, fj, fo;
    CLI::App* quench = app.add_subcommand("quench", "quench response ensemble");
    attach_common(quench, fq);
    CLI::App* autoc = app.add_subcommand("autocorr", "infinite-temperature autocorrelator");
    attach_common(autoc, fa);
    CLI::App* fsize = app.add_subcommand("finite-size", "cross-size stability study");
    attach_common(fsize, ff);
    CLI::App* jstat = app.add_subcommand("jacobi-stats", "decimation record only");
    attach_common(jstat, fj);
    CLI::App* fonly = app.add_subcommand("flow-only", "rerun the solver on saved records");
    attach_common(fonly, fo);
    std::string flow_in;
    fonly->add_option("input", flow_in, "directory with a saved decimation record")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (quench->parsed()) return finish(run_quench_experiment(load_config(fq, false)));
        if (autoc->parsed()) return finish(run_autocorr_experiment(load_config(fa, false)));
        if (fsize->parsed()) return finish(run_finite_size_study(load_config(ff, true)));
        if (jstat->parsed()) return run_jacobi_stats(load_config(fj, false));
        if (fonly->parsed()) return run_flow_only(load_config(fo, false), flow_in);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
