#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ucl/config.hpp"
#include "ucl/experiments.hpp"
#include "ucl/report.hpp"

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string out = ".";
};

int run_and_emit(ucl::ExperimentConfig cfg) {
    const ucl::ReportBundle b = ucl::run_experiment(cfg);
    const std::vector<std::string> files = ucl::emit_report(b, cfg.out_dir);
    for (const auto& v : b.verdicts)
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.experiment << "/" << v.id
                  << " value=" << ucl::fmt_sig(v.value)
                  << " threshold=" << ucl::fmt_sig(v.threshold)
                  << (v.note.empty() ? "" : " (" + v.note + ")") << "\n";
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return ucl::bundle_exit_code(b);
}

// registers seed/out on a subcommand and returns a config factory
void add_common(CLI::App* sub, CommonOpts& co) {
    sub->add_option("--seed", co.seed, "RNG seed (mandatory)")->required();
    sub->add_option("--out", co.out, "output directory");
}

ucl::ExperimentConfig base_config(const std::string& experiment,
                                  const CommonOpts& co) {
    ucl::ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.seed = co.seed;
    cfg.has_seed = true;
    cfg.out_dir = co.out;
    return cfg;
}

std::string list_raw(const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ", ";
        s += ucl::fmt_sig(xs[i]);
    }
    return s + "]";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for quantitative unique continuation"};
    app.require_subcommand(1);

    // free-form config file runner
    std::string config_path, run_out;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--out", run_out, "output directory override");

    struct Sub {
        CLI::App* cmd = nullptr;
        CommonOpts co;
        std::vector<double> taus, scales;
        double n = 4.0, eps = 0.3, tol = 1e-3;
        double q0 = 6.0, q1 = 6.0, q2 = 6.0;
        double R = 0.25, C_step = 1.5, alpha_step = 0.5;
        int kgrid = 4, points = 300, n1 = 0, nperp = 0, cases = 10;
        int resolution = 25, family = 4;
        std::string measure, bound = "all", rows, domain, omega, obs;
    };

    Sub ke, pc, ns, ps, cv, ws, sp, tb, cp;

    ke.cmd = app.add_subcommand("kernel-eval", "pointwise kernel bound sweeps");
    add_common(ke.cmd, ke.co);
    ke.cmd->add_option("--tau-list", ke.taus, "tau values")->delimiter(',');
    ke.cmd->add_option("--bound", ke.bound, "bound id or 'all'");

    pc.cmd = app.add_subcommand("parametrix-check", "parametrix residual check");
    add_common(pc.cmd, pc.co);
    pc.cmd->add_option("--tau-list", pc.taus, "tau values")->delimiter(',');
    pc.cmd->add_option("--n1", pc.n1, "x1 resolution");
    pc.cmd->add_option("--nperp", pc.nperp, "transverse resolution");
    pc.cmd->add_option("--tol", pc.tol, "residual tolerance");

    ns.cmd = app.add_subcommand("norm-scan", "operator norm estimates");
    add_common(ns.cmd, ns.co);
    ns.cmd->add_option("--tau-list", ns.taus, "tau values")->delimiter(',');
    ns.cmd->add_option("--rows", ns.rows, "row names or 'all'");
    ns.cmd->add_option("--n1", ns.n1, "x1 resolution");
    ns.cmd->add_option("--nperp", ns.nperp, "transverse resolution");

    ps.cmd = app.add_subcommand("prop-suite", "tau-scaling verdicts per row");
    add_common(ps.cmd, ps.co);
    ps.cmd->add_option("--tau-list", ps.taus, "tau values")->delimiter(',');
    ps.cmd->add_option("--n1", ps.n1, "x1 resolution");
    ps.cmd->add_option("--nperp", ps.nperp, "transverse resolution");

    cv.cmd = app.add_subcommand("carleman-verify", "strip inequality over seeded bumps");
    add_common(cv.cmd, cv.co);
    cv.cmd->add_option("--tau-list", cv.taus, "tau values")->delimiter(',');
    cv.cmd->add_option("--cases", cv.cases, "number of seeded bump cases");
    cv.cmd->add_option("--n1", cv.n1, "x1 resolution");
    cv.cmd->add_option("--nperp", cv.nperp, "transverse resolution");

    ws.cmd = app.add_subcommand("wolff-search", "tilted concentration family search");
    add_common(ws.cmd, ws.co);
    ws.cmd->add_option("--measure", ws.measure, "measure file (points + log weights)");
    ws.cmd->add_option("--n", ws.n, "scale parameter n");
    ws.cmd->add_option("--eps", ws.eps, "tilt ball radius fraction");
    ws.cmd->add_option("--kgrid", ws.kgrid, "tilt lattice resolution");
    ws.cmd->add_option("--points", ws.points, "synthetic cloud size");

    sp.cmd = app.add_subcommand("split-potentials", "level-set splitter audit");
    add_common(sp.cmd, sp.co);
    sp.cmd->add_option("--q0", sp.q0, "integrability of V")->required();
    sp.cmd->add_option("--q1", sp.q1, "integrability of W1")->required();
    sp.cmd->add_option("--q2", sp.q2, "integrability of W2")->required();
    sp.cmd->add_option("--n", sp.n, "scale parameter n")->required();

    tb.cmd = app.add_subcommand("three-balls", "interpolation constant experiment");
    add_common(tb.cmd, tb.co);
    tb.cmd->add_option("--R", tb.R, "inner ball radius");
    tb.cmd->add_option("--resolution", tb.resolution, "grid nodes per axis");
    tb.cmd->add_option("--family-size", tb.family, "solutions per scale");
    tb.cmd->add_option("--potential-scale-list", tb.scales, "V scalings")
        ->delimiter(',');
    tb.cmd->add_option("--q0", tb.q0, "integrability of V");
    tb.cmd->add_option("--q1", tb.q1, "integrability of W1");
    tb.cmd->add_option("--q2", tb.q2, "integrability of W2");

    cp.cmd = app.add_subcommand("chain-propagate", "ball chain composition");
    add_common(cp.cmd, cp.co);
    cp.cmd->add_option("--domain", cp.domain, "domain geometry file")->required();
    cp.cmd->add_option("--omega", cp.omega, "start region geometry file")->required();
    cp.cmd->add_option("--O", cp.obs, "observation region geometry file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ucl::ExperimentConfig cfg;
        if (run->parsed()) {
            cfg = ucl::load_config_file(config_path);
            if (!run_out.empty()) cfg.out_dir = run_out;
        } else if (ke.cmd->parsed()) {
            cfg = base_config("kernel-eval", ke.co);
            if (!ke.taus.empty()) cfg.set("taus", list_raw(ke.taus));
            cfg.set("bound", ke.bound);
        } else if (pc.cmd->parsed()) {
            cfg = base_config("parametrix-check", pc.co);
            if (pc.cmd->count("--tau-list")) cfg.set("taus", list_raw(pc.taus));
            if (pc.n1) cfg.set("n1", ucl::fmt_sig(pc.n1));
            if (pc.nperp) cfg.set("nperp", ucl::fmt_sig(pc.nperp));
            cfg.set("tol", ucl::fmt_sig(pc.tol));
        } else if (ns.cmd->parsed()) {
            cfg = base_config("norm-scan", ns.co);
            if (!ns.taus.empty()) cfg.set("taus", list_raw(ns.taus));
            if (!ns.rows.empty()) cfg.set("rows", ns.rows);
            if (ns.n1) cfg.set("n1", ucl::fmt_sig(ns.n1));
            if (ns.nperp) cfg.set("nperp", ucl::fmt_sig(ns.nperp));
        } else if (ps.cmd->parsed()) {
            cfg = base_config("prop-suite", ps.co);
            if (!ps.taus.empty()) cfg.set("taus", list_raw(ps.taus));
            if (ps.n1) cfg.set("n1", ucl::fmt_sig(ps.n1));
            if (ps.nperp) cfg.set("nperp", ucl::fmt_sig(ps.nperp));
        } else if (cv.cmd->parsed()) {
            cfg = base_config("carleman-verify", cv.co);
            if (!cv.taus.empty()) cfg.set("taus", list_raw(cv.taus));
            cfg.set("cases", ucl::fmt_sig(cv.cases));
            if (cv.n1) cfg.set("n1", ucl::fmt_sig(cv.n1));
            if (cv.nperp) cfg.set("nperp", ucl::fmt_sig(cv.nperp));
        } else if (ws.cmd->parsed()) {
            cfg = base_config("wolff-search", ws.co);
            if (!ws.measure.empty()) cfg.set("measure", ws.measure);
            cfg.set("n", ucl::fmt_sig(ws.n));
            cfg.set("eps", ucl::fmt_sig(ws.eps));
            cfg.set("kgrid", ucl::fmt_sig(ws.kgrid));
            cfg.set("points", ucl::fmt_sig(ws.points));
        } else if (sp.cmd->parsed()) {
            cfg = base_config("split-potentials", sp.co);
            cfg.set("q0", ucl::fmt_sig(sp.q0));
            cfg.set("q1", ucl::fmt_sig(sp.q1));
            cfg.set("q2", ucl::fmt_sig(sp.q2));
            cfg.set("n", ucl::fmt_sig(sp.n));
        } else if (tb.cmd->parsed()) {
            cfg = base_config("three-balls", tb.co);
            cfg.set("R", ucl::fmt_sig(tb.R));
            cfg.set("resolution", ucl::fmt_sig(tb.resolution));
            cfg.set("family_size", ucl::fmt_sig(tb.family));
            if (!tb.scales.empty())
                cfg.set("potential_scales", list_raw(tb.scales));
            if (tb.cmd->count("--q0")) cfg.set("q0", ucl::fmt_sig(tb.q0));
            if (tb.cmd->count("--q1")) cfg.set("q1", ucl::fmt_sig(tb.q1));
            if (tb.cmd->count("--q2")) cfg.set("q2", ucl::fmt_sig(tb.q2));
        } else if (cp.cmd->parsed()) {
            cfg = base_config("chain-propagate", cp.co);
            cfg.set("domain", cp.domain);
            cfg.set("omega", cp.omega);
            cfg.set("O", cp.obs);
            cfg.set("C_step", ucl::fmt_sig(cp.C_step));
            cfg.set("alpha_step", ucl::fmt_sig(cp.alpha_step));
        }
        return run_and_emit(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
