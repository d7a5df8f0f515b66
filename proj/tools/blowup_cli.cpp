// blowup_cli: condition checks, profiles, solves, ladders, verification and
// the uniqueness experiment from the command line or a JSON config.
//
// exit codes: 0 ok, 1 a requested check failed, 2 bad config or arguments,
// 3 solver / ladder failure

#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "blowup/experiment.hpp"

using namespace blowup;

namespace {

int exit_for(const Error& e)
{
    switch (e.code()) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument: return 2;
    default: return 3;
    }
}

// a name from named_domains(), an inline JSON descriptor, or a path to one
std::shared_ptr<const GridDomain> domain_from(const std::string& arg, double h)
{
    json d;
    if (!arg.empty() && arg.front() == '{') {
        d = json::parse(arg);
    } else if (fs::exists(arg)) {
        d = json::parse(read_file(arg));
    } else {
        d = named_domain_descriptor(arg, h);
    }
    if (!d.contains("h")) d["h"] = h;
    return share(make_domain(d));
}

void print_verdict_row(const std::string& name, const ConditionVerdict& v)
{
    std::string flags;
    for (const auto& f : v.flags) flags += (flags.empty() ? "" : ",") + f;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-7s %24s %24s  %s\n", name.c_str(), v.holds ? "holds" : "fails",
                  format_real(v.value).c_str(), format_real(v.error_bound).c_str(), flags.c_str());
    std::cout << line;
}

struct Common {
    std::string nl = "power:3";
    std::string domain = "interval";
    double h = 1.0 / 32;
    double T = 1.0, dt = 0;
    std::string ladder = "maximal";
    double k = kNaN;
    std::string out;
    bool plot = false;
    int levels = 3;
    double guard = 4;
    double tolerance = 0.1;

    LadderOptions ladder_options() const
    {
        LadderOptions o;
        o.levels = levels;
        o.guard = guard;
        o.tolerance = tolerance;
        return o;
    }
    double step() const { return dt > 0 ? dt : h; }
};

void add_domain_opts(CLI::App* sc, Common& c)
{
    sc->add_option("--nl", c.nl, "nonlinearity, e.g. power:3, exp:1, linear:1 or inline JSON");
    sc->add_option("--domain", c.domain, "named domain, JSON descriptor or descriptor file");
    sc->add_option("--h", c.h, "grid spacing")->check(CLI::PositiveNumber);
    sc->add_option("--out", c.out, "output stem or directory");
    sc->add_option("--levels", c.levels, "exhaustion / dilation levels")->check(CLI::PositiveNumber);
    sc->add_option("--guard", c.guard, "rung resolution guard in cells")->check(CLI::PositiveNumber);
    sc->add_option("--ladder-tolerance", c.tolerance, "allowed rung pair change")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"large solutions and blow-up profiles for semilinear elliptic and parabolic problems"};
    app.set_help_flag("--help", "print help");  // -h is the grid spacing
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker cap for independent ladder rungs")->check(CLI::PositiveNumber);
    Common c;
    bool plot = false;
    app.add_flag("--emit-plot-data", plot, "write (x, value) / (t, value) CSV pairs");

    // run / verify
    std::string config_path, out_root;
    std::vector<std::string> only_checks;
    auto* run = app.add_subcommand("run", "run a JSON experiment config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_root, "artifact root (default: config output)");
    auto* verify = app.add_subcommand("verify", "run only the checks of a config");
    verify->add_option("config", config_path, "config file")->required();
    verify->add_option("--out", out_root, "artifact root");
    verify->add_option("--checks", only_checks, "bound ids overriding the config list")->delimiter(',');

    // check-f
    bool all = false;
    std::string condition;
    int N = 3;
    double a = kNaN, m = 0, box = 10, theta = 0.5, r_max = 100;
    auto* checkf = app.add_subcommand("check-f", "evaluate the conditions on f");
    checkf->add_option("--nl", c.nl, "nonlinearity")->required();
    checkf->add_flag("--all", all, "all six conditions");
    checkf->add_option("--condition", condition, "one of ko, ode, weak, exp_order, defect, theta");
    checkf->add_option("--a", a, "lower integration limit (default k0 + 1)");
    checkf->add_option("--N", N, "dimension for the weak singularity integral");
    checkf->add_option("--m", m, "defect floor");
    checkf->add_option("--box", box, "defect box size");
    checkf->add_option("--theta", theta, "scaling factor in (0,1)");
    checkf->add_option("--r-max", r_max, "scaling threshold search range");

    // phi
    std::vector<double> ts;
    std::vector<double> ks;
    auto* phi = app.add_subcommand("phi", "blow-up profile phi_bar(t) and t_k");
    phi->add_option("--nl", c.nl, "nonlinearity")->required();
    phi->add_option("--t", ts, "times")->delimiter(',');
    phi->add_option("--k", ks, "values whose t_k is wanted")->delimiter(',');
    phi->add_option("--out", c.out, "CSV of the profile table");

    // barrier
    std::vector<double> rhos;
    int dims = 0;
    auto* barrier = app.add_subcommand("barrier", "Keller barrier g(rho), or the ball large solution with --dims");
    barrier->add_option("--nl", c.nl, "nonlinearity")->required();
    barrier->add_option("--rho", rhos, "distances")->delimiter(',')->required();
    barrier->add_option("--dims", dims, "centre value of the ball of radius rho in N = 1, 2");

    auto* se = app.add_subcommand("solve-elliptic", "Dirichlet problem with data k, or a large solution");
    add_domain_opts(se, c);
    se->add_option("--k", c.k, "boundary value (omit for a limit)");
    se->add_option("--ladder", c.ladder, "maximal | minimal | exterior");

    auto* sp = app.add_subcommand("solve-parabolic", "implicit series with data k, or a large solution");
    add_domain_opts(sp, c);
    sp->add_option("--k", c.k, "boundary and initial value (omit for a limit)");
    sp->add_option("--ladder", c.ladder, "maximal | minimal | exterior");
    sp->add_option("--T", c.T, "final time")->check(CLI::PositiveNumber);
    sp->add_option("--dt", c.dt, "slice spacing (default h)");
    bool binary = false;
    sp->add_flag("--binary", binary, "one binary file instead of CSV per slice");

    auto* ladder = app.add_subcommand("ladder", "elliptic ladder with rung diagnostics");
    add_domain_opts(ladder, c);
    ladder->add_option("--ladder", c.ladder, "maximal | minimal | exterior");

    double h_topo = 1.0 / 32;
    std::string topo_domain;
    auto* topo = app.add_subcommand("topology", "discrete regularity criteria of a domain");
    topo->add_option("--domain", topo_domain, "named domain, JSON descriptor or file")->required();
    topo->add_option("--h", h_topo, "grid spacing")->check(CLI::PositiveNumber);

    auto* uq = app.add_subcommand("uniqueness", "elliptic and parabolic gaps plus the two-sided bound");
    add_domain_opts(uq, c);
    uq->add_option("--T", c.T, "final time")->check(CLI::PositiveNumber);
    uq->add_option("--dt", c.dt, "slice spacing (default h)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    set_thread_cap(threads);
    c.plot = plot;

    try {
        if (run->parsed() || verify->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            if (plot) cfg.emit_plot_data = true;
            if (verify->parsed() && !only_checks.empty()) {
                json j = cfg.to_json();
                j["checks"] = only_checks;
                cfg = ExperimentConfig::from_json(j);
            }
            const fs::path root = out_root.empty() ? fs::path(cfg.output) : fs::path(out_root);
            const RunResult r = run_experiment(cfg, root, std::cout);
            if (!r.error.empty()) std::cerr << r.error << "\n";
            std::cout << "artifacts: " << r.dir.string() << "\n";
            return r.exit_code;
        }

        const Nonlinearity nl = Nonlinearity::parse(c.nl);

        if (checkf->parsed()) {
            const double lo = std::isfinite(a) ? a : std::max(k_zero(nl), 0.0) + 1.0;
            std::vector<std::pair<std::string, std::function<ConditionVerdict()>>> rows = {
                {"ko", [&] { return keller_osserman(nl, lo); }},
                {"ode", [&] { return ode_blowup_condition(nl, lo); }},
                {"weak", [&] { return weak_singularity(nl, N, lo); }},
                {"exp_order", [&] { return exp_order_of_growth(nl); }},
                {"defect", [&] { return superadditivity_defect(nl, m, box); }},
                {"theta", [&] { return theta_scaling_threshold(nl, theta, r_max); }},
            };
            if (!all && condition.empty()) all = true;
            std::printf("%-20s %-7s %24s %24s  %s\n", "condition", "verdict", "value", "error", "flags");
            std::fflush(stdout);
            bool any = false;
            for (auto& [name, fn] : rows) {
                if (!all && name != condition) continue;
                any = true;
                try {
                    const auto v = fn();
                    print_verdict_row(std::string(to_string(v.condition)), v);
                } catch (const Error& e) {
                    std::cout << name << " error " << e.what() << "\n";
                }
            }
            if (!any) fail(ErrorCode::InvalidArgument, "unknown condition '" + condition + "'");
            return 0;
        }

        if (phi->parsed()) {
            std::cout << std::setprecision(15);
            for (double t : ts) std::cout << "phi_bar(" << t << ") = " << solve_phi_bar(nl, t) << "\n";
            for (double k : ks) std::cout << "t_k(" << k << ") = " << ode_time_to_infinity(nl, k) << "\n";
            if (!c.out.empty() || plot) {
                double t_lo = 1e-4, t_hi = 10;
                for (double t : ts) {
                    t_lo = std::min(t_lo, 0.5 * t);
                    t_hi = std::max(t_hi, 2 * t);
                }
                const auto prof = build_phi_bar(nl, t_lo, t_hi);
                std::ostringstream os;
                if (plot) write_pairs(os, "t", "value", prof.t(), prof.phi());
                else prof.write_csv(os);
                write_file(c.out.empty() ? "phi.csv" : c.out, os.str());
            }
            return 0;
        }

        if (barrier->parsed()) {
            std::cout << std::setprecision(15);
            for (double r : rhos) {
                if (dims > 0) std::cout << "ball(N=" << dims << ", rho=" << r << ") = " << solve_ball(nl, dims, r) << "\n";
                else std::cout << "g(" << r << ") = " << solve_keller(nl, r) << "\n";
            }
            return 0;
        }

        if (topo->parsed()) {
            const auto d = domain_from(topo_domain, h_topo);
            const auto rep = topo_check(*d);
            std::cout << rep.to_json().dump(2) << "\n";
            return 0;
        }

        const auto dom = domain_from(c.domain, c.h);
        const std::string out = c.out.empty() ? "out" : c.out;

        if (se->parsed() || ladder->parsed()) {
            const auto lo = c.ladder_options();
            ScalarField w = std::isfinite(c.k) && se->parsed()
                                ? solve_dirichlet(dom, nl, c.k, lo.solve)
                                : detail::solve_elliptic_choice(json(c.ladder), dom, nl, lo);
            if (ladder->parsed()) {
                json d = w.meta;
                d["rungs_chosen"] = choose_rungs(nl, dom->h, lo);
                std::cout << d.dump(2) << "\n";
            }
            save_field(out, w, nl);
            if (plot) {
                std::ostringstream os;
                write_profile_pairs(os, w);
                write_file(out + "_plot.csv", os.str());
            }
            std::cout << to_string(w.tag) << " max " << format_real(w.max_interior()) << " residual "
                      << format_real(w.residual_inf) << "\n";
            return 0;
        }

        if (sp->parsed()) {
            ParabolicLadderOptions po;
            po.ladder = c.ladder_options();
            TimeSeriesField u = std::isfinite(c.k)
                                    ? solve_parabolic(dom, c.T, c.step(), nl, c.k, po.step)
                                    : detail::solve_parabolic_choice(json(c.ladder), dom, c.T, c.step(), nl, po);
            save_series(out, "u", u, nl, binary);
            if (plot) {
                std::ostringstream os;
                write_time_pairs(os, u);
                write_file(fs::path(out) / "u_plot.csv", os.str());
            }
            std::cout << to_string(u.tag) << " slices " << u.size() << " residual " << format_real(u.residual_inf)
                      << "\n";
            return 0;
        }

        if (uq->parsed()) {
            UniquenessOptions uo;
            uo.ladder.ladder = c.ladder_options();
            uo.T = c.T;
            uo.dt = c.step();
            const auto res = uniqueness_experiment(dom, nl, uo);
            std::cout << res.to_json().dump(2) << "\n";
            return res.implication_consistent && res.c8.holds ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}
