#pragma once

// JSON experiment configs and the run pipeline behind `blowup_cli run`.
//
// {
//   "nl": "power:3" | {"kind": "power", "q": 3},
//   "domain": {"name": "disk"} | {"type": "interval", "a": 0, "b": 1},
//   "grid": {"h": 0.0078125},
//   "time": {"T": 2, "dt": 0.0078125},             optional
//   "ladder": {"levels": 3, "guard": 4, "tolerance": 0.1, "k": []},
//   "elliptic": "maximal" | "minimal" | "exterior" | "none" | {"k": 10},
//   "parabolic": same choices, needs "time",
//   "checks": ["B14", "B15", "B18", "Asym", ...],
//   "linear_solver": "cholesky" | "pcg",
//   "binary_series": false,
//   "emit_plot_data": false,
//   "output": "runs"
// }

#include <iostream>
#include <map>
#include <set>

#include "blowup/io.hpp"

namespace blowup {

struct ExperimentConfig {
    json nl;
    json domain;
    double h = 0;
    double T = 0, dt = 0;
    bool has_time = false;
    int levels = 3;
    double guard = 4.0;
    double ladder_tolerance = 0.1;
    std::vector<double> k_schedule;
    json elliptic = "maximal";
    json parabolic = "none";
    std::vector<std::string> checks;
    std::string linear_solver = "cholesky";
    bool binary_series = false;
    bool emit_plot_data = false;
    std::string output = "runs";

    static ExperimentConfig from_json(const json& j);
    json to_json() const;

    // hash of everything that affects the numbers (the output location does not)
    std::string hash() const
    {
        json j = to_json();
        j.erase("output");
        j.erase("emit_plot_data");
        return config_hash(j);
    }

    LadderOptions ladder_options() const
    {
        LadderOptions o;
        o.levels = levels;
        o.guard = guard;
        o.tolerance = ladder_tolerance;
        o.k_ladder = k_schedule;
        o.solve.linear = linear_solver == "pcg" ? LinearSolverKind::Pcg : LinearSolverKind::Cholesky;
        return o;
    }

    json domain_descriptor() const
    {
        json d;
        if (domain.contains("name")) {
            d = named_domain_descriptor(domain["name"].get<std::string>(), h);
        } else {
            d = domain;
            d["h"] = h;
        }
        return d;
    }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& msg) { fail(ErrorCode::ConfigInvalid, msg); }

inline void check_solve_choice(const json& c, const char* what)
{
    if (c.is_string()) {
        const auto s = c.get<std::string>();
        if (s == "maximal" || s == "minimal" || s == "exterior" || s == "none") return;
        config_error(std::string(what) + ": unknown choice '" + s + "'");
    }
    if (c.is_object() && c.contains("k") && c["k"].is_number()) {
        if (!std::isfinite(c["k"].get<double>())) config_error(std::string(what) + ".k must be finite");
        return;
    }
    config_error(std::string(what) + " must be maximal|minimal|exterior|none or {\"k\": value}");
}

inline const std::set<std::string>& known_checks()
{
    static const std::set<std::string> s = {"B4", "B6",  "B8",  "B9",   "B10", "B12", "B14", "B15",
                                            "B18", "C1", "C1'", "C8", "C13", "C14", "Asym", "Thm1"};
    return s;
}

} // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    using detail::config_error;
    if (!j.is_object()) config_error("config must be a JSON object");
    static const std::set<std::string> keys = {"nl",     "domain",    "grid",          "time",         "ladder",
                                               "elliptic", "parabolic", "checks",      "linear_solver",
                                               "binary_series", "emit_plot_data", "output", "deterministic"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key())) config_error("unknown key '" + it.key() + "'");
    ExperimentConfig c;
    try {
        if (!j.contains("nl")) config_error("missing nl");
        const Nonlinearity nl =
            j["nl"].is_string() ? Nonlinearity::parse(j["nl"].get<std::string>()) : Nonlinearity::from_json(j["nl"]);
        c.nl = nl.to_json();

        if (!j.contains("domain") || !j["domain"].is_object()) config_error("missing domain object");
        c.domain = j["domain"];
        c.domain.erase("h");
        if (!j.contains("grid") || !j["grid"].contains("h")) config_error("missing grid.h");
        c.h = j["grid"]["h"].get<double>();
        if (!(c.h > 0) || !std::isfinite(c.h)) config_error("grid.h must be positive");

        if (j.contains("time")) {
            c.has_time = true;
            c.T = j["time"].at("T").get<double>();
            c.dt = j["time"].at("dt").get<double>();
            if (!(c.dt > 0) || !std::isfinite(c.dt)) config_error("time.dt must be positive");
            if (!(c.T >= c.dt)) config_error("time.T must be at least dt");
        }
        if (j.contains("ladder")) {
            const json& l = j["ladder"];
            c.levels = l.value("levels", c.levels);
            c.guard = l.value("guard", c.guard);
            c.ladder_tolerance = l.value("tolerance", c.ladder_tolerance);
            if (l.contains("k")) c.k_schedule = l["k"].get<std::vector<double>>();
            if (c.levels < 1) config_error("ladder.levels must be at least 1");
            if (!(c.guard > 0)) config_error("ladder.guard must be positive");
            if (!(c.ladder_tolerance > 0)) config_error("ladder.tolerance must be positive");
            for (double k : c.k_schedule)
                if (!std::isfinite(k)) config_error("ladder.k entries must be finite");
        }
        if (j.contains("elliptic")) c.elliptic = j["elliptic"];
        if (j.contains("parabolic")) c.parabolic = j["parabolic"];
        detail::check_solve_choice(c.elliptic, "elliptic");
        detail::check_solve_choice(c.parabolic, "parabolic");
        if (c.parabolic != "none" && !c.has_time) config_error("parabolic solve needs a time block");
        if (c.has_time && c.dt > c.h * (1 + 1e-12)) config_error("time.dt must not exceed grid.h");

        if (j.contains("checks")) c.checks = j["checks"].get<std::vector<std::string>>();
        for (const auto& s : c.checks)
            if (!detail::known_checks().count(s)) config_error("unknown check '" + s + "'");
        c.linear_solver = j.value("linear_solver", c.linear_solver);
        if (c.linear_solver != "cholesky" && c.linear_solver != "pcg") config_error("linear_solver: cholesky|pcg");
        c.binary_series = j.value("binary_series", false);
        c.emit_plot_data = j.value("emit_plot_data", false);
        c.output = j.value("output", c.output);
        if (j.contains("deterministic") && !j["deterministic"].get<bool>())
            config_error("deterministic is always true");

        // the domain must rasterize
        make_domain(c.domain_descriptor());
    } catch (const json::exception& e) {
        config_error(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        config_error(e.what());
    }
    return c;
}

inline json ExperimentConfig::to_json() const
{
    json j = {{"nl", nl},
              {"domain", domain},
              {"grid", {{"h", h}}},
              {"ladder", {{"levels", levels}, {"guard", guard}, {"tolerance", ladder_tolerance}, {"k", k_schedule}}},
              {"elliptic", elliptic},
              {"parabolic", parabolic},
              {"checks", checks},
              {"linear_solver", linear_solver},
              {"binary_series", binary_series},
              {"emit_plot_data", emit_plot_data},
              {"output", output},
              {"deterministic", true}};
    if (has_time) j["time"] = {{"T", T}, {"dt", dt}};
    return j;
}

inline ExperimentConfig load_config(const fs::path& p)
{
    json j;
    try {
        j = json::parse(read_file(p));
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigInvalid, std::string("config does not parse: ") + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::ConfigInvalid, e.what());
    }
    return ExperimentConfig::from_json(j);
}

// ------------------------------------------------------------------ run

struct RunResult {
    int exit_code = 0;
    fs::path dir;
    std::vector<json> reports;
    std::string error;
};

namespace detail {

inline ScalarField solve_elliptic_choice(const json& choice, std::shared_ptr<const GridDomain> dom,
                                         const Nonlinearity& nl, const LadderOptions& lo)
{
    if (choice.is_object()) return solve_dirichlet(dom, nl, choice["k"].get<double>(), lo.solve);
    const auto s = choice.get<std::string>();
    if (s == "minimal") return minimal_large_solution(dom, nl, lo);
    if (s == "exterior") return exterior_maximal_solution(dom, nl, lo);
    return maximal_solution(dom, nl, lo);
}

inline TimeSeriesField solve_parabolic_choice(const json& choice, std::shared_ptr<const GridDomain> dom, double T,
                                              double dt, const Nonlinearity& nl, const ParabolicLadderOptions& po)
{
    if (choice.is_object()) return solve_parabolic(dom, T, dt, nl, choice["k"].get<double>(), po.step);
    const auto s = choice.get<std::string>();
    if (s == "minimal") return minimal_large_parabolic(dom, T, dt, nl, po);
    if (s == "exterior") return exterior_maximal_parabolic(dom, T, dt, nl, po);
    return maximal_parabolic(dom, T, dt, nl, po);
}

inline json failed_report(const std::string& id, const Error& e)
{
    return {{"bound_id", id}, {"holds", false}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}};
}

} // namespace detail

// Runs the configured pipeline into <out_root>/<hash>.  Exit code 0 when all
// checks hold, 1 when some check fails, 2 on a bad config, 3 when a solver
// or ladder fails.
inline RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_root, std::ostream& log)
{
    RunResult res;
    res.dir = out_root / cfg.hash();
    try {
        fs::create_directories(res.dir);
        write_file(res.dir / "config.json", cfg.to_json().dump(2) + "\n");
        const Nonlinearity nl = Nonlinearity::from_json(cfg.nl);
        auto dom = share(make_domain(cfg.domain_descriptor()));
        {
            std::ostringstream os;
            dom->write_pgm(os);
            write_file(res.dir / "mask.pgm", os.str());
        }
        const LadderOptions lo = cfg.ladder_options();
        ParabolicLadderOptions po;
        po.ladder = lo;
        po.step.solve = lo.solve;

        std::optional<ScalarField> w;
        std::optional<TimeSeriesField> u;
        if (cfg.elliptic != "none") {
            w = detail::solve_elliptic_choice(cfg.elliptic, dom, nl, lo);
            save_field(res.dir / "w", *w, nl);
            log << "elliptic " << to_string(w->tag) << " residual " << format_real(w->residual_inf) << "\n";
        }
        if (cfg.parabolic != "none") {
            u = detail::solve_parabolic_choice(cfg.parabolic, dom, cfg.T, cfg.dt, nl, po);
            save_series(res.dir / "u", "u", *u, nl, cfg.binary_series);
            log << "parabolic " << to_string(u->tag) << " slices " << u->size() << "\n";
        }
        const double t_hi = 10 * std::max(1.0, cfg.has_time ? cfg.T : 1.0);
        std::optional<BlowupProfile> phi;
        if (nl.f(1e6) > 0) {
            try {
                phi = build_phi_bar(nl, 1e-4 * std::min(cfg.h, cfg.has_time ? cfg.dt : cfg.h), t_hi);
                std::ostringstream os;
                phi->write_csv(os);
                write_file(res.dir / "phi.csv", os.str());
            } catch (const Error& e) {
                log << "no phi_bar: " << e.what() << "\n";
            }
        }
        if (cfg.emit_plot_data) {
            if (w) {
                std::ostringstream os;
                write_profile_pairs(os, *w);
                write_file(res.dir / "plot" / "w_x.csv", os.str());
            }
            if (u) {
                std::ostringstream os;
                write_time_pairs(os, *u);
                write_file(res.dir / "plot" / "u_t.csv", os.str());
            }
        }

        // checks
        bool all = true;
        std::optional<UniquenessResult> uniq;
        for (const auto& id : cfg.checks) {
            json rep;
            try {
                auto need_w = [&] {
                    if (!w) fail(ErrorCode::InvalidArgument, id + " needs an elliptic field");
                };
                auto need_u = [&] {
                    need_w();
                    if (!u) fail(ErrorCode::InvalidArgument, id + " needs a parabolic field");
                    if (!phi) fail(ErrorCode::InvalidArgument, id + " needs phi_bar");
                };
                if (id == "B4" || id == "B6") {
                    need_w();
                    if ((id == "B6") != w->is_limit())
                        fail(ErrorCode::WrongLadder, id + " does not apply to a " + std::string(to_string(w->tag)) +
                                                         " field");
                    const auto df = distance_field(*dom);
                    auto ball = build_ball_barrier(nl, dom->dims, 0.5 * dom->h, 2 * std::max(df.max(), dom->h));
                    rep = check_ball_barrier(*w, ball).to_json();
                } else if (id == "B8" || id == "B9" || id == "B10" || id == "B14" || id == "C1" || id == "C13") {
                    need_u();
                    static const std::map<std::string, LowerVariant> v = {
                        {"B8", LowerVariant::B8},   {"B9", LowerVariant::B9}, {"B10", LowerVariant::B10_with_tk},
                        {"B14", LowerVariant::B14}, {"C1", LowerVariant::C1}, {"C13", LowerVariant::C13}};
                    rep = check_lower_sandwich(*u, *w, *phi, v.at(id)).to_json();
                } else if (id == "B12" || id == "B15" || id == "C1'" || id == "C14") {
                    need_u();
                    static const std::map<std::string, UpperVariant> v = {{"B12", UpperVariant::B12_with_tk},
                                                                          {"B15", UpperVariant::B15},
                                                                          {"C1'", UpperVariant::C1p},
                                                                          {"C14", UpperVariant::C14}};
                    const double L = defect_constant(nl, defect_floor(*w, *phi, cfg.T));
                    rep = check_upper_sandwich(*u, *w, *phi, L, cfg.T, v.at(id)).to_json();
                } else if (id == "B18") {
                    if (!u) fail(ErrorCode::InvalidArgument, "B18 needs a parabolic field");
                    rep = check_time_monotone(*u).to_json();
                } else if (id == "Asym") {
                    need_u();
                    rep = check_long_time(*u, *w).to_json();
                } else if (id == "Thm1" || id == "C8") {
                    if (!cfg.has_time) fail(ErrorCode::InvalidArgument, id + " needs a time block");
                    if (!uniq) {
                        UniquenessOptions uo;
                        uo.ladder = po;
                        uo.T = cfg.T;
                        uo.dt = cfg.dt;
                        uniq = uniqueness_experiment(dom, nl, uo);
                        write_file(res.dir / "uniqueness.json", uniq->to_json().dump(2) + "\n");
                    }
                    rep = (id == "Thm1" ? uniq->thm1 : uniq->c8).to_json();
                }
            } catch (const Error& e) {
                // contract violations of a check fail that check; solver
                // failures abort the run
                switch (e.code()) {
                case ErrorCode::WrongLadder:
                case ErrorCode::HorizonTooShort:
                case ErrorCode::GridMismatch:
                case ErrorCode::FloorUndefined:
                case ErrorCode::HypothesisFailed:
                case ErrorCode::InvalidArgument: rep = detail::failed_report(id, e); break;
                default: throw;
                }
            }
            rep["requested"] = id;
            all = all && rep.value("holds", false);
            log << id << ": " << (rep.value("holds", false) ? "holds" : "FAILS");
            if (rep.contains("error")) log << " (" << rep["error"].get<std::string>() << ")";
            log << "\n";
            res.reports.push_back(rep);
        }
        write_file(res.dir / "reports.json", json(res.reports).dump(2) + "\n");
        res.exit_code = all ? 0 : 1;
    } catch (const Error& e) {
        res.error = e.what();
        res.exit_code = e.code() == ErrorCode::ConfigInvalid ? 2 : 3;
    } catch (const std::exception& e) {
        res.error = e.what();
        res.exit_code = 3;
    }
    return res;
}

} // namespace blowup
