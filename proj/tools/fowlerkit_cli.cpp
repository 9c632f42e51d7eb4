#include "fowlerkit/errors.hpp"
#include "fowlerkit/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace fowlerkit;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Cli {
    std::string config_path;
    std::string out_dir;
    std::string format = "json";
    std::optional<int> k_max;
    std::optional<double> horizon, budget, kbar, rhobar;
    std::optional<std::string> family;
};

RunConfig resolve(const Cli& cli) {
    json j = json::object();
    if (!cli.config_path.empty()) {
        std::ifstream in(cli.config_path);
        if (!in) throw DomainError("cannot open config file " + cli.config_path);
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw DomainError("config file " + cli.config_path + " is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw DomainError("config must be a flat JSON object");
    }
    if (cli.k_max) j["k_max"] = *cli.k_max;
    if (cli.horizon) j["horizon"] = *cli.horizon;
    if (cli.budget) j["budget"] = *cli.budget;
    if (cli.kbar) j["kbar"] = *cli.kbar;
    if (cli.rhobar) j["rhobar"] = *cli.rhobar;
    if (cli.family) j["family"] = *cli.family;
    return parse_config(j);
}

/// Writes JSON to <out>/<name>.json, or to stdout without --out.
class Sink {
public:
    explicit Sink(const Cli& cli) : cli_(cli) {
        if (!cli.out_dir.empty()) fs::create_directories(cli.out_dir);
        if (csv() && cli.out_dir.empty()) throw DomainError("--format csv|both needs --out <dir>");
    }
    bool json_on() const { return cli_.format != "csv"; }
    bool csv() const { return cli_.format != "json"; }
    /// Human-readable summary: stdout when reports go to files, stderr otherwise.
    std::ostream& summary() const { return cli_.out_dir.empty() ? std::cerr : std::cout; }

    void emit_json(const std::string& name, const json& j) const {
        if (!json_on()) return;
        if (cli_.out_dir.empty()) {
            write_json(std::cout, j);
            return;
        }
        std::ofstream os(path(name + ".json"));
        write_json(os, j);
    }
    std::ofstream file(const std::string& name) const { return std::ofstream(path(name)); }

private:
    fs::path path(const std::string& name) const { return fs::path(cli_.out_dir) / name; }
    const Cli& cli_;
};

std::string tag_slug(BranchTag t) {
    switch (t) {
        case BranchTag::UnstablePlus: return "unstable_plus";
        case BranchTag::UnstableMinus: return "unstable_minus";
        case BranchTag::StablePlus: return "stable_plus";
        case BranchTag::StableMinus: return "stable_minus";
    }
    return "branch";
}

constexpr BranchTag kTags[] = {BranchTag::UnstablePlus, BranchTag::UnstableMinus, BranchTag::StablePlus,
                               BranchTag::StableMinus};

int cmd_exponents(const RunConfig& cfg, const Sink& sink) {
    const auto sys = make_piecewise(cfg.problem);
    sink.emit_json("exponents", with_config(cfg, "exponents", {{"inner", side_json(sys.inner)},
                                                               {"outer", side_json(sys.outer)}}));
    if (sink.csv()) {
        auto os = sink.file("exponents.csv");
        os << "side,K,n,eta,q,delta,l,alpha,gamma,kappa,mu,lambda,Lambda,serrin,sobolev,hardy_upper,regime,panel,"
              "hamiltonian,critically_close\n";
        int id = 1;
        for (const Side* s : {&sys.inner, &sys.outer}) {
            const auto& e = s->exps;
            os << id++ << ',' << csv_real(s->K) << ',' << e.n << ',' << csv_real(e.eta) << ',' << csv_real(e.q) << ','
               << csv_real(e.delta) << ',' << csv_real(e.l) << ',' << csv_real(e.alpha) << ',' << csv_real(e.gamma)
               << ',' << csv_real(e.kappa) << ',' << csv_real(e.mu()) << ',' << csv_real(e.lambda) << ','
               << csv_real(e.Lambda) << ',' << csv_real(e.serrin) << ',' << csv_real(e.sobolev) << ','
               << e.hardy_upper.to_string() << ',' << to_string(e.regime) << ",\"" << portrait_panel(*s) << "\","
               << e.hamiltonian << ',' << e.critically_close << '\n';
        }
    }
    auto& out = sink.summary();
    out << "side 1 (r < rho): " << portrait_panel(sys.inner) << (sys.inner.exps.hamiltonian ? ", hamiltonian" : "")
        << '\n';
    out << "side 2 (r > rho): " << portrait_panel(sys.outer) << (sys.outer.exps.hamiltonian ? ", hamiltonian" : "")
        << '\n';
    return 0;
}

/// Every existing branch of both sides, traced independently.
std::vector<std::pair<int, ManifoldBranch>> trace_all(const PiecewiseSystem& sys, const TraceOptions& opts) {
    std::vector<std::pair<int, ManifoldBranch>> out;
    int id = 1;
    for (const Side* s : {&sys.inner, &sys.outer}) {
        for (BranchTag t : kTags)
            if (branch_exists(*s, t)) out.emplace_back(id, trace_manifold(*s, t, opts));
        ++id;
    }
    return out;
}

json emit_branches(const std::vector<std::pair<int, ManifoldBranch>>& branches, const Sink& sink) {
    json arr = json::array();
    for (const auto& [id, b] : branches) {
        json j = to_json(b);
        j["side"] = id;
        arr.push_back(j);
        if (sink.csv()) {
            auto os = sink.file("side" + std::to_string(id) + "_" + tag_slug(b.tag) + ".csv");
            write_branch_csv(os, b);
        }
    }
    return arr;
}

int cmd_manifolds(const RunConfig& cfg, const Sink& sink) {
    const auto sys = make_piecewise(cfg.problem);
    const auto branches = trace_all(sys, trace_options(cfg));
    const json arr = emit_branches(branches, sink);
    sink.emit_json("manifolds", with_config(cfg, "manifolds", arr));
    for (const auto& [id, b] : branches)
        sink.summary() << "side " << id << ' ' << to_string(b.tag) << ": arclength " << b.total_arclength() << ", "
                       << to_string(b.termination) << ", " << b.y_axis_crossings.size() << " y-axis crossings\n";
    return 0;
}

int cmd_portrait(const RunConfig& cfg, const Sink& sink) {
    const auto sys = make_piecewise(cfg.problem);
    const auto branches = trace_all(sys, trace_options(cfg));
    json body;
    body["branches"] = emit_branches(branches, sink);

    // Generic orbits: a ring of starting points around the origin, scaled to
    // the nontrivial equilibria when they exist.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    json eq_all = json::array(), trajs = json::array();
    int id = 1;
    for (const Side* s : {&sys.inner, &sys.outer}) {
        const auto eq = equilibria(*s);
        double scale = 1.0;
        for (const auto& e : eq)
            if (e.kind != EquilibriumKind::Origin) scale = std::hypot(e.location.x, e.location.y);
        if (sink.csv()) {
            auto os = sink.file("side" + std::to_string(id) + "_equilibria.csv");
            os << "kind,x,y,stability,E\n";
            for (const auto& e : eq)
                os << to_string(e.kind) << ',' << csv_real(e.location.x) << ',' << csv_real(e.location.y) << ','
                   << e.stability << ',' << csv_real(e.energy) << '\n';
        }
        json sj = side_json(*s);
        sj["side"] = id;
        eq_all.push_back(sj);

        EventSpec ev;
        ev.zero_floor = cfg.zero_floor;
        ev.blowup_threshold = cfg.blowup_threshold;
        ev.event_tol = cfg.event_tol;
        ev.arclength_budget = cfg.budget;
        IntegratorOptions io;
        io.rtol = std::max(cfg.rtol, 1e-10);
        io.atol = cfg.atol;
        const double horizon = std::min(cfg.horizon, 50.0);
        constexpr int kRing = 8;
        for (int i = 0; i < kRing; ++i) {
            double a = 2.0 * std::numbers::pi * (i + 0.5) / kRing;
            if (cfg.seed != 0) a += jitter(rng);
            const PhasePoint p0{0.0, 0.5 * scale * std::cos(a), 0.5 * scale * std::sin(a)};
            for (Direction dir : {Direction::Forward, Direction::Backward}) {
                const std::string name = "side" + std::to_string(id) + "_orbit" + std::to_string(i) +
                                         (dir == Direction::Forward ? "_fwd" : "_bwd");
                json tj{{"name", name}, {"side", id}, {"x0", p0.x}, {"y0", p0.y},
                        {"direction", dir == Direction::Forward ? "forward" : "backward"}};
                try {
                    const Trajectory tr = integrate(*s, p0, dir, horizon, ev, io);
                    tj["termination"] = std::string(to_string(tr.termination));
                    tj["end_time"] = tr.end_time();
                    if (sink.csv()) {
                        auto os = sink.file(name + ".csv");
                        write_trajectory_csv(os, tr, *s);
                    }
                } catch (const StepFailure& e) {
                    tj["termination"] = "step-failure";
                    tj["end_time"] = e.t;
                }
                trajs.push_back(tj);
            }
        }
        ++id;
    }
    body["sides"] = eq_all;
    body["orbits"] = trajs;
    sink.emit_json("portrait", with_config(cfg, "portrait", body));
    sink.summary() << "side 1: " << portrait_panel(sys.inner) << "\nside 2: " << portrait_panel(sys.outer) << '\n'
                   << branches.size() << " branches, " << trajs.size() << " orbits\n";
    return 0;
}

void structure_summary(std::ostream& os, const StructureReport& r) {
    const char* name = r.family == Family::D ? "D" : "L";
    os << "family " << name << " (" << r.hypotheses.setting << (r.hypotheses.monotone ? ", monotone" : "") << ")\n";
    std::ostringstream line;
    line.precision(15);
    for (const auto& p : r.points) {
        line.str("");
        line << name << '_' << p.k << " = " << p.value << "  " << p.verified.label()
             << (p.verified_ok ? "" : "  [verification mismatch]") << "  distance " << p.manifold_distance;
        os << line.str() << '\n';
    }
    for (const auto& c : r.intervals) os << "  (" << c.lo << ", " << c.hi << "): " << c.label << " -> " << c.end << '\n';
    if (r.intersections)
        for (const auto& q : r.intersections->first)
            os << "Q_" << q.j << " theta " << q.theta << (q.window_ok ? "" : " [outside window]")
               << (q.parity_ok ? "" : " [parity]") << " transversality " << q.transversality << '\n';
    os << "accumulation " << r.accumulation.value << (r.accumulation.bounded ? "" : " (lower bound: budget reached)")
       << '\n';
    for (const auto& w : r.warnings) os << "warning: " << w << '\n';
}

int cmd_structure(const RunConfig& cfg, const Sink& sink) {
    const auto sys = make_piecewise(cfg.problem);
    const auto r = find_structure(sys, cfg.family, structure_options(cfg));
    sink.emit_json("structure", with_config(cfg, "structure", to_json(r)));
    if (sink.csv()) {
        auto p = sink.file("structure_sequence.csv");
        auto i = sink.file("structure_intervals.csv");
        auto q = sink.file("structure_intersections.csv");
        write_structure_csv(p, i, q, r);
    }
    structure_summary(sink.summary(), r);
    return 0;
}

int cmd_scaling(const RunConfig& cfg, const Sink& sink) {
    if (cfg.family != Family::D) throw DomainError("scaling-check applies to the regular family D");
    auto opts = structure_options(cfg);
    opts.k_max = 0;
    opts.intersections = false;
    const auto base = find_structure(make_piecewise(cfg.problem), Family::D, opts);
    const auto s = scaling_report(base, cfg.kbar, cfg.rhobar, opts);
    sink.emit_json("scaling", with_config(cfg, "scaling", to_json(s)));
    if (sink.csv()) {
        auto os = sink.file("scaling.csv");
        os << "quantity,base,scaled,ratio,expected,relative_error\n";
        auto row = [&](const char* n, double b, double sc, double ex, double err) {
            os << n << ',' << csv_real(b) << ',' << csv_real(sc) << ',' << csv_real(sc / b) << ',' << csv_real(ex)
               << ',' << csv_real(err) << '\n';
        };
        row("R0", s.base.R0, s.scaled.R0, s.expected_R_ratio, s.R_error);
        row("U0", s.base.U0, s.scaled.U0, s.expected_U_ratio, s.U_error);
        row("D0", s.base.D0, s.scaled.D0, s.expected_D_ratio, s.D_error);
    }
    auto& out = sink.summary();
    out << "R0 ratio error " << s.R_error << ", U0 " << s.U_error << ", D0 " << s.D_error << ", residual "
        << s.residual << (s.passed ? "  PASS" : "  FAIL") << '\n';
    for (const auto& w : s.warnings) out << "warning: " << w << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fowler-transform phase-plane workbench"};
    app.require_subcommand(1);
    Cli cli;
    auto add_common = [&cli](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "flat JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", cli.out_dir, "output directory (JSON goes to stdout when omitted)");
        sub->add_option("--format", cli.format, "json, csv or both")
            ->check(CLI::IsMember({"json", "csv", "both"}));
        sub->add_option("--k-max", cli.k_max, "largest zero count k");
        sub->add_option("--horizon", cli.horizon, "Fowler-time horizon");
        sub->add_option("--budget", cli.budget, "arclength budget of traced branches");
        sub->add_option("--family", cli.family, "D (regular launch) or L (fast-decay launch)")
            ->check(CLI::IsMember({"D", "L"}));
    };
    auto* exps = app.add_subcommand("exponents", "exponents, regimes and portrait panels per side");
    auto* portrait = app.add_subcommand("portrait", "equilibria, branches and generic orbits as CSV");
    auto* manifolds = app.add_subcommand("manifolds", "trace every invariant-manifold branch");
    auto* structure = app.add_subcommand("structure", "sequence D_k or L_k with classes and intersections");
    auto* scaling = app.add_subcommand("scaling-check", "scaling of the first maximum in K and rho");
    for (auto* s : {exps, portrait, manifolds, structure, scaling}) add_common(s);
    scaling->add_option("--kbar", cli.kbar, "multiplier of K1 and K2");
    scaling->add_option("--rhobar", cli.rhobar, "switch radius of the scaled problem");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const RunConfig cfg = resolve(cli);
        const Sink sink(cli);
        if (exps->parsed()) return cmd_exponents(cfg, sink);
        if (portrait->parsed()) return cmd_portrait(cfg, sink);
        if (manifolds->parsed()) return cmd_manifolds(cfg, sink);
        if (structure->parsed()) return cmd_structure(cfg, sink);
        return cmd_scaling(cfg, sink);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
