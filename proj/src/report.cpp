#include "fowlerkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace fowlerkit {

using json = nlohmann::json;

namespace {

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt(const std::optional<double>& v) { return v ? real_or_null(*v) : json(nullptr); }

json threshold(const Threshold& t) { return t.is_unbounded() ? json("unbounded") : json(t.value()); }

std::string_view kind_name(EndClass::Kind k) {
    switch (k) {
        case EndClass::Kind::Regular: return "regular";
        case EndClass::Kind::Singular: return "singular";
        case EndClass::Kind::FastDecay: return "fast-decay";
        case EndClass::Kind::SlowDecay: return "slow-decay";
        case EndClass::Kind::BlowUp: return "blow-up";
        case EndClass::Kind::Unresolved: return "unresolved";
    }
    return "?";
}

}  // namespace

std::string csv_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string portrait_panel(const Side& side) {
    const auto& e = side.exps;
    std::string s(to_string(e.regime));
    if (side.K < 0.0) return s + ", K<0 panel";
    if (side.K == 0.0) return s + ", linear";
    s += ", K>0 panel, ";
    if (e.hamiltonian) return s + "l=2^*";
    return s + (e.l > e.sobolev ? "l>2^*" : "l<2^*");
}

json to_json(const ExponentSet& e) {
    json j;
    j["n"] = e.n;
    j["eta"] = e.eta;
    j["q"] = e.q;
    j["delta"] = e.delta;
    j["l"] = e.l;
    j["alpha"] = e.alpha;
    j["gamma"] = e.gamma;
    j["kappa"] = e.kappa;
    j["mu"] = e.mu();
    j["lambda"] = e.lambda;
    j["Lambda"] = e.Lambda;
    j["serrin"] = e.serrin;
    j["sobolev"] = e.sobolev;
    j["hardy_upper"] = threshold(e.hardy_upper);
    j["regime"] = std::string(to_string(e.regime));
    j["hamiltonian"] = e.hamiltonian;
    j["critically_close"] = e.critically_close;
    return j;
}

json side_json(const Side& side) {
    json j = to_json(side.exps);
    j["K"] = side.K;
    j["panel"] = portrait_panel(side);
    json eq = json::array();
    for (const auto& q : equilibria(side)) {
        eq.push_back({{"kind", std::string(to_string(q.kind))},
                      {"x", q.location.x},
                      {"y", q.location.y},
                      {"stability", q.stability},
                      {"energy", real_or_null(q.energy)},
                      {"trace", q.trace},
                      {"determinant", q.determinant}});
    }
    j["equilibria"] = eq;
    return j;
}

json to_json(const EndClass& c) {
    return {{"kind", std::string(kind_name(c.kind))},
            {"short", std::string(short_name(c.kind))},
            {"rate", std::string(to_string(c.rate))},
            {"value", opt(c.value)},
            {"exponent", opt(c.exponent)},
            {"fit_error", opt(c.fit_error)},
            {"sign", c.sign}};
}

json to_json(const SolutionClass& c) {
    return {{"label", c.label()},
            {"origin", to_json(c.origin)},
            {"infinity", to_json(c.infinity)},
            {"zeros", c.zeros},
            {"degenerate", c.degenerate}};
}

json to_json(const IntersectionPoint& p) {
    return {{"j", p.j},
            {"x", p.q.x},
            {"y", p.q.y},
            {"branch", std::string(to_string(p.branch))},
            {"theta", p.theta},
            {"launch_arclength", p.launch_arclength},
            {"spiral_arclength", p.spiral_arclength},
            {"parameter", p.parameter},
            {"transversality", p.transversality},
            {"window_ok", p.window_ok},
            {"parity_ok", p.parity_ok}};
}

json to_json(const ManifoldBranch& b) {
    json j;
    j["tag"] = std::string(to_string(b.tag));
    j["center"] = b.center;
    j["epsilon"] = b.epsilon;
    j["seed"] = {b.seed.x, b.seed.y};
    j["seed_time"] = b.seed_time;
    j["rate"] = b.rate;
    j["total_arclength"] = b.total_arclength();
    j["termination"] = std::string(to_string(b.termination));
    j["converged_to"] = b.converged_to ? json(std::string(to_string(*b.converged_to))) : json(nullptr);
    j["seed_discrepancy"] = opt(b.seed_discrepancy);
    j["center_rate_error"] = opt(b.center_rate_error);
    j["y_axis_crossings"] = b.y_axis_crossings.size();
    j["x_axis_crossings"] = b.x_axis_crossings.size();
    j["points"] = b.points.size();
    return j;
}

json to_json(const StructureReport& r) {
    const PiecewiseSystem sys = make_piecewise(r.config);
    json j;
    j["family"] = std::string(to_string(r.family));
    j["setting"] = r.hypotheses.setting;
    j["monotone"] = r.hypotheses.monotone;
    j["hypotheses"] = r.hypotheses.clauses;
    j["inner"] = side_json(sys.inner);
    j["outer"] = side_json(sys.outer);
    json pts = json::array();
    for (const auto& p : r.points) {
        pts.push_back({{"k", p.k},
                       {"value", p.value},
                       {"bracket", {p.bracket_lo, p.bracket_hi}},
                       {"arclength", p.arclength},
                       {"arclength_bracket", {p.arclength_lo, p.arclength_hi}},
                       {"achieved_rtol", p.achieved_rtol},
                       {"verified", to_json(p.verified)},
                       {"verified_ok", p.verified_ok},
                       {"manifold_distance", p.manifold_distance},
                       {"tilde", opt(p.tilde)},
                       {"tilde_equals_previous", p.tilde_equals_previous}});
    }
    j["sequence"] = pts;
    json iv = json::array();
    for (const auto& c : r.intervals)
        iv.push_back({{"lo", c.lo}, {"hi", c.hi}, {"label", c.label}, {"end", c.end}, {"zeros", c.zeros}});
    j["intervals"] = iv;
    if (r.intersections) {
        const auto& t = *r.intersections;
        json q = json::array(), qs = json::array(), all = json::array();
        for (std::size_t i = 0; i < t.first.size(); ++i) {
            json e = to_json(t.first[i]);
            e["no_reentry"] = static_cast<bool>(t.no_reentry[i]);
            q.push_back(e);
            qs.push_back(to_json(t.last[i]));
        }
        for (const auto& p : t.all) all.push_back(to_json(p));
        j["intersections"] = {{"first", q},
                              {"last", qs},
                              {"all", all},
                              {"launch_budget", t.launch_budget},
                              {"spiral_budget", t.spiral_budget}};
    } else {
        j["intersections"] = nullptr;
    }
    j["accumulation"] = {{"value", real_or_null(r.accumulation.value)}, {"bounded", r.accumulation.bounded}};
    j["scan"] = {{"arclength_lo", r.scan_lo}, {"arclength_hi", r.scan_hi}, {"flips", r.flips}};
    j["warnings"] = r.warnings;
    return j;
}

json to_json(const ScalingCheck& s) {
    auto md = [](const MaximumData& m) { return json{{"R0", m.R0}, {"U0", m.U0}, {"D0", m.D0}}; };
    return {{"Kbar", s.Kbar},
            {"rhobar", s.rhobar},
            {"base", md(s.base)},
            {"scaled", md(s.scaled)},
            {"expected_ratio", {{"R0", s.expected_R_ratio}, {"U0", s.expected_U_ratio}, {"D0", s.expected_D_ratio}}},
            {"relative_error", {{"R0", s.R_error}, {"U0", s.U_error}, {"D0", s.D_error}}},
            {"residual", s.residual},
            {"exact_law", s.exact_law},
            {"passed", s.passed},
            {"warnings", s.warnings}};
}

json with_config(const RunConfig& cfg, const std::string& key, json body) {
    return {{"config", to_json(cfg)}, {key, std::move(body)}};
}

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

void write_structure_csv(std::ostream& points, std::ostream& intervals, std::ostream& intersections,
                         const StructureReport& r) {
    points << "k,value,bracket_lo,bracket_hi,arclength,achieved_rtol,class,verified_ok,manifold_distance,tilde\n";
    for (const auto& p : r.points)
        points << p.k << ',' << csv_real(p.value) << ',' << csv_real(p.bracket_lo) << ',' << csv_real(p.bracket_hi)
               << ',' << csv_real(p.arclength) << ',' << csv_real(p.achieved_rtol) << ",\"" << p.verified.label()
               << "\"," << (p.verified_ok ? 1 : 0) << ',' << csv_real(p.manifold_distance) << ','
               << (p.tilde ? csv_real(*p.tilde) : std::string()) << '\n';
    intervals << "lo,hi,class,end,zeros\n";
    for (const auto& c : r.intervals)
        intervals << csv_real(c.lo) << ',' << csv_real(c.hi) << ",\"" << c.label << "\"," << c.end << ',' << c.zeros
                  << '\n';
    intersections << "j,x,y,branch,theta,launch_arclength,parameter,transversality,window_ok,parity_ok\n";
    if (r.intersections)
        for (const auto& p : r.intersections->first)
            intersections << p.j << ',' << csv_real(p.q.x) << ',' << csv_real(p.q.y) << ',' << to_string(p.branch)
                          << ',' << csv_real(p.theta) << ',' << csv_real(p.launch_arclength) << ','
                          << csv_real(p.parameter) << ',' << csv_real(p.transversality) << ','
                          << (p.window_ok ? 1 : 0) << ',' << (p.parity_ok ? 1 : 0) << '\n';
}

}  // namespace fowlerkit
