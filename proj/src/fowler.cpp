#include "fowlerkit/fowler.hpp"

#include "fowlerkit/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace fowlerkit {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

PhasePoint to_fowler(const RadialPoint& p, double alpha) {
    if (!(p.r > 0.0)) throw DomainError("radius must be positive");
    return {p.u * std::pow(p.r, alpha), p.du * std::pow(p.r, alpha + 1.0), std::log(p.r)};
}

RadialPoint from_fowler(const PhasePoint& q, double alpha) {
    const double r = std::exp(q.t);
    return {q.x * std::exp(-alpha * q.t), q.y * std::exp(-(alpha + 1.0) * q.t), r};
}

namespace {

double signed_pow(double x, double q) { return x * std::pow(std::abs(x), q - 2.0); }

}  // namespace

Nonlinearity Nonlinearity::power(double q) {
    Nonlinearity g;
    g.name_ = "power(q=" + std::to_string(q) + ")";
    g.value_ = [q](double x) { return signed_pow(x, q); };
    g.primitive_ = [q](double x) { return std::pow(std::abs(x), q) / q; };
    g.derivative_ = [q](double x) { return (q - 1.0) * std::pow(std::abs(x), q - 2.0); };
    g.leading_ = Leading{1.0, q};
    g.pure_power_ = q;
    return g;
}

Nonlinearity Nonlinearity::composite(std::vector<Term> terms) {
    if (terms.empty()) throw DomainError("composite nonlinearity needs at least one term");
    Nonlinearity g;
    g.name_ = "composite";
    g.value_ = [terms](double x) {
        double s = 0.0;
        for (const auto& tm : terms) {
            double v = tm.coef * signed_pow(x, tm.q);
            if (tm.log_factor) v *= std::log1p(std::abs(x));
            s += v;
        }
        return s;
    };
    g.derivative_ = [terms](double x) {
        const double ax = std::abs(x);
        double s = 0.0;
        for (const auto& tm : terms) {
            const double p = std::pow(ax, tm.q - 2.0);
            if (tm.log_factor)
                s += tm.coef * ((tm.q - 1.0) * p * std::log1p(ax) + p * ax / (1.0 + ax));
            else
                s += tm.coef * (tm.q - 1.0) * p;
        }
        return s;
    };
    bool any_log = false;
    for (const auto& tm : terms) any_log = any_log || tm.log_factor;
    if (!any_log) {
        g.primitive_ = [terms](double x) {
            double s = 0.0;
            for (const auto& tm : terms) s += tm.coef * std::pow(std::abs(x), tm.q) / tm.q;
            return s;
        };
    }
    // ln(1+|x|) ~ |x| near zero raises the effective exponent by one.
    double lead_exp = std::numeric_limits<double>::infinity();
    for (const auto& tm : terms)
        if (tm.coef != 0.0) lead_exp = std::min(lead_exp, tm.q + (tm.log_factor ? 1.0 : 0.0));
    if (std::isfinite(lead_exp)) {
        double c = 0.0;
        for (const auto& tm : terms)
            if (tm.q + (tm.log_factor ? 1.0 : 0.0) == lead_exp) c += tm.coef;
        g.leading_ = Leading{c, lead_exp};
    }
    if (terms.size() == 1 && !terms[0].log_factor && terms[0].coef == 1.0) g.pure_power_ = terms[0].q;
    return g;
}

Nonlinearity Nonlinearity::custom(std::string name, Fn value, Fn primitive, Fn derivative,
                                  std::optional<Leading> leading) {
    Nonlinearity g;
    g.name_ = std::move(name);
    g.value_ = std::move(value);
    g.primitive_ = std::move(primitive);
    g.derivative_ = std::move(derivative);
    g.leading_ = leading;
    return g;
}

double Nonlinearity::primitive(double x) const {
    if (primitive_) return primitive_(x);
    if (x == 0.0) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(value_, 0.0, x, 15, 1e-13);
}

double Nonlinearity::derivative(double x) const {
    if (derivative_) return derivative_(x);
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    return (value_(x + h) - value_(x - h)) / (2.0 * h);
}

Side make_side(int n, double eta, double K, double q, double delta) {
    return Side{derive_exponent_set(n, eta, q, delta), K, Nonlinearity::power(q)};
}

Vec2 vector_field(double x, double y, const Side& s) {
    const auto& e = s.exps;
    return {e.alpha * x + y, -e.eta * x + e.gamma * y - s.K * s.g(x)};
}

double energy(double x, double y, const Side& s) {
    const auto& e = s.exps;
    const double w = e.alpha * x + y;
    return 0.5 * w * w + 0.5 * e.linear_coupling() * x * x + s.K * s.g.primitive(x);
}

double energy_rate(double x, double y, const Side& s) {
    const auto& e = s.exps;
    const double w = e.alpha * x + y;
    return (e.alpha + e.gamma) * w * w;
}

PiecewiseSystem make_piecewise(const ProblemConfig& cfg) {
    return make_piecewise(cfg, Nonlinearity::power(cfg.q1), Nonlinearity::power(cfg.q2));
}

PiecewiseSystem make_piecewise(const ProblemConfig& cfg, Nonlinearity g_inner, Nonlinearity g_outer) {
    validate(cfg);
    // r = rho * r~ keeps u unchanged and rescales K_i by rho^(2+delta_i).
    const double K1 = std::pow(cfg.rho, 2.0 + cfg.delta1) * cfg.K1;
    const double K2 = std::pow(cfg.rho, 2.0 + cfg.delta2) * cfg.K2;
    PiecewiseSystem sys{
        .inner = Side{derive_exponent_set(cfg.n, cfg.eta, cfg.q1, cfg.delta1), K1, std::move(g_inner)},
        .outer = Side{derive_exponent_set(cfg.n, cfg.eta, cfg.q2, cfg.delta2), K2, std::move(g_outer)},
        .rho = cfg.rho,
        .physical = cfg,
    };
    return sys;
}

Vec2 piecewise_field(const PhasePoint& p, const PiecewiseSystem& sys, Approach at_switch) {
    return vector_field(p.x, p.y, sys.side_at(p.t, at_switch));
}

G0Report validate_G0(const Nonlinearity& g, const G0Grid& grid) {
    G0Report rep;
    auto add = [&](std::string name, std::optional<double> bad) {
        G0Clause c{std::move(name), !bad.has_value(), bad};
        rep.passed = rep.passed && c.passed;
        rep.clauses.push_back(std::move(c));
    };

    const int m = std::max(grid.points_per_sign, 2);
    std::vector<double> xs(m);
    const double la = std::log(grid.x_min), lb = std::log(grid.x_max);
    for (int i = 0; i < m; ++i) xs[i] = std::exp(la + (lb - la) * i / (m - 1));

    add("g(0)=0", g(0.0) == 0.0 ? std::nullopt : std::optional<double>(0.0));

    {
        std::optional<double> bad;
        for (double s : {1.0, -1.0}) {
            const double x = s * xs.front();
            if (!bad && std::abs(g(x) / x) > grid.slope_at_zero_tol) bad = x;
        }
        add("g'(0)=0", bad);
    }

    {
        std::optional<double> bad;
        for (double s : {-1.0, 1.0})
            for (double a : xs) {
                const double x = s * a;
                const double r = g(x) / x;
                if (!bad && !(r > 0.0 && std::isfinite(r))) bad = x;
            }
        add("g(x)/x > 0", bad);
    }

    // On x<0 "decreasing in x" means increasing in |x|, the same as on x>0.
    auto monotone = [&](double s) -> std::optional<double> {
        double prev = g(s * xs[0]) / (s * xs[0]);
        for (int i = 1; i < m; ++i) {
            const double x = s * xs[i];
            const double r = g(x) / x;
            if (!(r > prev)) return x;
            prev = r;
        }
        return std::nullopt;
    };
    add("g(x)/x decreasing on x<0", monotone(-1.0));
    add("g(x)/x increasing on x>0", monotone(1.0));

    {
        std::optional<double> bad;
        for (double s : {-1.0, 1.0}) {
            const double hi = s * xs.back();
            const double lo = s * xs.back() / 10.0;
            const double slope = std::log((g(hi) / hi) / (g(lo) / lo)) / std::log(10.0);
            if (!bad && !(slope > grid.growth_slope_min)) bad = hi;
        }
        add("g(x)/x unbounded", bad);
    }
    return rep;
}

}  // namespace fowlerkit
