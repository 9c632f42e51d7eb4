#pragma once

#include "fowlerkit/params.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fowlerkit {

/// Point of the Fowler phase plane; t = ln r.
struct PhasePoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

/// Point of the radial problem: u(r), u'(r), r.
struct RadialPoint {
    double u = 0.0;
    double du = 0.0;
    double r = 1.0;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 v);

/// x = u r^alpha, y = u' r^(alpha+1), t = ln r. Throws DomainError if r <= 0.
PhasePoint to_fowler(const RadialPoint& p, double alpha);
RadialPoint from_fowler(const PhasePoint& q, double alpha);

/// Reaction term g_l of the autonomous Fowler system, with optional closed-form
/// primitive and derivative. The default is the power law x|x|^(q-2).
class Nonlinearity {
public:
    using Fn = std::function<double(double)>;

    /// coef * x|x|^(q-2), times ln(1+|x|) when log_factor is set.
    struct Term {
        double coef = 1.0;
        double q = 4.0;
        bool log_factor = false;
    };

    /// Behaviour near zero: g(x) ~ coef * x|x|^(exponent-2).
    struct Leading {
        double coef;
        double exponent;
    };

    static Nonlinearity power(double q);
    static Nonlinearity composite(std::vector<Term> terms);
    /// A user evaluator. Primitive falls back to quadrature and derivative to
    /// central differences when not supplied.
    static Nonlinearity custom(std::string name, Fn value, Fn primitive = {}, Fn derivative = {},
                               std::optional<Leading> leading = std::nullopt);

    double operator()(double x) const { return value_(x); }
    /// Integral of g from 0 to x.
    double primitive(double x) const;
    double derivative(double x) const;
    const std::optional<Leading>& leading() const { return leading_; }
    /// Exponent q when g is exactly x|x|^(q-2) (unit coefficient).
    std::optional<double> pure_power() const { return pure_power_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    Fn value_;
    Fn primitive_;
    Fn derivative_;
    std::optional<Leading> leading_;
    std::optional<double> pure_power_;
};

/// One autonomous half of the problem: exponents, reaction amplitude and nonlinearity.
struct Side {
    ExponentSet exps;
    double K = 1.0;
    Nonlinearity g = Nonlinearity::power(4.0);
};

Side make_side(int n, double eta, double K, double q, double delta);

/// Right-hand side of the autonomous system:
///   x' = alpha x + y,   y' = -eta x + gamma y - K g(x).
Vec2 vector_field(double x, double y, const Side& side);
inline Vec2 vector_field(const PhasePoint& p, const Side& side) { return vector_field(p.x, p.y, side); }

/// E = (alpha x + y)^2/2 + (alpha gamma + eta) x^2/2 + K G(x), G' = g.
double energy(double x, double y, const Side& side);
/// dE/dt along the flow: (alpha + gamma)(alpha x + y)^2.
double energy_rate(double x, double y, const Side& side);

/// Which side owns the switch time t = 0.
enum class Approach { FromBelow, FromAbove };

/// The switched system: `inner` rules t <= 0 (r <= 1), `outer` rules t >= 0.
/// The switch radius is normalized to 1; `rho` records the physical radius.
struct PiecewiseSystem {
    Side inner;
    Side outer;
    double rho = 1.0;
    ProblemConfig physical;  // un-normalized parameters

    const Side& side_at(double t, Approach at_switch) const {
        if (t < 0.0) return inner;
        if (t > 0.0) return outer;
        return at_switch == Approach::FromBelow ? inner : outer;
    }
};

/// Builds the switched system, normalizing a general switch radius away via
/// K_i -> rho^(2+delta_i) K_i. Throws DomainError on invalid parameters.
PiecewiseSystem make_piecewise(const ProblemConfig& cfg);
PiecewiseSystem make_piecewise(const ProblemConfig& cfg, Nonlinearity g_inner, Nonlinearity g_outer);

Vec2 piecewise_field(const PhasePoint& p, const PiecewiseSystem& sys, Approach at_switch = Approach::FromBelow);

/// Physical radius / value conversions for the normalized system.
inline double physical_radius(const PiecewiseSystem& sys, double r_normalized) { return sys.rho * r_normalized; }

struct G0Clause {
    std::string name;
    bool passed = true;
    std::optional<double> first_violation;  // grid point where the clause first failed
};

struct G0Report {
    bool passed = true;
    std::vector<G0Clause> clauses;
};

struct G0Grid {
    double x_min = 1e-6;
    double x_max = 1e6;
    int points_per_sign = 512;
    /// |g(x_min)/x_min| must not exceed this for the g'(0) = 0 clause.
    double slope_at_zero_tol = 1e-3;
    /// Minimum log-log slope of g(x)/x over the top decade for the growth clause.
    double growth_slope_min = 1e-3;
};

/// Numerical surrogate for the structural assumption on g: g(0)=g'(0)=0,
/// g(x)/x positive, decreasing on x<0, increasing on x>0, unbounded at +-infinity.
G0Report validate_G0(const Nonlinearity& g, const G0Grid& grid = {});

}  // namespace fowlerkit
