#pragma once

#include "fowlerkit/integrate.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fowlerkit {

enum class EquilibriumKind { Origin, PPlus, PMinus };
std::string_view to_string(EquilibriumKind k);

struct Equilibrium {
    EquilibriumKind kind;
    Vec2 location;
    /// "saddle", "node-stable", "focus-unstable", "center", ... For the origin
    /// this is the regime name.
    std::string stability;
    double energy = 0.0;
    double trace = 0.0;        // of the Jacobian
    double determinant = 0.0;  // of the Jacobian
};

/// Origin plus P+- when they exist: K > 0 in the saddle regime, or K < 0
/// outside the closed window [2_*, I].
std::vector<Equilibrium> equilibria(const Side& side);
bool has_nontrivial_equilibria(const Side& side);

inline double energy(const PhasePoint& p, const Side& side) { return energy(p.x, p.y, side); }

enum class BranchTag { UnstablePlus, UnstableMinus, StablePlus, StableMinus };
std::string_view to_string(BranchTag t);
inline bool is_unstable(BranchTag t) { return t == BranchTag::UnstablePlus || t == BranchTag::UnstableMinus; }
inline bool is_plus(BranchTag t) { return t == BranchTag::UnstablePlus || t == BranchTag::StablePlus; }

/// Whether the branch exists for this side. Unstable branches exist for an
/// unstable node or saddle origin and, with K < 0, along a center direction
/// that repels; stable branches symmetrically.
bool branch_exists(const Side& side, BranchTag tag);

/// y = slope x + corr x|x|^(power-2) near the origin, plus the rate of the
/// one-dimensional flow x' = rate x + corr x|x|^(power-2) on it.
struct SeedCurve {
    double slope = 0.0;
    double corr = 0.0;
    double power = 0.0;
    double rate = 0.0;
    bool center = false;
};
SeedCurve seed_curve(const Side& side, BranchTag tag);
/// Time at which the parameter-1 solution on the curve reaches |x| = ax, and
/// the inverse. Both are 0-based on center branches.
double seed_curve_time(const SeedCurve& c, double ax);
double seed_curve_abscissa(const SeedCurve& c, double t);
/// Abscissa |x| of the curve point at distance eps from the origin.
double seed_curve_offset(const SeedCurve& c, double eps);

struct BranchPoint {
    double s;      // arclength from the origin
    double t;      // Fowler time, normalized so the branch carries parameter 1
    double x, y;
    double theta;  // unwrapped polar angle
    double E;
};

struct AxisMarker {
    int index;  // 1-based crossing number along the branch
    double s, t, x, y;
    bool degenerate;
};

struct TraceOptions {
    double arclength_budget = 1e3;
    double horizon = 400.0;
    std::optional<double> epsilon;  // overrides the default seed offset
    bool richardson = true;
    std::size_t max_polyline_points = 100000;
    double blowup_threshold = 1e8;
    double converge_radius = 1e-9;
    double converge_dwell = 1.0;
    double zero_floor = 1e-8;
    double event_tol = 1e-10;
    double rtol = 1e-10;
    double atol = 1e-12;
};

/// Default seed offset: 1e-7 max(1, ||J||), capped at (1e-7)^{1/(q-2)} for
/// q < 3; 1e-9 along a center direction.
double default_seed_epsilon(const Side& side, BranchTag tag);

/// Invariant-manifold branch traced from an eigenvector seed.
///
/// Time is normalized so that, on a hyperbolic branch, the point at time t
/// belongs to the solution with parameter 1; the point met at t = 0 by the
/// solution with parameter p sits at time ln(p)/rate. On center branches the
/// parameter is undefined and the seed is placed at t = 0.
struct ManifoldBranch {
    BranchTag tag;
    bool center = false;
    double epsilon = 0.0;
    double seed_time = 0.0;
    Vec2 seed;
    SeedCurve curve;
    double rate = 0.0;  // Lambda for unstable, lambda for stable
    std::vector<BranchPoint> points;
    std::vector<AxisMarker> y_axis_crossings;  // x = 0
    std::vector<AxisMarker> x_axis_crossings;  // y = 0
    EventKind termination = EventKind::Horizon;
    std::optional<EquilibriumKind> converged_to;
    /// Max distance between the eps and eps/2 traces at common arclengths.
    std::optional<double> seed_discrepancy;
    /// Center branches: max relative deviation from the polynomial approach law.
    std::optional<double> center_rate_error;
    Trajectory path;  // with dense output; s channel counts from the seed

    double total_arclength() const { return points.back().s; }
    /// Point at arclength s from the origin; straight seed segment below |seed|.
    PhasePoint at_arclength(double s) const;
    /// Arclength of the point at time t (monotone in t along the branch).
    double arclength_at_time(double t) const;
    PhasePoint at_time(double t) const;
    /// Time at which the seed curve reaches abscissa |x| = ax.
    double seed_time_of(double ax) const;
    /// Parameter (d or L) of the solution meeting this branch point at t = 0.
    double parameter_at_time(double t) const;
};

/// Throws RegimeError when the branch does not exist.
ManifoldBranch trace_manifold(const Side& side, BranchTag tag, const TraceOptions& opts = {});

/// Direction of the flow across the ray y = -m x, x > 0.
struct RayFlow {
    enum class Kind { Outward, Inward, Threshold };
    Kind kind;
    double c = 0.0;                    // m^2 - (n-2) m + eta
    std::optional<double> threshold;  // tangency abscissa when Kind::Threshold
};
std::string_view to_string(RayFlow::Kind k);

/// Sign of d/dt (y + m x) on the ray at abscissa x > 0.
double ray_flow_rate(double m, double x, const Side& side);
/// Outward means toward {y > -m x}. Throws DomainError when K > 0 and c < 0.
RayFlow ray_flow(double m, const Side& side);

/// Columns arclength,t,x,y,theta,E,marker.
void write_branch_csv(std::ostream& os, const ManifoldBranch& b);

}  // namespace fowlerkit
