#pragma once

#include "fowlerkit/manifolds.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fowlerkit {

/// D: regular solutions launched from the inner unstable branch, u r^kappa -> d.
/// L: fast-decay solutions launched backward from the outer stable branch,
/// u r^(n-2-kappa) -> L.
enum class Family { D, L };
std::string_view to_string(Family f);

enum class RateTag { None, Power, Linear, LogCorrected };
std::string_view to_string(RateTag r);

/// Behaviour at one end of a radial solution.
struct EndClass {
    enum class Kind { Regular, Singular, FastDecay, SlowDecay, BlowUp, Unresolved };
    Kind kind = Kind::Unresolved;
    RateTag rate = RateTag::None;
    /// d for Regular, L for FastDecay, the limit of u r^alpha for Power,
    /// the coefficient c(Q) for Linear, the radius for BlowUp. Physical units.
    std::optional<double> value;
    /// Fitted p in u ~ value * r^-p over the approach window.
    std::optional<double> exponent;
    /// Power: max |x - P_x| / |P_x| over the trailing decade.
    std::optional<double> fit_error;
    int sign = 0;
};
std::string_view short_name(EndClass::Kind k);

struct SolutionClass {
    EndClass origin;
    EndClass infinity;
    int zeros = 0;
    bool degenerate = false;  // some crossing fell below the nondegeneracy floor
    /// "(R, sd, 0)" style.
    std::string label() const;
};

struct ZeroCount {
    int count = 0;
    bool degenerate = false;
};
/// x = 0 crossings with |y| above the floor over the whole span; degenerate
/// crossings are flagged, not counted.
ZeroCount count_nondegenerate_zeros(const Trajectory& traj);

struct SolveOptions {
    double horizon = 400.0;
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = 1.0;
    double blowup_threshold = 1e8;
    double converge_radius = 1e-9;
    double converge_dwell = 1.0;
    /// Origin capture ball on the far side; certifies fast decay (D) or
    /// regularity (L) for paths that only pass close to a saddle origin.
    /// Setting it also keeps dense output for the exponent fit.
    std::optional<double> capture_radius;
    double zero_floor = 1e-8;
    double event_tol = 1e-10;
    std::optional<double> seed_epsilon;
    bool keep_dense = false;
    bool record_x_axis = false;
};

/// Targets used on the far side: origin (dwell), P+, P- (dwell), then the
/// optional capture ball. The origin targets arm once the path is `arm` away.
std::vector<Target> far_side_targets(const Side& side, const SolveOptions& opts, double arm);

/// Classifies the end reached by `traj` on `side`: the infinity end for a
/// forward run, the origin end for a backward one. `rho` maps values back to
/// physical units.
EndClass classify_terminal(const Trajectory& traj, const Side& side, const std::vector<Target>& targets, double rho,
                           double capture_radius = 1e-5);

struct RadialSolution {
    Family family;
    double parameter;  // physical d or L
    PhasePoint seed;
    Trajectory traj;
    SolutionClass cls;
};

/// Solution with u r^kappa -> d at the origin (D) or u r^(n-2-kappa) -> L at
/// infinity (L), started on the launch branch near the origin and continued
/// across the switch. Throws RegimeError when the launch branch is missing and
/// SeedOverflow when the launch side blows up before the switch.
RadialSolution solve_radial(const PiecewiseSystem& sys, Family family, double parameter, const SolveOptions& opts = {});

/// Integrates the far side from the switch-time state `q` and classifies.
/// `launch` holds the class of the launch end and its zero count.
RadialSolution shoot_far_side(const PiecewiseSystem& sys, Family family, const PhasePoint& q, const EndClass& launch,
                              ZeroCount launch_zeros, const SolveOptions& opts);

/// <F_inner(q), J F_outer(q)> with J the rotation by +pi/2.
double transversality(const Vec2& q, const PiecewiseSystem& sys);

/// Decomposition of a state along the unstable (1,-kappa) and stable (1,-mu)
/// eigenvectors of the linearization at the origin.
struct LinearComponents {
    double unstable;
    double stable;
};
LinearComponents linear_components(const Vec2& p, const ExponentSet& e);

/// Least-squares slope of ln|u| against ln r over the dense path restricted to
/// the final approach with rmin <= |(x,y)| <= rmax; returns -slope.
std::optional<double> fit_origin_exponent(const Trajectory& traj, const Side& side, double rmin, double rmax);

/// Slope of ln|x| against ln|t| over the last decade of |t|; expected
/// -1/(q-2) on a center branch approach.
std::optional<double> fit_log_rate(const Trajectory& traj);

/// Distance from p to the traced branch, refined on the dense path.
double distance_to_branch(const ManifoldBranch& b, const Vec2& p);

/// Parameter-shift law: the solution at p2 equals the p1 solution shifted in
/// Fowler time. Compared on the launch side only.
struct ScalingLawCheck {
    double sup_rel_error = 0.0;
    double shift = 0.0;  // Fowler time shift ln(p2/p1)/rate
    int points = 0;
};
ScalingLawCheck check_parameter_scaling(const PiecewiseSystem& sys, Family family, double p1, double p2,
                                        const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// Structure search

/// Runs at rtol 1e-12: at 1e-10 the trace error at k = 2 (~5e-10 relative in
/// the parameter) exceeds the bisection target.
struct StructureOptions {
    template <class T>
    static T tight() {
        T o;
        o.rtol = 1e-12;
        return o;
    }

    SolveOptions solve = tight<SolveOptions>();
    TraceOptions trace = tight<TraceOptions>();
    int k_max = 2;
    int scan_points = 256;
    double bisect_rtol = 1e-10;
    double capture_radius = 1e-5;
    int threads = 0;  // 0: hardware concurrency
    bool intersections = true;
};

/// Hypotheses of the existence results. Throws RegimeError with the failed
/// clause; returns whether the extra ordering assumption holds as well.
struct Hypotheses {
    bool monotone = false;
    std::string setting;  // "regular-family" or "fast-decay-family"
    std::vector<std::string> clauses;
};
Hypotheses check_hypotheses(const PiecewiseSystem& sys, Family family);

struct StructurePoint {
    int k = 0;
    double value = 0.0;      // D_k or L_k, physical
    double arclength = 0.0;  // on the launch branch
    double bracket_lo = 0.0, bracket_hi = 0.0;  // parameter bracket
    double arclength_lo = 0.0, arclength_hi = 0.0;
    double achieved_rtol = 0.0;  // on the arclength bracket
    SolutionClass verified;
    bool verified_ok = false;
    double manifold_distance = 0.0;  // switch-time state to the far branch
    std::optional<double> tilde;     // the preceding (k-1 -> k) flip, k >= 1
    bool tilde_equals_previous = true;
};

struct IntervalClass {
    double lo = 0.0, hi = 0.0;  // parameter range
    std::string label;
    std::string end;  // "P+", "P-", "blow-up", ...
    int zeros = 0;
};

struct IntersectionPoint {
    int j = 0;
    Vec2 q;
    BranchTag branch;          // branch of the spiral it lies on
    double theta = 0.0;        // angle swept between q and the origin along the spiral
    double launch_arclength = 0.0;
    double spiral_arclength = 0.0;
    double parameter = 0.0;    // d or L of the solution through q
    double transversality = 0.0;
    bool window_ok = false;
    bool parity_ok = false;
};

struct IntersectionTable {
    std::vector<IntersectionPoint> all;  // every crossing found, by launch arclength
    std::vector<IntersectionPoint> first;  // Q_j
    std::vector<IntersectionPoint> last;   // Q*_j
    std::vector<bool> no_reentry;          // per j in `first`
    double launch_budget = 0.0;
    double spiral_budget = 0.0;
};

/// Crossings of the launch branch with the far-side spiral branches, indexed
/// by the region between consecutive crossings of the spiral with the half
/// axis x = 0 on the launch branch's side (y > 0 for D, y < 0 for L).
IntersectionTable intersect_manifolds(const ManifoldBranch& launch, const ManifoldBranch& spiral_plus,
                                      const ManifoldBranch& spiral_minus, const PiecewiseSystem& sys, Family family);

struct Accumulation {
    double value = 0.0;
    bool bounded = false;  // launch branch blew up within the budget
};

struct StructureReport {
    ProblemConfig config;
    Family family = Family::D;
    Hypotheses hypotheses;
    std::vector<StructurePoint> points;
    std::vector<IntervalClass> intervals;
    std::optional<IntersectionTable> intersections;
    Accumulation accumulation;
    double scan_lo = 0.0, scan_hi = 0.0;  // arclength range scanned
    int flips = 0;
    std::vector<std::string> warnings;
};

StructureReport find_structure(const PiecewiseSystem& sys, Family family, const StructureOptions& opts = {});

/// Kelvin transform w(r) = r^(2-n) u(1/r): sides swap, delta' = (n-2)(q-1) -
/// n - 2 - delta, rho' = 1/rho. L_k of a configuration equals D_k of its dual.
ProblemConfig dual_config(const ProblemConfig& cfg);

// ---------------------------------------------------------------------------
// Scaling of the first regular fast-decay solution in K and rho

struct MaximumData {
    double R0 = 0.0;  // radius of the maximum
    double U0 = 0.0;  // the maximum
    double D0 = 0.0;
};

struct ScalingCheck {
    double Kbar = 1.0, rhobar = 1.0;
    MaximumData base, scaled;
    double expected_R_ratio = 1.0, expected_U_ratio = 1.0, expected_D_ratio = 1.0;
    double R_error = 0.0, U_error = 0.0, D_error = 0.0;  // relative
    double residual = 0.0;  // of the rescaled profile in the rescaled equation
    bool exact_law = true;  // q1 == q2 and delta = 0
    bool passed = false;
    std::vector<std::string> warnings;
};

/// Maximum of u(., D_0) after the switch for the given D_0.
MaximumData first_maximum(const PiecewiseSystem& sys, double D0, const SolveOptions& opts = {});

ScalingCheck scaling_report(const StructureReport& base, double Kbar, double rhobar, const StructureOptions& opts = {},
                            double tolerance = 1e-6);

}  // namespace fowlerkit
