#include "fowlerkit/params.hpp"

#include "fowlerkit/errors.hpp"

#include <cmath>
#include <sstream>

namespace fowlerkit {

namespace {

bool rel_equal(double a, double b, double rtol) {
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b));
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string Threshold::to_string() const {
    return is_unbounded() ? std::string("unbounded") : fmt(*value_);
}

void validate(const ProblemConfig& c) {
    if (c.n < 3) throw DomainError("dimension n must be >= 3, got " + std::to_string(c.n));
    const double hardy = (c.n - 2.0) * (c.n - 2.0) / 4.0;
    if (!(c.eta < hardy))
        throw DomainError("Hardy bound violated: eta = " + fmt(c.eta) + " must be < (n-2)^2/4 = " + fmt(hardy));
    if (!(c.q1 > 2.0) || !(c.q2 > 2.0)) throw DomainError("exponents q1, q2 must be > 2");
    if (!(c.delta1 > -2.0) || !(c.delta2 > -2.0)) throw DomainError("weights delta1, delta2 must be > -2");
    if (!(c.K1 * c.K2 < 0.0)) throw DomainError("K1*K2 must be negative (sign-changing reaction)");
    if (!(c.rho > 0.0) || !std::isfinite(c.rho)) throw DomainError("switch radius rho must be positive");
}

CriticalExponents critical_exponents(int n, double eta) {
    if (n < 3) throw DomainError("dimension n must be >= 3, got " + std::to_string(n));
    const double nm2 = n - 2.0;
    const double hardy = nm2 * nm2 / 4.0;
    if (!(eta < hardy))
        throw DomainError("Hardy bound violated: eta = " + fmt(eta) + " must be < (n-2)^2/4 = " + fmt(hardy));
    const double root = std::sqrt(nm2 * nm2 - 4.0 * eta);
    CriticalExponents ce{
        .kappa = (nm2 - root) / 2.0,
        .serrin = 2.0 * (n + root) / (nm2 + root),
        .sobolev = 2.0 * n / nm2,
        .hardy_upper = Threshold::unbounded(),
    };
    if (eta > 0.0) ce.hardy_upper = Threshold::finite(2.0 * (n - root) / (nm2 - root));
    return ce;
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::NodeUnstable: return "node-unstable";
        case Regime::CenterUnstable: return "center-unstable";
        case Regime::Saddle: return "saddle";
        case Regime::CenterStable: return "center-stable";
        case Regime::NodeStable: return "node-stable";
    }
    return "?";
}

double reduced_exponent(double q, double delta) { return 2.0 * (q + delta) / (2.0 + delta); }

ExponentSet derive_exponent_set(int n, double eta, double q, double delta) {
    if (!(q > 2.0)) throw DomainError("exponent q must be > 2");
    if (!(delta > -2.0)) throw DomainError("weight delta must be > -2");
    const CriticalExponents ce = critical_exponents(n, eta);
    const double l = reduced_exponent(q, delta);
    if (!(l > 2.0)) throw DomainError("reduced exponent l must be > 2");

    const double alpha = 2.0 / (l - 2.0);
    const double gamma = alpha + 2.0 - n;
    ExponentSet e{
        .n = n,
        .eta = eta,
        .q = q,
        .delta = delta,
        .l = l,
        .alpha = alpha,
        .gamma = gamma,
        .kappa = ce.kappa,
        .lambda = gamma + ce.kappa,
        .Lambda = alpha - ce.kappa,
        .serrin = ce.serrin,
        .sobolev = ce.sobolev,
        .hardy_upper = ce.hardy_upper,
        .regime = Regime::Saddle,
        .hamiltonian = false,
        .critically_close = {},
    };
    e.hamiltonian = rel_equal(l, ce.sobolev, kCriticalEqualityRtol);

    const bool at_serrin = rel_equal(l, ce.serrin, kCriticalEqualityRtol);
    const bool at_upper = !ce.hardy_upper.is_unbounded() && rel_equal(l, ce.hardy_upper.value(), kCriticalEqualityRtol);
    if (at_serrin)
        e.regime = Regime::CenterUnstable;
    else if (at_upper)
        e.regime = Regime::CenterStable;
    else if (l < ce.serrin)
        e.regime = Regime::NodeUnstable;
    else if (ce.hardy_upper.exceeds(l))
        e.regime = Regime::Saddle;
    else
        e.regime = Regime::NodeStable;

    auto note = [&](bool close, const char* name) {
        if (!close) return;
        if (!e.critically_close.empty()) e.critically_close += ",";
        e.critically_close += name;
    };
    note(rel_equal(l, ce.serrin, kCriticalCloseRtol), "2_*");
    note(rel_equal(l, ce.sobolev, kCriticalCloseRtol), "2^*");
    note(!ce.hardy_upper.is_unbounded() && rel_equal(l, ce.hardy_upper.value(), kCriticalCloseRtol), "I");
    return e;
}

}  // namespace fowlerkit
