#include "doctest.h"
#include "support.hpp"

#include "fowlerkit/errors.hpp"
#include "fowlerkit/params.hpp"

#include <cmath>

using namespace fowlerkit;

TEST_CASE("critical exponents without Hardy term") {
    const auto ce = critical_exponents(5, 0.0);
    CHECK(ce.kappa == 0.0);
    CHECK(ce.serrin == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    CHECK(ce.sobolev == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(ce.hardy_upper.is_unbounded());
    CHECK(ce.hardy_upper.to_string() == "unbounded");
}

TEST_CASE("critical exponents with positive Hardy coefficient") {
    // For n=5, eta=1 the closed forms simplify to 5 -+ sqrt(5).
    const long double s5 = std::sqrt(5.0L);
    const auto ce = critical_exponents(5, 1.0);
    CHECK(fk_test::rel_err(ce.kappa, static_cast<double>((3.0L - s5) / 2.0L)) < 1e-14);
    CHECK(fk_test::rel_err(ce.serrin, static_cast<double>(5.0L - s5)) < 1e-14);
    REQUIRE_FALSE(ce.hardy_upper.is_unbounded());
    CHECK(fk_test::rel_err(ce.hardy_upper.value(), static_cast<double>(5.0L + s5)) < 1e-14);
    CHECK(ce.kappa == doctest::Approx(0.381966).epsilon(1e-6));
    CHECK(ce.serrin == doctest::Approx(2.763932).epsilon(1e-6));
    CHECK(ce.hardy_upper.value() == doctest::Approx(7.236068).epsilon(1e-6));
}

TEST_CASE("critical exponents reject the Hardy boundary and low dimension") {
    CHECK_THROWS_AS(critical_exponents(4, 1.0), DomainError);
    CHECK_THROWS_AS(critical_exponents(2, 0.0), DomainError);
    CHECK_THROWS_AS(critical_exponents(5, 3.0), DomainError);
}

TEST_CASE("exponent set for the cubic-gradient prototype") {
    const auto e = derive_exponent_set(5, 0.0, 4.0, 0.0);
    CHECK(e.l == 4.0);
    CHECK(e.alpha == 1.0);
    CHECK(e.gamma == -2.0);
    CHECK(e.lambda == -2.0);
    CHECK(e.Lambda == 1.0);
    CHECK(e.regime == Regime::Saddle);
    CHECK_FALSE(e.hamiltonian);
    CHECK(e.mu() == 3.0);
}

TEST_CASE("Sobolev-critical exponent set is Hamiltonian") {
    const auto e = derive_exponent_set(5, 0.0, 10.0 / 3.0, 0.0);
    CHECK(e.alpha == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(e.gamma == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(std::abs(e.alpha + e.gamma) < 1e-14);
    CHECK(e.hamiltonian);
    CHECK(e.critically_close == "2^*");
}

TEST_CASE("weighted exponent below Serrin is an unstable node") {
    const auto e = derive_exponent_set(5, 0.0, 3.0, 2.0);
    CHECK(e.l == 2.5);
    CHECK(e.l < e.serrin);
    CHECK(e.regime == Regime::NodeUnstable);
}

TEST_CASE("critical equalities are detected") {
    const auto ce = critical_exponents(5, 1.0);
    // q = l when delta = 0.
    CHECK(derive_exponent_set(5, 1.0, ce.serrin, 0.0).regime == Regime::CenterUnstable);
    CHECK(derive_exponent_set(5, 1.0, ce.hardy_upper.value(), 0.0).regime == Regime::CenterStable);
    CHECK(derive_exponent_set(5, 1.0, 8.0, 0.0).regime == Regime::NodeStable);
    CHECK(derive_exponent_set(5, 1.0, ce.serrin * (1 + 1e-7), 0.0).critically_close == "2_*");
    CHECK(derive_exponent_set(5, 1.0, ce.serrin * (1 + 1e-7), 0.0).regime == Regime::Saddle);
}

TEST_CASE("exponent set rejects invalid inputs") {
    CHECK_THROWS_AS(derive_exponent_set(5, 0.0, 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(derive_exponent_set(5, 0.0, 3.0, -2.0), DomainError);
    CHECK_THROWS_AS(derive_exponent_set(5, 2.25, 3.0, 0.0), DomainError);
}

TEST_CASE("problem configuration validation") {
    ProblemConfig c;
    CHECK_NOTHROW(validate(c));
    c.K2 = -1.0;
    CHECK_THROWS_AS(validate(c), DomainError);
    c = {};
    c.rho = 0.0;
    CHECK_THROWS_AS(validate(c), DomainError);
    c = {};
    c.delta1 = -2.5;
    CHECK_THROWS_AS(validate(c), DomainError);
}

namespace {

struct RandomSide {
    int n;
    double eta, q, delta;
};

RandomSide random_side(fk_test::Gen& g) {
    RandomSide s;
    s.n = g.integer(3, 9);
    const double hardy = (s.n - 2.0) * (s.n - 2.0) / 4.0;
    s.eta = g.uniform(-3.0, 0.999 * hardy);
    s.q = 2.0 + g.log_uniform(1e-2, 20.0);
    s.delta = g.uniform(-1.9, 4.0);
    return s;
}

}  // namespace

TEST_CASE("property: eigenvalues match trace and determinant of the linearization") {
    fk_test::Gen g(11);
    for (int i = 0; i < 2000; ++i) {
        const auto r = random_side(g);
        const auto e = derive_exponent_set(r.n, r.eta, r.q, r.delta);
        const double tr = e.alpha + e.gamma, det = e.alpha * e.gamma + e.eta;
        CHECK(std::abs(e.lambda + e.Lambda - tr) <= 1e-12 * std::max({1.0, std::abs(e.lambda), std::abs(e.Lambda)}));
        CHECK(std::abs(e.lambda * e.Lambda - det) <=
              1e-12 * std::max({1.0, std::abs(e.lambda * e.Lambda), std::abs(e.alpha * e.gamma), std::abs(e.eta)}));
        CHECK(e.lambda < e.Lambda);
    }
}

TEST_CASE("property: saddle regime agrees with coupling sign and the exponent window") {
    fk_test::Gen g(12);
    for (int i = 0; i < 2000; ++i) {
        const auto r = random_side(g);
        const auto e = derive_exponent_set(r.n, r.eta, r.q, r.delta);
        if (!e.critically_close.empty()) continue;
        const bool by_regime = e.regime == Regime::Saddle;
        const bool by_coupling = e.linear_coupling() < 0.0;
        const bool by_window = e.serrin < e.l && e.hardy_upper.exceeds(e.l);
        const bool by_sign = e.lambda < 0.0 && 0.0 < e.Lambda;
        CHECK(by_regime == by_coupling);
        CHECK(by_regime == by_window);
        CHECK(by_regime == by_sign);
    }
}

TEST_CASE("property: kappa and its complement are the roots of the indicial quadratic") {
    fk_test::Gen g(13);
    for (int i = 0; i < 2000; ++i) {
        const auto r = random_side(g);
        const auto ce = critical_exponents(r.n, r.eta);
        for (double m : {ce.kappa, r.n - 2.0 - ce.kappa}) {
            const double res = m * m - (r.n - 2.0) * m + r.eta;
            CHECK(std::abs(res) <= 1e-12 * std::max({1.0, m * m, std::abs(r.eta)}));
        }
        CHECK(ce.hardy_upper.is_unbounded() == (r.eta <= 0.0));
    }
}

TEST_CASE("property: Hamiltonian flag matches vanishing trace") {
    fk_test::Gen g(14);
    for (int i = 0; i < 500; ++i) {
        const auto r = random_side(g);
        const double sob = 2.0 * r.n / (r.n - 2.0);
        // delta = 0 makes l = q.
        const bool at_sobolev = g.coin();
        const double q = at_sobolev ? sob : r.q;
        const auto e = derive_exponent_set(r.n, r.eta, q, 0.0);
        CHECK(e.hamiltonian == (std::abs(e.alpha + e.gamma) <= 1e-9 * e.alpha));
    }
}
