#include <doctest.h>

#include "oracles.hpp"
#include "virial_geo/errors.hpp"
#include "virial_geo/systems.hpp"
#include "virial_geo/virial.hpp"

#include <cmath>
#include <numbers>

using namespace vgeo;
using std::numbers::pi;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec p(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) p[i++] = x;
    return p;
}

IntegratorConfig cfg(double dt, double t_end) {
    IntegratorConfig c;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

// Trajectory whose only content is the time grid, for observables of t.
Trajectory time_grid(double dt, double T) {
    Trajectory tr;
    tr.dim = 1;
    const long long n = std::llround(T / dt);
    for (long long i = 0; i <= n; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(n);
        tr.times.push_back(t);
        tr.qs.push_back(t);
        tr.vs.push_back(0.0);
        tr.energies.push_back(0.0);
    }
    return tr;
}

Observable of_time(std::function<double(double)> f) {
    return {"A", [f](const SystemSpec&, const State& s) { return f(s.q[0]); }};
}

}  // namespace

TEST_CASE("affine virial examples") {
    const auto flat = build_system(SystemId::flat(2));
    const VectorFieldDef e1(2, [](const Point&) { return vec({1, 0}); });
    CHECK(affine_virial(flat.metric, e1, {vec({0, 0}), vec({3, 4})}) == doctest::Approx(3.0));

    const auto sph = build_system(SystemId::sphere(1.0));
    CHECK(affine_virial(sph.metric, sph.entry("X3").field, {vec({pi / 2, 0}), vec({0, 2})}) ==
          doctest::Approx(2.0));

    const auto pol = build_system(SystemId::polar());
    CHECK(affine_virial(pol.metric, pol.entry("dilation").field, {vec({2, 0}), vec({5, 1})}) ==
          doctest::Approx(10.0));
}

TEST_CASE("time average examples") {
    const auto sys = build_system(SystemId::flat(1));
    const auto grid = time_grid(1e-3, 2 * pi);

    const auto c = time_average(sys, grid, of_time([](double) { return 1.75; }));
    CHECK(c.value_T == 1.75);
    CHECK(c.value_half == 1.75);
    CHECK(c.T == doctest::Approx(2 * pi));

    const auto s = time_average(sys, grid, of_time([](double t) { return std::sin(t); }));
    CHECK(std::abs(s.value_T) < 1e-7);
    CHECK(s.max_abs <= 1.0);

    // Kinetic energy of the unit oscillator over one period.
    const auto tr = integrate(sys, {vec({1}), vec({0})}, cfg(1e-3, 2 * pi));
    const Observable T{"T", [](const SystemSpec& sy, const State& st) {
                           return kinetic_energy(sy.metric, st.q, st.v);
                       }};
    CHECK(std::abs(time_average(sys, tr, T).value_T - 0.25) < 1e-6);
}

TEST_CASE("trapezoid average agrees with a Simpson oracle") {
    const auto sys = build_system(SystemId::flat(1));
    const auto f = [](double t) { return std::exp(-0.1 * t) * std::cos(3 * t) + t * t / 50; };
    const double ref = oracle::simpson(f, 0, 10, 20000) / 10;
    const double ref_half = oracle::simpson(f, 0, 5, 20000) / 5;
    const auto a = time_average(sys, time_grid(1e-3, 10), of_time(f));
    CHECK(a.value_T == doctest::Approx(ref).epsilon(1e-6));
    CHECK(a.value_half == doctest::Approx(ref_half).epsilon(1e-6));
    CHECK(a.T_half == doctest::Approx(5.0));
}

TEST_CASE("time average errors") {
    const auto sys = build_system(SystemId::flat(1));
    auto tr = integrate(sys, {vec({1}), vec({0})}, cfg(1e-3, 1));
    tr.rejected = true;
    CHECK_THROWS_AS(time_average(sys, tr, of_time([](double) { return 0.0; })), RejectedTrajectory);

    auto loose = cfg(0.5, 0.5);
    loose.energy_drift_limit = 1.0;
    const auto short_tr = integrate(sys, {vec({1}), vec({0})}, loose);
    CHECK(short_tr.size() == 2);
    CHECK_THROWS_AS(time_average(sys, short_tr, of_time([](double) { return 0.0; })), InsufficientSamples);
}

TEST_CASE("average is bounded by max |A|") {
    const auto id = SystemId::toda(3);
    const auto sys = build_system(id);
    const auto tr = integrate(sys, reference_initial_states(id).front().state, cfg(1e-2, 50));
    for (const auto& ce : sys.catalog) {
        const auto a = time_average(sys, tr, relation_integrand(default_relation(ce)));
        CHECK(std::abs(a.value_T) <= a.max_abs);
        CHECK(std::abs(a.value_half) <= a.max_abs);
    }
}

TEST_CASE("virial residual examples") {
    const auto id = SystemId::kepler();
    const auto sys = build_system(id);
    const auto fx = find_fixture(id, "ellipse");
    const double period = kepler_period(id, fx.state);
    const auto tr = integrate(sys, fx.state, cfg(1e-3, period));

    SUBCASE("rotation integrand vanishes identically") {
        const auto rel = default_relation(sys.entry("rotation"));
        CHECK(rel.kind == RelationKind::Killing);
        const Observable A = relation_integrand(rel);
        for (std::size_t i = 0; i < tr.size(); i += 97) CHECK(A.eval(sys, tr.state(i)) == 0.0);
        CHECK(virial_residual(sys, tr, rel).residual == 0.0);
    }
    SUBCASE("translation Killing field over one period") {
        const auto rep = virial_residual(sys, tr, default_relation(sys.entry("translation-killing")));
        CHECK(std::abs(rep.residual) <= 1e-6);
        REQUIRE(rep.balance_check);
        CHECK(std::abs(*rep.balance_check) < 1e-8);
        // The integrand is cos(phi) k / r^2 along the orbit.
        const State s = tr.state(0);
        CHECK(relation_integrand(default_relation(sys.entry("translation-killing"))).eval(sys, s) ==
              doctest::Approx(std::cos(s.q[1]) / (s.q[0] * s.q[0])));
    }
}

TEST_CASE("two-metric relation on the gnomonic chart") {
    const auto id = SystemId::gnomonic(1.0);
    const auto sys = build_system(id);
    const auto rel = default_relation(sys.entry("projective-dilation"));
    CHECK(rel.kind == RelationKind::TwoMetric);
    const auto tr = integrate(sys, reference_initial_states(id).front().state, cfg(1e-3, 100));
    const auto rep = virial_residual(sys, tr, rel);
    CHECK(std::abs(rep.residual) <= 2 * rep.G_max / rep.T + 1e-6);
    CHECK(std::abs(*rep.balance_check) < 1e-6);
}

TEST_CASE("relation errors") {
    const auto sys = build_system(SystemId::flat(1));
    const auto tr = integrate(sys, {vec({1}), vec({0})}, cfg(1e-3, 1));
    VirialRelation bad;
    bad.name = "bad";
    bad.kind = RelationKind::Conformal;
    CHECK_THROWS_AS(virial_residual(sys, tr, bad), RelationFieldMissing);
    bad.field = VectorFieldDef(1, [](const Point& q) { return q; });
    CHECK_THROWS_AS(virial_residual(sys, tr, bad), RelationFieldMissing);
    bad.kind = RelationKind::TwoMetric;
    bad.factor = ScalarField::constant(1, 2.0);
    CHECK_THROWS_AS(virial_residual(sys, tr, bad), RelationFieldMissing);

    auto rej = tr;
    rej.rejected = true;
    CHECK_THROWS_AS(virial_residual(sys, rej, VirialRelation::homogeneous("h", 2, 2)), RejectedTrajectory);
    CHECK_FALSE(relation_virial_function(VirialRelation::homogeneous("h", 2, 2)));
}

TEST_CASE("homogeneous partition examples") {
    SUBCASE("oscillator") {
        const auto sys = build_system(SystemId::flat(1));
        const auto tr = integrate(sys, {vec({1}), vec({0})}, cfg(1e-4, 2 * pi));
        const auto p = homogeneous_partition(sys, tr, 2, 2);
        CHECK(p.energy == doctest::Approx(0.5));
        CHECK(std::abs(p.avg_T - 0.25) < 1e-6);
        CHECK(std::abs(p.avg_V - 0.25) < 1e-6);
        CHECK(p.pred_T == 0.25);
        CHECK(p.pred_V == 0.25);
    }
    SUBCASE("kepler bound orbit") {
        const auto id = SystemId::kepler();
        const auto sys = build_system(id);
        const State s{vec({1, 0}), vec({0, 1})};
        const auto tr = integrate(sys, s, cfg(1e-4, kepler_period(id, s)));
        const auto p = homogeneous_partition(sys, tr, 2, -1);
        CHECK(p.energy == doctest::Approx(-0.5));
        CHECK(std::abs(p.avg_T - 0.5) < 1e-6);
        CHECK(std::abs(p.avg_V + 1.0) < 1e-6);
        CHECK(std::abs(p.avg_T + p.avg_V - p.energy) < 1e-6);
    }
    SUBCASE("degenerate degrees") {
        const auto sys = build_system(SystemId::flat(1));
        const auto tr = integrate(sys, {vec({1}), vec({0})}, cfg(1e-3, 1));
        CHECK_THROWS_AS(homogeneous_partition(sys, tr, 1, -1), DegenerateDegrees);
    }
}

TEST_CASE("predicted partition sums to the energy") {
    const auto sys = build_system(SystemId::flat(1));
    const auto tr = integrate(sys, {vec({0.3}), vec({1.1})}, cfg(1e-3, 3));
    for (auto [mu, nu] : {std::pair{2.0, 2.0}, {2.0, -1.0}, {3.0, 0.7}, {-5.0, 1.3}}) {
        const auto p = homogeneous_partition(sys, tr, mu, nu);
        CHECK(p.pred_T + p.pred_V == p.energy);
    }
}

TEST_CASE("balance defect is second order in dt") {
    const auto id = SystemId::sphere(1.0);
    const auto sys = build_system(id);
    const auto rel = default_relation(sys.entry("sinθ∂θ"));
    const State s0 = reference_initial_states(id).front().state;
    const auto coarse = virial_residual(sys, integrate(sys, s0, cfg(1e-2, 20)), rel);
    const auto fine = virial_residual(sys, integrate(sys, s0, cfg(5e-3, 20)), rel);
    const double ratio = *coarse.balance_check / *fine.balance_check;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("General relation specializes to Killing and Conformal pointwise") {
    for (const auto& id : bundled_systems()) {
        const auto sys = build_system(id);
        const auto fx = reference_initial_states(id).front();
        const auto tr = integrate(sys, fx.state, cfg(1e-2, 5));
        for (const auto& ce : sys.catalog) {
            const Observable general = relation_integrand(VirialRelation::general(ce.name, ce.field));
            CAPTURE(sys.name);
            CAPTURE(ce.name);
            if (ce.expected == ConformalKind::Killing) {
                // X^c(T_g) vanishes, so the general integrand is -L_X V.
                const Observable k = relation_integrand(VirialRelation::killing(ce.name, ce.field));
                for (std::size_t i = 0; i < tr.size(); ++i)
                    CHECK(std::abs(general.eval(sys, tr.state(i)) + k.eval(sys, tr.state(i))) <= 1e-12);
            } else if (ce.conformal_factor && !ce.secondary_metric) {
                const Observable c =
                    relation_integrand(VirialRelation::conformal(ce.name, ce.field, *ce.conformal_factor));
                for (std::size_t i = 0; i < tr.size(); ++i) {
                    const double a = general.eval(sys, tr.state(i)), b = c.eval(sys, tr.state(i));
                    CHECK(std::abs(a - b) <= 1e-10 * (1 + std::abs(a)));
                }
            }
        }
    }
}

TEST_CASE("bounded virial functions force decaying residuals") {
    for (const auto& id : bundled_systems()) {
        const auto sys = build_system(id);
        const auto fx = reference_initial_states(id).front();
        for (double T : {25.0, 50.0}) {
            const auto tr = integrate(sys, fx.state, cfg(1e-3, T));
            for (const auto& ce : sys.catalog) {
                const auto rep = virial_residual(sys, tr, default_relation(ce));
                CAPTURE(sys.name);
                CAPTURE(ce.name);
                CHECK(std::abs(rep.residual) <= 2 * rep.G_max / rep.T + 1e-6);
            }
        }
    }
}

TEST_CASE("default relation mapping") {
    const auto sph = build_system(SystemId::sphere(1.0));
    CHECK(default_relation(sph.entry("X1")).kind == RelationKind::Killing);
    CHECK(default_relation(sph.entry("conformal-sin")).kind == RelationKind::Conformal);
    CHECK(default_relation(sph.entry("tan-dilation")).kind == RelationKind::General);
    CHECK(to_string(RelationKind::TwoMetric) == "TwoMetric");
    CHECK(convergence_threshold(1e-4) == 1e-6);
    CHECK(convergence_threshold(0.5) == doctest::Approx(5e-4));
    CHECK(convergence_threshold(20.0) == doctest::Approx(0.02));
}
