#pragma once

// Mechanical-type Lagrangian systems L = T_g - V: the second-order dynamics,
// fixed-step integration with energy monitoring, and tangent-bundle lifts.

#include "virial_geo/geometry.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vgeo {

// One named vector field of a system together with what is known about it.
struct CatalogEntry {
    std::string name;   // ascii identifier used on the command line
    std::string label;  // human-readable form, e.g. "sinθ∂θ"
    VectorFieldDef field;
    ConformalKind expected;
    double expected_lambda = 0.0;                // Homothetic only
    std::optional<ScalarField> conformal_factor; // f with L_X g = f g (or f g')
    std::optional<MetricField> secondary_metric; // g' with L_X g = f g'
    std::optional<double> potential_degree;      // nu with L_X V = nu V
    Guard domain;                                // extra restriction beyond the system guard
};

struct SystemSpec {
    std::string name;
    MetricField metric;
    ScalarField potential;
    Guard guard;
    std::vector<CatalogEntry> catalog;
    // Box [lo, hi] from which random sample points are drawn.
    Vec sample_lo;
    Vec sample_hi;

    int dim() const { return metric.dim(); }
    bool admits(const Point& q) const { return q.allFinite() && (!guard || guard(q)); }
    // Lookup by name or label; throws InvalidParameter.
    const CatalogEntry& entry(const std::string& name_or_label) const;
};

struct State {
    Point q;
    Vec v;
};

struct IntegratorConfig {
    std::string method = "rk4";
    double dt = 1e-3;
    double t_end = 100.0;
    double energy_drift_limit = 1e-6;
    long long max_steps = 100'000'000;
};

// Uniformly sampled solution. States are stored flat: q of sample i occupies
// qs[i*n .. i*n+n).
struct Trajectory {
    int dim = 0;
    std::vector<double> times;
    std::vector<double> qs;
    std::vector<double> vs;
    std::vector<double> energies;

    std::string method;
    double dt = 0.0;
    long long steps = 0;
    double max_energy_drift = 0.0;  // max |E_i - E_0| / max(1, |E_0|)
    double energy_drift_limit = 0.0;
    bool rejected = false;

    std::size_t size() const { return times.size(); }
    double span() const { return times.back() - times.front(); }
    Eigen::Map<const Vec> q(std::size_t i) const { return {qs.data() + i * dim, dim}; }
    Eigen::Map<const Vec> v(std::size_t i) const { return {vs.data() + i * dim, dim}; }
    State state(std::size_t i) const { return {q(i), v(i)}; }
};

// a^i = -Gamma^i_{jk} v^j v^k - g^{ij} dV/dq^j
Vec acceleration(const SystemSpec& sys, const State& s);

// E_L = T_g + V
double energy(const SystemSpec& sys, const State& s);

// Number of uniform steps used for (t_end, dt): the step is shrunk so that the
// last sample lands exactly on t_end.
long long step_count(const IntegratorConfig& cfg);

// Classical RK4 on (q', v') = (v, a). Throws GuardViolation carrying the stage
// time if any stage leaves the guard, StepLimitExceeded when the step count
// exceeds cfg.max_steps. A trajectory whose energy drift exceeds the limit is
// returned with `rejected` set.
Trajectory integrate(const SystemSpec& sys, const State& s0, const IntegratorConfig& cfg);

// Complete lift X^c at (q, v): (X^i(q), dX^i/dq^j v^j).
Vec complete_lift_eval(const VectorFieldDef& X, const State& s);

// Hamiltonian vector field (w.r.t. the Cartan 2-form of T_g) of the linear
// function G = g(X, v), in (base, fiber) components.
Vec hamiltonian_vf_affine(const MetricField& g, const VectorFieldDef& X, const State& s);

}  // namespace vgeo
