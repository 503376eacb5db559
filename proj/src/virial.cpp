#include "virial_geo/virial.hpp"

#include "virial_geo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vgeo {

std::string to_string(RelationKind kind) {
    switch (kind) {
        case RelationKind::General: return "General";
        case RelationKind::Killing: return "Killing";
        case RelationKind::Conformal: return "Conformal";
        case RelationKind::TwoMetric: return "TwoMetric";
        case RelationKind::HomogeneousPartition: return "HomogeneousPartition";
    }
    return "Unknown";
}

VirialRelation VirialRelation::general(std::string name, VectorFieldDef X) {
    VirialRelation r;
    r.name = std::move(name);
    r.kind = RelationKind::General;
    r.field = std::move(X);
    return r;
}

VirialRelation VirialRelation::killing(std::string name, VectorFieldDef X) {
    VirialRelation r;
    r.name = std::move(name);
    r.kind = RelationKind::Killing;
    r.field = std::move(X);
    return r;
}

VirialRelation VirialRelation::conformal(std::string name, VectorFieldDef X, ScalarField f) {
    VirialRelation r;
    r.name = std::move(name);
    r.kind = RelationKind::Conformal;
    r.field = std::move(X);
    r.factor = std::move(f);
    return r;
}

VirialRelation VirialRelation::two_metric(std::string name, VectorFieldDef X, ScalarField f, MetricField g2) {
    VirialRelation r;
    r.name = std::move(name);
    r.kind = RelationKind::TwoMetric;
    r.field = std::move(X);
    r.factor = std::move(f);
    r.secondary = std::move(g2);
    return r;
}

VirialRelation VirialRelation::homogeneous(std::string name, double mu, double nu) {
    VirialRelation r;
    r.name = std::move(name);
    r.kind = RelationKind::HomogeneousPartition;
    r.mu = mu;
    r.nu = nu;
    return r;
}

VirialRelation default_relation(const CatalogEntry& e) {
    if (e.expected == ConformalKind::Killing) return VirialRelation::killing(e.name, e.field);
    if (e.secondary_metric && e.conformal_factor)
        return VirialRelation::two_metric(e.name, e.field, *e.conformal_factor, *e.secondary_metric);
    if (e.conformal_factor) return VirialRelation::conformal(e.name, e.field, *e.conformal_factor);
    return VirialRelation::general(e.name, e.field);
}

double affine_virial(const MetricField& g, const VectorFieldDef& X, const State& s) {
    return X.eval(s.q).dot(g.eval(s.q) * s.v);
}

double convergence_threshold(double scale) { return std::max(1e-6, 1e-3 * scale); }

namespace {

struct Averages {
    double full = 0.0;
    double half = 0.0;
    double T = 0.0;
    double T_half = 0.0;
};

void require_usable(const Trajectory& traj) {
    if (traj.rejected)
        throw RejectedTrajectory("trajectory rejected: energy drift " + std::to_string(traj.max_energy_drift) +
                                 " exceeds " + std::to_string(traj.energy_drift_limit));
    if (traj.size() < 3) throw InsufficientSamples("time average needs at least 3 samples");
}

// Trapezoid averages over [t_0, t_{m-1}] and [t_0, t_mid]. Deviations from
// a[0] are integrated so that a constant series averages to itself exactly.
Averages trapezoid(const std::vector<double>& t, const std::vector<double>& a) {
    const std::size_t m = t.size();
    const std::size_t mid = (m - 1) / 2;
    const double a0 = a[0];
    Averages out;
    double acc = 0.0;
    double acc_half = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        acc += 0.5 * ((a[i] - a0) + (a[i + 1] - a0)) * (t[i + 1] - t[i]);
        if (i + 1 == mid) acc_half = acc;
    }
    out.T = t[m - 1] - t[0];
    out.T_half = t[mid] - t[0];
    out.full = a0 + acc / out.T;
    out.half = out.T_half > 0.0 ? a0 + acc_half / out.T_half : out.full;
    return out;
}

std::vector<double> sample(const SystemSpec& sys, const Trajectory& traj, const Observable& A) {
    std::vector<double> out(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) out[i] = A.eval(sys, traj.state(i));
    return out;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

const VectorFieldDef& need_field(const VirialRelation& rel) {
    if (!rel.field) throw RelationFieldMissing("relation '" + rel.name + "' has no vector field");
    return *rel.field;
}

const ScalarField& need_factor(const VirialRelation& rel) {
    if (!rel.factor) throw RelationFieldMissing("relation '" + rel.name + "' has no conformal factor");
    return *rel.factor;
}

const MetricField& need_secondary(const VirialRelation& rel) {
    if (!rel.secondary) throw RelationFieldMissing("relation '" + rel.name + "' has no secondary metric");
    return *rel.secondary;
}

// L_X V = <dV, X>
double lie_potential(const SystemSpec& sys, const VectorFieldDef& X, const Point& q) {
    return sys.potential.gradient(q).dot(X.eval(q));
}

}  // namespace

RunningAverage time_average(const SystemSpec& sys, const Trajectory& traj, const Observable& A) {
    require_usable(traj);
    const auto values = sample(sys, traj, A);
    const Averages avg = trapezoid(traj.times, values);
    return {avg.full, avg.half, avg.T, avg.T_half, max_abs(values)};
}

Observable relation_integrand(const VirialRelation& rel) {
    switch (rel.kind) {
        case RelationKind::General: {
            const VectorFieldDef X = need_field(rel);
            // X^c(T_g) = T_{L_X g}
            return {rel.name, [X](const SystemSpec& sys, const State& s) {
                        return quadratic_energy(lie_derivative_metric(X, sys.metric, s.q), s.v) -
                               lie_potential(sys, X, s.q);
                    }};
        }
        case RelationKind::Killing: {
            const VectorFieldDef X = need_field(rel);
            return {rel.name, [X](const SystemSpec& sys, const State& s) { return lie_potential(sys, X, s.q); }};
        }
        case RelationKind::Conformal: {
            const VectorFieldDef X = need_field(rel);
            const ScalarField f = need_factor(rel);
            return {rel.name, [X, f](const SystemSpec& sys, const State& s) {
                        return f.eval(s.q) * kinetic_energy(sys.metric, s.q, s.v) - lie_potential(sys, X, s.q);
                    }};
        }
        case RelationKind::TwoMetric: {
            const VectorFieldDef X = need_field(rel);
            const ScalarField f = need_factor(rel);
            const MetricField g2 = need_secondary(rel);
            return {rel.name, [X, f, g2](const SystemSpec& sys, const State& s) {
                        return f.eval(s.q) * kinetic_energy(g2, s.q, s.v) - lie_potential(sys, X, s.q);
                    }};
        }
        case RelationKind::HomogeneousPartition: {
            const double mu = rel.mu, nu = rel.nu;
            return {rel.name, [mu, nu](const SystemSpec& sys, const State& s) {
                        return mu * kinetic_energy(sys.metric, s.q, s.v) - nu * sys.potential.eval(s.q);
                    }};
        }
    }
    throw InvalidParameter("unknown relation kind");
}

std::optional<Observable> relation_virial_function(const VirialRelation& rel) {
    if (rel.kind == RelationKind::HomogeneousPartition) return std::nullopt;
    const VectorFieldDef X = need_field(rel);
    return Observable{"G_" + rel.name,
                      [X](const SystemSpec& sys, const State& s) { return affine_virial(sys.metric, X, s); }};
}

VirialReport virial_residual(const SystemSpec& sys, const Trajectory& traj, const VirialRelation& rel) {
    require_usable(traj);
    const Observable A = relation_integrand(rel);
    const auto values = sample(sys, traj, A);
    const Averages avg = trapezoid(traj.times, values);

    VirialReport rep;
    rep.relation = rel.name;
    rep.kind = rel.kind;
    rep.residual = avg.full;
    rep.value_half = avg.half;
    rep.T = avg.T;
    rep.integrand_max = max_abs(values);
    rep.tolerance = convergence_threshold(rep.integrand_max);
    rep.converged = std::abs(avg.full - avg.half) <= rep.tolerance;

    if (const auto G = relation_virial_function(rel)) {
        const auto gvals = sample(sys, traj, *G);
        rep.G_start = gvals.front();
        rep.G_end = gvals.back();
        rep.G_max = max_abs(gvals);
        // dG/dt equals the integrand, except for the Killing relation where
        // dG/dt = X^c(T_g) - L_X V = -L_X V.
        const double drift = (gvals.back() - gvals.front()) / avg.T;
        rep.balance_check = rel.kind == RelationKind::Killing ? rep.residual + drift : rep.residual - drift;
    }
    return rep;
}

PartitionResult homogeneous_partition(const SystemSpec& sys, const Trajectory& traj, double mu, double nu) {
    if (std::abs(mu + nu) < 1e-12) throw DegenerateDegrees("homogeneous_partition: mu + nu vanishes");
    require_usable(traj);
    const Observable kin{"T", [](const SystemSpec& s, const State& st) { return kinetic_energy(s.metric, st.q, st.v); }};
    const Observable pot{"V", [](const SystemSpec& s, const State& st) { return s.potential.eval(st.q); }};
    const RunningAverage t = time_average(sys, traj, kin);
    const RunningAverage v = time_average(sys, traj, pot);

    PartitionResult out;
    out.energy = traj.energies.front();
    out.avg_T = t.value_T;
    out.avg_V = v.value_T;
    out.pred_T = nu * out.energy / (nu + mu);
    out.pred_V = out.energy - out.pred_T;  // mu E / (nu + mu)
    out.converged = std::abs(t.value_T - t.value_half) <= convergence_threshold(t.max_abs) &&
                    std::abs(v.value_T - v.value_half) <= convergence_threshold(v.max_abs);
    return out;
}

}  // namespace vgeo
