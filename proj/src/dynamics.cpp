#include "virial_geo/dynamics.hpp"

#include "virial_geo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vgeo {

const CatalogEntry& SystemSpec::entry(const std::string& name_or_label) const {
    for (const auto& e : catalog)
        if (e.name == name_or_label || e.label == name_or_label) return e;
    throw InvalidParameter("system '" + name + "' has no catalog field '" + name_or_label + "'");
}

namespace {

void require_guard(const SystemSpec& sys, const Point& q) {
    if (!sys.admits(q)) {
        std::ostringstream os;
        os << "point (" << q.transpose() << ") violates the domain guard of '" << sys.name << "'";
        throw GuardViolation(os.str());
    }
}

}  // namespace

Vec acceleration(const SystemSpec& sys, const State& s) {
    require_guard(sys, s.q);
    const int n = sys.dim();
    const Tensor3 gamma = christoffel(sys.metric, s.q);
    const Mat ginv = metric_inverse(sys.metric.eval(s.q));
    const Vec dV = sys.potential.gradient(s.q);

    Vec a = -(ginv * dV);
    for (int i = 0; i < n; ++i) {
        double quad = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) quad += gamma(i, j, k) * s.v[j] * s.v[k];
        a[i] -= quad;
    }
    return a;
}

double energy(const SystemSpec& sys, const State& s) {
    require_guard(sys, s.q);
    return kinetic_energy(sys.metric, s.q, s.v) + sys.potential.eval(s.q);
}

long long step_count(const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidParameter("integrator: dt must be positive");
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end))
        throw InvalidParameter("integrator: t_end must be positive");
    const double ratio = cfg.t_end / cfg.dt;
    if (ratio > 9.0e15) throw StepLimitExceeded("integrator: t_end/dt is not representable");
    const double nearest = std::round(ratio);
    const long long steps =
        std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? static_cast<long long>(nearest)
                                                                 : static_cast<long long>(std::ceil(ratio));
    return std::max<long long>(steps, 1);
}

Trajectory integrate(const SystemSpec& sys, const State& s0, const IntegratorConfig& cfg) {
    if (cfg.method != "rk4") throw InvalidParameter("integrator: unknown method '" + cfg.method + "'");
    const int n = sys.dim();
    if (s0.q.size() != n || s0.v.size() != n) throw InvalidParameter("integrator: state dimension mismatch");
    if (!s0.v.allFinite()) throw InvalidParameter("integrator: non-finite initial velocity");
    const long long steps = step_count(cfg);
    if (steps > cfg.max_steps)
        throw StepLimitExceeded("integrator: " + std::to_string(steps) + " steps exceed the cap of " +
                                std::to_string(cfg.max_steps));
    require_guard(sys, s0.q);

    const double h = cfg.t_end / static_cast<double>(steps);

    Trajectory traj;
    traj.dim = n;
    traj.method = cfg.method;
    traj.dt = h;
    traj.steps = steps;
    traj.energy_drift_limit = cfg.energy_drift_limit;
    const auto samples = static_cast<std::size_t>(steps) + 1;
    traj.times.reserve(samples);
    traj.qs.reserve(samples * n);
    traj.vs.reserve(samples * n);
    traj.energies.reserve(samples);

    auto record = [&](double t, const Vec& q, const Vec& v) {
        const double e = energy(sys, {q, v});
        traj.times.push_back(t);
        traj.qs.insert(traj.qs.end(), q.data(), q.data() + n);
        traj.vs.insert(traj.vs.end(), v.data(), v.data() + n);
        traj.energies.push_back(e);
    };

    auto accel_at = [&](double t, const Vec& q, const Vec& v) -> Vec {
        try {
            return acceleration(sys, {q, v});
        } catch (const GuardViolation& gv) {
            throw GuardViolation(std::string(gv.what()) + " at t=" + std::to_string(t), t, true);
        } catch (const SingularMetric& sm) {
            throw GuardViolation(std::string(sm.what()) + " at t=" + std::to_string(t), t, true);
        }
    };

    Vec q = s0.q;
    Vec v = s0.v;
    record(0.0, q, v);
    const double e0 = traj.energies.front();
    const double escale = std::max(1.0, std::abs(e0));

    for (long long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * h;

        const Vec k1q = v;
        const Vec k1v = accel_at(t, q, v);
        const Vec q2 = q + 0.5 * h * k1q, v2 = v + 0.5 * h * k1v;
        const Vec k2q = v2;
        const Vec k2v = accel_at(t + 0.5 * h, q2, v2);
        const Vec q3 = q + 0.5 * h * k2q, v3 = v + 0.5 * h * k2v;
        const Vec k3q = v3;
        const Vec k3v = accel_at(t + 0.5 * h, q3, v3);
        const Vec q4 = q + h * k3q, v4 = v + h * k3v;
        const Vec k4q = v4;
        const Vec k4v = accel_at(t + h, q4, v4);

        q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

        const double t_next = static_cast<double>(step + 1) * h;
        if (!sys.admits(q))
            throw GuardViolation("trajectory left the domain guard of '" + sys.name + "' at t=" +
                                     std::to_string(t_next),
                                 t_next, true);
        record(t_next, q, v);
        traj.max_energy_drift = std::max(traj.max_energy_drift, std::abs(traj.energies.back() - e0) / escale);
    }
    traj.rejected = traj.max_energy_drift > cfg.energy_drift_limit;
    return traj;
}

Vec complete_lift_eval(const VectorFieldDef& X, const State& s) {
    const int n = X.dim();
    if (s.q.size() != n || s.v.size() != n) throw InvalidParameter("complete_lift_eval: dimension mismatch");
    Vec out(2 * n);
    out.head(n) = X.eval(s.q);
    out.tail(n) = X.jacobian(s.q) * s.v;
    return out;
}

Vec hamiltonian_vf_affine(const MetricField& g, const VectorFieldDef& X, const State& s) {
    const int n = g.dim();
    if (X.dim() != n || s.q.size() != n || s.v.size() != n)
        throw InvalidParameter("hamiltonian_vf_affine: dimension mismatch");
    const Mat gq = g.eval(s.q);
    const Mat ginv = metric_inverse(gq);
    const Tensor3 dg = g.deriv(s.q);
    const Vec x = X.eval(s.q);
    const Mat jx = X.jacobian(s.q);

    // G = alpha_j v^j with alpha = g X
    const Vec dG_dv = gq * x;
    Vec dG_dq = Vec::Zero(n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            double dalpha = 0.0;
            for (int m = 0; m < n; ++m) dalpha += dg(j, m, k) * x[m] + gq(j, m) * jx(m, k);
            dG_dq[k] += dalpha * s.v[j];
        }

    const Vec w = ginv * dG_dv;
    Vec bracket(n);
    for (int k = 0; k < n; ++k) {
        double b = 0.0;
        for (int l = 0; l < n; ++l) {
            double c = 0.0;
            for (int m = 0; m < n; ++m) c += (dg(l, m, k) - dg(k, m, l)) * s.v[m];
            b += c * w[l];
        }
        bracket[k] = b - dG_dq[k];
    }

    Vec out(2 * n);
    out.head(n) = w;
    out.tail(n) = ginv * bracket;
    return out;
}

}  // namespace vgeo
