#include "virial_geo/geometry.hpp"

#include "virial_geo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vgeo {

namespace {

double fd_step(const Point& q, int k, double step_scale) {
    return step_scale * std::max(1.0, std::abs(q[k]));
}

void check_point(const Point& q, int dim, const char* who) {
    if (q.size() != dim)
        throw InvalidParameter(std::string(who) + ": point has dimension " + std::to_string(q.size()) +
                               ", chart has " + std::to_string(dim));
    if (!q.allFinite()) throw GuardViolation(std::string(who) + ": non-finite point");
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricField

MetricField::MetricField(int dim, EvalFn eval, DerivFn deriv)
    : dim_(dim), eval_(std::move(eval)), deriv_(std::move(deriv)) {
    if (dim_ < 1) throw InvalidParameter("metric dimension must be >= 1");
    if (!eval_) throw InvalidParameter("metric evaluator is empty");
}

Mat MetricField::eval(const Point& q) const {
    check_point(q, dim_, "metric");
    Mat g = eval_(q);
    if (g.rows() != dim_ || g.cols() != dim_) throw InvalidParameter("metric evaluator returned wrong shape");
    if (!g.allFinite()) throw GuardViolation("metric is not finite at point");
    return 0.5 * (g + g.transpose());
}

Tensor3 MetricField::deriv(const Point& q) const {
    if (!deriv_) return deriv_fd(q);
    check_point(q, dim_, "metric derivative");
    Tensor3 d = deriv_(q);
    if (d.dim() != dim_) throw InvalidParameter("metric derivative returned wrong shape");
    // symmetric in (i, j)
    for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j) {
                const double s = 0.5 * (d(i, j, k) + d(j, i, k));
                d(i, j, k) = s;
                d(j, i, k) = s;
            }
    return d;
}

Tensor3 MetricField::deriv_fd(const Point& q, double step_scale) const {
    Tensor3 d(dim_);
    for (int k = 0; k < dim_; ++k) {
        const double h = fd_step(q, k, step_scale);
        Point qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const Mat dg = (eval(qp) - eval(qm)) / (2.0 * h);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) d(i, j, k) = dg(i, j);
    }
    return d;
}

// ---------------------------------------------------------------------------
// VectorFieldDef

VectorFieldDef::VectorFieldDef(int dim, EvalFn eval, JacobianFn jacobian)
    : dim_(dim), eval_(std::move(eval)), jac_(std::move(jacobian)) {
    if (dim_ < 1) throw InvalidParameter("vector field dimension must be >= 1");
    if (!eval_) throw InvalidParameter("vector field evaluator is empty");
}

Vec VectorFieldDef::eval(const Point& q) const {
    check_point(q, dim_, "vector field");
    Vec x = eval_(q);
    if (x.size() != dim_) throw InvalidParameter("vector field evaluator returned wrong length");
    if (!x.allFinite()) throw GuardViolation("vector field is not finite at point");
    return x;
}

Mat VectorFieldDef::jacobian(const Point& q) const {
    if (!jac_) return jacobian_fd(q);
    check_point(q, dim_, "vector field jacobian");
    Mat j = jac_(q);
    if (j.rows() != dim_ || j.cols() != dim_) throw InvalidParameter("jacobian returned wrong shape");
    if (!j.allFinite()) throw GuardViolation("vector field jacobian is not finite at point");
    return j;
}

Mat VectorFieldDef::jacobian_fd(const Point& q, double step_scale) const {
    Mat jac(dim_, dim_);
    for (int k = 0; k < dim_; ++k) {
        const double h = fd_step(q, k, step_scale);
        Point qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        jac.col(k) = (eval(qp) - eval(qm)) / (2.0 * h);
    }
    return jac;
}

VectorFieldDef VectorFieldDef::scaled(double a) const {
    auto ev = eval_;
    JacobianFn jac;
    if (jac_) {
        auto j = jac_;
        jac = [j, a](const Point& q) -> Mat { return a * j(q); };
    }
    return VectorFieldDef(dim_, [ev, a](const Point& q) -> Vec { return a * ev(q); }, jac);
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(int dim, EvalFn eval, GradientFn gradient)
    : dim_(dim), eval_(std::move(eval)), grad_(std::move(gradient)) {
    if (dim_ < 1) throw InvalidParameter("scalar field dimension must be >= 1");
    if (!eval_) throw InvalidParameter("scalar field evaluator is empty");
}

double ScalarField::eval(const Point& q) const {
    check_point(q, dim_, "scalar field");
    const double x = eval_(q);
    if (!std::isfinite(x)) throw GuardViolation("scalar field is not finite at point");
    return x;
}

Vec ScalarField::gradient(const Point& q) const {
    if (!grad_) return gradient_fd(q);
    check_point(q, dim_, "scalar gradient");
    Vec g = grad_(q);
    if (g.size() != dim_) throw InvalidParameter("gradient returned wrong length");
    if (!g.allFinite()) throw GuardViolation("scalar gradient is not finite at point");
    return g;
}

Vec ScalarField::gradient_fd(const Point& q, double step_scale) const {
    Vec g(dim_);
    for (int k = 0; k < dim_; ++k) {
        const double h = fd_step(q, k, step_scale);
        Point qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        g[k] = (eval(qp) - eval(qm)) / (2.0 * h);
    }
    return g;
}

ScalarField ScalarField::constant(int dim, double c) {
    return ScalarField(
        dim, [c](const Point&) { return c; }, [dim](const Point&) -> Vec { return Vec::Zero(dim); });
}

// ---------------------------------------------------------------------------
// Operations

std::string to_string(ConformalKind kind) {
    switch (kind) {
        case ConformalKind::Killing: return "Killing";
        case ConformalKind::Homothetic: return "Homothetic";
        case ConformalKind::ProperConformal: return "ProperConformal";
        case ConformalKind::NonConformal: return "NonConformal";
    }
    return "Unknown";
}

Mat metric_inverse(const Mat& g, double det_floor) {
    const int n = static_cast<int>(g.rows());
    if (g.cols() != n || n == 0) throw InvalidParameter("metric_inverse: matrix must be square and non-empty");
    if (!g.allFinite()) throw SingularMetric("metric_inverse: non-finite metric");
    const double scale = g.cwiseAbs().maxCoeff();
    if (scale == 0.0) throw SingularMetric("metric_inverse: zero metric");
    Eigen::PartialPivLU<Mat> lu(g);
    const double det = lu.determinant();
    if (std::abs(det) < det_floor * std::pow(scale, n))
        throw SingularMetric("metric_inverse: |det g| below nondegeneracy floor");
    Mat inv = lu.inverse();
    return 0.5 * (inv + inv.transpose());
}

Mat lie_derivative_metric(const VectorFieldDef& X, const MetricField& g, const Point& q) {
    const int n = g.dim();
    const Vec x = X.eval(q);
    const Mat jx = X.jacobian(q);
    const Mat gq = g.eval(q);
    const Tensor3 dg = g.deriv(q);

    Mat L(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += x[k] * dg(i, j, k) + gq(i, k) * jx(k, j) + gq(j, k) * jx(k, i);
            L(i, j) = s;
            L(j, i) = s;
        }
    return L;
}

Tensor3 christoffel(const MetricField& g, const Point& q) {
    const int n = g.dim();
    const Mat ginv = metric_inverse(g.eval(q));
    const Tensor3 dg = g.deriv(q);

    Tensor3 gamma(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) s += ginv(i, l) * (dg(l, j, k) + dg(l, k, j) - dg(j, k, l));
                gamma(i, j, k) = 0.5 * s;
                gamma(i, k, j) = 0.5 * s;
            }
    return gamma;
}

double quadratic_energy(const Mat& K, const Vec& v) { return 0.5 * v.dot(K * v); }

double kinetic_energy(const MetricField& g, const Point& q, const Vec& v) {
    if (v.size() != g.dim()) throw InvalidParameter("kinetic_energy: velocity dimension mismatch");
    return quadratic_energy(g.eval(q), v);
}

Vec flat_map(const MetricField& g, const VectorFieldDef& X, const Point& q) { return g.eval(q) * X.eval(q); }

Vec sharp_map(const MetricField& g, const Vec& alpha, const Point& q) {
    return metric_inverse(g.eval(q)) * alpha;
}

Mat covariant_derivative_flat(const MetricField& g, const VectorFieldDef& X, const Point& q) {
    const int n = g.dim();
    const Mat gq = g.eval(q);
    const Tensor3 dg = g.deriv(q);
    const Vec x = X.eval(q);
    const Mat jx = X.jacobian(q);
    const Vec alpha = gq * x;
    const Tensor3 gamma = christoffel(g, q);

    Mat out(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            // d_k alpha_j = d_k g_jm X^m + g_jm d_k X^m
            double dalpha = 0.0;
            for (int m = 0; m < n; ++m) dalpha += dg(j, m, k) * x[m] + gq(j, m) * jx(m, k);
            double conn = 0.0;
            for (int i = 0; i < n; ++i) conn += alpha[i] * gamma(i, j, k);
            out(j, k) = dalpha - conn;
        }
    return out;
}

ConformalClassification classify_vector_field(const VectorFieldDef& X, const MetricField& g,
                                              const std::vector<Point>& samples, double tol,
                                              const Guard& guard) {
    if (!(tol > 0.0)) throw InvalidParameter("classify_vector_field: tol must be positive");
    const int n = g.dim();

    ConformalClassification out;
    double cmin = 0.0, cmax = 0.0;
    for (const Point& q : samples) {
        if (guard && !guard(q)) {
            ++out.samples_skipped;
            continue;
        }
        Mat gq, ginv, L;
        try {
            gq = g.eval(q);
            ginv = metric_inverse(gq);
            L = lie_derivative_metric(X, g, q);
        } catch (const SingularMetric&) {
            ++out.samples_skipped;
            continue;
        } catch (const GuardViolation&) {
            ++out.samples_skipped;
            continue;
        }
        const double c = (ginv * L).trace() / n;
        const double residual = (L - c * gq).cwiseAbs().maxCoeff() / (1.0 + gq.cwiseAbs().maxCoeff());
        out.max_residual = std::max(out.max_residual, residual);
        if (out.samples_used == 0) {
            cmin = cmax = c;
        } else {
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        out.f_samples.push_back({q, c});
        ++out.samples_used;
    }
    if (out.samples_used < kMinClassifySamples)
        throw InsufficientSamples("classify_vector_field: " + std::to_string(out.samples_used) +
                                  " usable samples, need at least " + std::to_string(kMinClassifySamples));

    out.factor_spread = cmax - cmin;
    double mean = 0.0;
    for (const auto& s : out.f_samples) mean += s.f;
    mean /= static_cast<double>(out.f_samples.size());

    if (out.max_residual > tol) {
        out.kind = ConformalKind::NonConformal;
    } else if (out.factor_spread > tol) {
        out.kind = ConformalKind::ProperConformal;
    } else if (std::abs(mean) <= tol) {
        out.kind = ConformalKind::Killing;
        out.lambda = mean;
    } else {
        out.kind = ConformalKind::Homothetic;
        out.lambda = mean;
    }
    return out;
}

double derivative_crosscheck(const MetricField& g, const Point& q, double step_scale) {
    if (g.deriv_mode() != DerivMode::Analytic)
        throw std::invalid_argument("derivative_crosscheck: metric has no analytic derivative");
    return max_abs_diff(g.deriv(q), g.deriv_fd(q, step_scale));
}

double derivative_crosscheck(const VectorFieldDef& X, const Point& q, double step_scale) {
    if (X.jacobian_mode() != DerivMode::Analytic)
        throw std::invalid_argument("derivative_crosscheck: vector field has no analytic jacobian");
    return (X.jacobian(q) - X.jacobian_fd(q, step_scale)).cwiseAbs().maxCoeff();
}

double derivative_crosscheck(const ScalarField& f, const Point& q, double step_scale) {
    if (f.gradient_mode() != DerivMode::Analytic)
        throw std::invalid_argument("derivative_crosscheck: scalar field has no analytic gradient");
    return (f.gradient(q) - f.gradient_fd(q, step_scale)).cwiseAbs().maxCoeff();
}

}  // namespace vgeo
