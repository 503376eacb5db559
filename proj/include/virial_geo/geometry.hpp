#pragma once

// Pointwise tensor algebra on a single coordinate chart.

#include "virial_geo/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vgeo {

using Guard = std::function<bool(const Point&)>;

enum class DerivMode { Analytic, CentralDifference };

// Relative step of the central-difference fallback; the step along q^k is
// kFdStepScale * max(1, |q^k|).
inline constexpr double kFdStepScale = 1e-5;

// Metric g_ij(q) on an n-dimensional chart. The evaluator output is
// symmetrized on every call. When no analytic derivative is supplied the
// derivative falls back to central differences.
class MetricField {
public:
    using EvalFn = std::function<Mat(const Point&)>;
    using DerivFn = std::function<Tensor3(const Point&)>;  // [i][j][k] = d g_ij / d q^k

    MetricField(int dim, EvalFn eval, DerivFn deriv = nullptr);

    int dim() const { return dim_; }
    DerivMode deriv_mode() const { return deriv_ ? DerivMode::Analytic : DerivMode::CentralDifference; }

    Mat eval(const Point& q) const;
    Tensor3 deriv(const Point& q) const;
    Tensor3 deriv_fd(const Point& q, double step_scale = kFdStepScale) const;

private:
    int dim_;
    EvalFn eval_;
    DerivFn deriv_;
};

// Vector field X^i(q) with Jacobian [i][j] = d X^i / d q^j.
class VectorFieldDef {
public:
    using EvalFn = std::function<Vec(const Point&)>;
    using JacobianFn = std::function<Mat(const Point&)>;

    VectorFieldDef(int dim, EvalFn eval, JacobianFn jacobian = nullptr);

    int dim() const { return dim_; }
    DerivMode jacobian_mode() const { return jac_ ? DerivMode::Analytic : DerivMode::CentralDifference; }

    Vec eval(const Point& q) const;
    Mat jacobian(const Point& q) const;
    Mat jacobian_fd(const Point& q, double step_scale = kFdStepScale) const;

    // Returns the field a*X (used for scaling properties).
    VectorFieldDef scaled(double a) const;

private:
    int dim_;
    EvalFn eval_;
    JacobianFn jac_;
};

// Scalar function on the chart: potentials, conformal factors.
class ScalarField {
public:
    using EvalFn = std::function<double(const Point&)>;
    using GradientFn = std::function<Vec(const Point&)>;

    ScalarField(int dim, EvalFn eval, GradientFn gradient = nullptr);

    int dim() const { return dim_; }
    DerivMode gradient_mode() const { return grad_ ? DerivMode::Analytic : DerivMode::CentralDifference; }

    double eval(const Point& q) const;
    Vec gradient(const Point& q) const;
    Vec gradient_fd(const Point& q, double step_scale = kFdStepScale) const;

    static ScalarField constant(int dim, double c);

private:
    int dim_;
    EvalFn eval_;
    GradientFn grad_;
};

enum class ConformalKind { Killing, Homothetic, ProperConformal, NonConformal };

std::string to_string(ConformalKind kind);

struct FactorSample {
    Point q;
    double f;
};

struct ConformalClassification {
    ConformalKind kind = ConformalKind::NonConformal;
    double lambda = 0.0;                 // fitted constant factor (Killing: ~0, Homothetic: lambda)
    std::vector<FactorSample> f_samples; // fitted c(q) at every used sample
    double max_residual = 0.0;           // max over samples of the relative fit residual
    double factor_spread = 0.0;          // max c(q) - min c(q)
    int samples_used = 0;
    int samples_skipped = 0;             // guard failures or singular metric
};

// Default classification tolerances.
inline constexpr double kClassifyTolAnalytic = 1e-8;
inline constexpr double kClassifyTolFiniteDiff = 1e-5;
inline constexpr int kMinClassifySamples = 8;

// g^{-1}. Throws SingularMetric when |det g| < det_floor * (max|g_ij|)^n.
Mat metric_inverse(const Mat& g, double det_floor = 1e-12);

// (L_X g)_ij = X^k d_k g_ij + g_ik d_j X^k + g_jk d_i X^k, exactly symmetric.
Mat lie_derivative_metric(const VectorFieldDef& X, const MetricField& g, const Point& q);

// Levi-Civita connection coefficients, [i][j][k] = Gamma^i_{jk}.
Tensor3 christoffel(const MetricField& g, const Point& q);

double kinetic_energy(const MetricField& g, const Point& q, const Vec& v);

// Quadratic form T_K(v) = 1/2 K(v, v) for a symmetric 2-tensor K.
double quadratic_energy(const Mat& K, const Vec& v);

// alpha_i = g_ij X^j
Vec flat_map(const MetricField& g, const VectorFieldDef& X, const Point& q);
// X^i = g^ij alpha_j
Vec sharp_map(const MetricField& g, const Vec& alpha, const Point& q);

// Covariant derivative of alpha = flat(X): entries d_k alpha_j - alpha_i Gamma^i_{jk},
// row j, column k. Antisymmetric iff X is Killing.
Mat covariant_derivative_flat(const MetricField& g, const VectorFieldDef& X, const Point& q);

// Fits L_X g = c(q) g per sample with c = tr(g^{-1} L_X g) / n and classifies X.
// Samples rejected by `guard` or with a singular metric are skipped and counted.
ConformalClassification classify_vector_field(const VectorFieldDef& X, const MetricField& g,
                                              const std::vector<Point>& samples, double tol,
                                              const Guard& guard = {});

// Max |analytic - central difference| over all derivative entries at q.
// Throws std::invalid_argument when the field has no analytic derivative.
double derivative_crosscheck(const MetricField& g, const Point& q, double step_scale = kFdStepScale);
double derivative_crosscheck(const VectorFieldDef& X, const Point& q, double step_scale = kFdStepScale);
double derivative_crosscheck(const ScalarField& f, const Point& q, double step_scale = kFdStepScale);

}  // namespace vgeo
