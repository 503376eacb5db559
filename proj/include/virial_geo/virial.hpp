#pragma once

// Virial functions, time averages along trajectories and residual checkers
// for the virial identities of mechanical-type systems.

#include "virial_geo/dynamics.hpp"

#include <functional>
#include <optional>
#include <string>

namespace vgeo {

struct Observable {
    std::string name;
    std::function<double(const SystemSpec&, const State&)> eval;
};

// Trapezoid averages of an observable over [0, T] and over the first half
// of the run.
struct RunningAverage {
    double value_T = 0.0;
    double value_half = 0.0;
    double T = 0.0;
    double T_half = 0.0;
    double max_abs = 0.0;  // max |A| over the samples
};

enum class RelationKind { General, Killing, Conformal, TwoMetric, HomogeneousPartition };

std::string to_string(RelationKind kind);

struct VirialRelation {
    std::string name;
    RelationKind kind = RelationKind::General;
    std::optional<VectorFieldDef> field;
    std::optional<ScalarField> factor;
    std::optional<MetricField> secondary;
    double mu = 0.0;
    double nu = 0.0;

    static VirialRelation general(std::string name, VectorFieldDef X);
    static VirialRelation killing(std::string name, VectorFieldDef X);
    static VirialRelation conformal(std::string name, VectorFieldDef X, ScalarField f);
    static VirialRelation two_metric(std::string name, VectorFieldDef X, ScalarField f, MetricField g2);
    static VirialRelation homogeneous(std::string name, double mu, double nu);
};

// The relation a catalog entry naturally supports: Killing fields give the
// Killing relation, homothetic/conformal fields with a factor the conformal
// one, fields with a secondary metric the two-metric one, anything else the
// general relation.
VirialRelation default_relation(const CatalogEntry& entry);

struct VirialReport {
    std::string relation;
    RelationKind kind = RelationKind::General;
    double residual = 0.0;     // <integrand> over [0, T]
    double value_half = 0.0;   // <integrand> over [0, T/2]
    // residual minus the exact finite-time value fixed by the virial function
    // G, i.e. the quadrature defect. Absent for the homogeneous partition.
    std::optional<double> balance_check;
    std::optional<double> G_start;
    std::optional<double> G_end;
    double G_max = 0.0;
    double integrand_max = 0.0;
    double T = 0.0;
    bool converged = false;
    double tolerance = 0.0;  // convergence threshold used
};

struct PartitionResult {
    double avg_T = 0.0;
    double avg_V = 0.0;
    double pred_T = 0.0;
    double pred_V = 0.0;
    double energy = 0.0;
    bool converged = false;
};

// G(q, v) = g_ij X^i v^j
double affine_virial(const MetricField& g, const VectorFieldDef& X, const State& s);

// Throws RejectedTrajectory for energy-rejected runs, InsufficientSamples below 3 samples.
RunningAverage time_average(const SystemSpec& sys, const Trajectory& traj, const Observable& A);

// Convergence threshold of the two-window test: max(1e-6, 1e-3 * scale).
double convergence_threshold(double scale);

// Pointwise integrand whose time average the relation constrains.
Observable relation_integrand(const VirialRelation& rel);

// The virial function G whose time derivative along the dynamics is the
// integrand (up to sign for the Killing relation). Absent for the
// homogeneous partition.
std::optional<Observable> relation_virial_function(const VirialRelation& rel);

VirialReport virial_residual(const SystemSpec& sys, const Trajectory& traj, const VirialRelation& rel);

// <T_g> and <V> against nu E / (nu + mu) and mu E / (nu + mu), E = energies[0].
PartitionResult homogeneous_partition(const SystemSpec& sys, const Trajectory& traj, double mu, double nu);

}  // namespace vgeo
