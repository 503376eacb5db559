#pragma once

// Catalog of example systems with analytic derivatives, domain guards and
// named vector fields with their known classification.

#include "virial_geo/dynamics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vgeo {

enum class SystemFamily { Flat, Sphere, Gnomonic, Polar, Kepler, Toda, Radial };

// Closed family of potentials. Not every family accepts every kind; see
// build_system.
//   Zero      V = 0
//   Cosine    V = k cos(theta) on the sphere (pulled back on the gnomonic chart)
//   Harmonic  V = k/2 |q|^2 (k/2 r^2 in polar-type charts)
//   Kepler    V = -k / r
//   Toda      V = sum_i exp(q_i - q_{i+1}), q_{n+1} = q_1
enum class PotentialKind { Zero, Cosine, Harmonic, Kepler, Toda };

std::string to_string(SystemFamily f);
std::string to_string(PotentialKind p);

struct SystemId {
    SystemFamily family = SystemFamily::Flat;
    PotentialKind potential = PotentialKind::Harmonic;
    int n = 2;              // flat, toda
    double R = 1.0;         // sphere radius
    double lambda = 1.0;    // gnomonic curvature, lambda = 1 / R^2
    double k = 1.0;         // potential strength (gamma m m' for kepler)
    double m = 1.0;         // mass folded into the metric (kepler, toda)
    double h_power = 2.0;   // radial: h(r) = r^h_power

    static SystemId flat(int n, PotentialKind V = PotentialKind::Harmonic, double k = 1.0);
    static SystemId sphere(double R, PotentialKind V = PotentialKind::Cosine, double k = 1.0);
    static SystemId gnomonic(double lambda, PotentialKind V = PotentialKind::Cosine, double k = 1.0);
    static SystemId polar(PotentialKind V = PotentialKind::Harmonic, double k = 1.0);
    static SystemId kepler(double gamma_mm = 1.0, double m = 1.0);
    static SystemId toda(int n = 3, double m = 1.0);
    static SystemId radial(double h_power, PotentialKind V = PotentialKind::Harmonic, double k = 1.0);
};

// Canonical short name, e.g. "kepler" or "flat-oscillator".
std::string system_name(const SystemId& id);

// Resolves a system name plus string parameters (as read from a config file).
// Names: flat, flat-oscillator, sphere, gnomonic, polar, kepler, toda, radial.
// Parameters: n, R, lambda, k, m, h (radial power), potential
// (zero|cosine|harmonic|kepler|toda). Throws InvalidParameter.
SystemId parse_system_id(const std::string& name, const std::map<std::string, std::string>& params = {});

std::vector<std::string> system_names();

// Default instance of every bundled system (the acceptance set).
std::vector<SystemId> bundled_systems();

SystemSpec build_system(const SystemId& id);

struct Fixture {
    std::string name;
    State state;
    IntegratorConfig config;
};

inline constexpr std::uint64_t kDefaultSeed = 20150101;

// Deterministic initial states with bounded motion. The first entry is the
// default fixture.
std::vector<Fixture> reference_initial_states(const SystemId& id, std::uint64_t seed = kDefaultSeed);
Fixture find_fixture(const SystemId& id, const std::string& name, std::uint64_t seed = kDefaultSeed);

// Period of the Kepler orbit through the state (bound orbits only).
double kepler_period(const SystemId& id, const State& s);

// Uniform random points of the system's sample box passing its guard and the
// optional extra predicate. Deterministic in the seed.
std::vector<Point> sample_points(const SystemSpec& sys, int count, std::uint64_t seed, const Guard& extra = {});

// Deterministic uniform double in [0, 1) from a 64-bit Mersenne twister draw.
double unit_uniform(std::uint64_t bits);

// Chart change from sphere (theta, phi) of radius R, lower hemisphere, to the
// gnomonic polar chart (r, phi) with r = -R tan(theta).
State sphere_to_gnomonic(const State& s, double R);
// Jacobian d(theta, phi) / d(r, phi) of the inverse chart change at r.
Mat gnomonic_to_sphere_jacobian(double r, double R);
double gnomonic_to_sphere_theta(double r, double R);

}  // namespace vgeo
