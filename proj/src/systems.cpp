#include "virial_geo/systems.hpp"

#include "virial_geo/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace vgeo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGuardEps = 1e-6;

CatalogEntry make_entry(std::string name, std::string label, VectorFieldDef field, ConformalKind kind) {
    return CatalogEntry{std::move(name), std::move(label), std::move(field), kind, 0.0, std::nullopt,
                        std::nullopt,    std::nullopt,     Guard{}};
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec box(std::initializer_list<double> values) {
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

// ---------------------------------------------------------------------------
// Metrics

MetricField euclidean(int n, double m) {
    return MetricField(
        n, [n, m](const Point&) -> Mat { return m * Mat::Identity(n, n); },
        [n](const Point&) { return Tensor3(n); });
}

// m (dr^2 + r^2 dphi^2)
MetricField polar_metric(double m) {
    return MetricField(
        2,
        [m](const Point& q) -> Mat {
            Mat g = Mat::Zero(2, 2);
            g(0, 0) = m;
            g(1, 1) = m * q[0] * q[0];
            return g;
        },
        [m](const Point& q) {
            Tensor3 d(2);
            d(1, 1, 0) = 2.0 * m * q[0];
            return d;
        });
}

// R^2 (dtheta^2 + sin^2 theta dphi^2)
MetricField sphere_metric(double R) {
    const double R2 = R * R;
    return MetricField(
        2,
        [R2](const Point& q) -> Mat {
            const double s = std::sin(q[0]);
            Mat g = Mat::Zero(2, 2);
            g(0, 0) = R2;
            g(1, 1) = R2 * s * s;
            return g;
        },
        [R2](const Point& q) {
            Tensor3 d(2);
            d(1, 1, 0) = 2.0 * R2 * std::sin(q[0]) * std::cos(q[0]);
            return d;
        });
}

// dr^2 / (1 + lambda r^2)^2 + r^2 dphi^2 / (1 + lambda r^2)
MetricField gnomonic_metric(double lambda) {
    return MetricField(
        2,
        [lambda](const Point& q) -> Mat {
            const double r = q[0];
            const double w = 1.0 + lambda * r * r;
            Mat g = Mat::Zero(2, 2);
            g(0, 0) = 1.0 / (w * w);
            g(1, 1) = r * r / w;
            return g;
        },
        [lambda](const Point& q) {
            const double r = q[0];
            const double w = 1.0 + lambda * r * r;
            Tensor3 d(2);
            d(0, 0, 0) = -4.0 * lambda * r / (w * w * w);
            d(1, 1, 0) = 2.0 * r / (w * w);
            return d;
        });
}

// h(r) dr^2 + r^2 (dtheta^2 + sin^2 theta dphi^2), h = r^p
MetricField radial_metric(double p) {
    return MetricField(
        3,
        [p](const Point& q) -> Mat {
            const double r = q[0], s = std::sin(q[1]);
            Mat g = Mat::Zero(3, 3);
            g(0, 0) = std::pow(r, p);
            g(1, 1) = r * r;
            g(2, 2) = r * r * s * s;
            return g;
        },
        [p](const Point& q) {
            const double r = q[0], s = std::sin(q[1]), c = std::cos(q[1]);
            Tensor3 d(3);
            d(0, 0, 0) = p * std::pow(r, p - 1.0);
            d(1, 1, 0) = 2.0 * r;
            d(2, 2, 0) = 2.0 * r * s * s;
            d(2, 2, 1) = 2.0 * r * r * s * c;
            return d;
        });
}

// ---------------------------------------------------------------------------
// Potentials

ScalarField zero_potential(int n) { return ScalarField::constant(n, 0.0); }

ScalarField cartesian_harmonic(int n, double k) {
    return ScalarField(
        n, [k](const Point& q) { return 0.5 * k * q.squaredNorm(); }, [k](const Point& q) -> Vec { return k * q; });
}

// Functions of the first coordinate r only.
ScalarField radial_potential(int n, std::function<double(double)> v, std::function<double(double)> dv) {
    return ScalarField(
        n, [v](const Point& q) { return v(q[0]); },
        [n, dv](const Point& q) -> Vec {
            Vec g = Vec::Zero(n);
            g[0] = dv(q[0]);
            return g;
        });
}

ScalarField radial_harmonic(int n, double k) {
    return radial_potential(
        n, [k](double r) { return 0.5 * k * r * r; }, [k](double r) { return k * r; });
}

ScalarField radial_kepler(int n, double k) {
    return radial_potential(
        n, [k](double r) { return -k / r; }, [k](double r) { return k / (r * r); });
}

ScalarField toda_potential(int n) {
    return ScalarField(
        n,
        [n](const Point& q) {
            double v = 0.0;
            for (int i = 0; i < n; ++i) v += std::exp(q[i] - q[(i + 1) % n]);
            return v;
        },
        [n](const Point& q) -> Vec {
            Vec g(n);
            for (int k = 0; k < n; ++k) {
                const int next = (k + 1) % n, prev = (k + n - 1) % n;
                g[k] = std::exp(q[k] - q[next]) - std::exp(q[prev] - q[k]);
            }
            return g;
        });
}

// ---------------------------------------------------------------------------
// Vector fields

VectorFieldDef constant_field(const Vec& x) {
    const auto n = static_cast<int>(x.size());
    return VectorFieldDef(
        n, [x](const Point&) -> Vec { return x; }, [n](const Point&) -> Mat { return Mat::Zero(n, n); });
}

VectorFieldDef unit_field(int n, int k) {
    Vec e = Vec::Zero(n);
    e[k] = 1.0;
    return constant_field(e);
}

// X = C r^{1 - p/2} d/dr in a chart whose first coordinate is r.
VectorFieldDef radial_power_field(int n, double exponent) {
    return VectorFieldDef(
        n,
        [n, exponent](const Point& q) -> Vec {
            Vec x = Vec::Zero(n);
            x[0] = std::pow(q[0], exponent);
            return x;
        },
        [n, exponent](const Point& q) -> Mat {
            Mat j = Mat::Zero(n, n);
            j(0, 0) = exponent == 0.0 ? 0.0 : exponent * std::pow(q[0], exponent - 1.0);
            return j;
        });
}

// Euclidean translations written in polar coordinates (r, phi).
VectorFieldDef polar_translation_x() {
    return VectorFieldDef(
        2, [](const Point& q) -> Vec { return vec2(std::cos(q[1]), -std::sin(q[1]) / q[0]); },
        [](const Point& q) -> Mat {
            const double r = q[0], c = std::cos(q[1]), s = std::sin(q[1]);
            Mat j(2, 2);
            j << 0.0, -s, s / (r * r), -c / r;
            return j;
        });
}

VectorFieldDef polar_translation_y() {
    return VectorFieldDef(
        2, [](const Point& q) -> Vec { return vec2(std::sin(q[1]), std::cos(q[1]) / q[0]); },
        [](const Point& q) -> Mat {
            const double r = q[0], c = std::cos(q[1]), s = std::sin(q[1]);
            Mat j(2, 2);
            j << 0.0, c, -c / (r * r), -s / r;
            return j;
        });
}

// ---------------------------------------------------------------------------
// Catalogs

std::vector<CatalogEntry> polar_catalog(PotentialKind V) {
    std::vector<CatalogEntry> cat;
    auto dil = make_entry("dilation", "r∂r", radial_power_field(2, 1.0), ConformalKind::Homothetic);
    dil.expected_lambda = 2.0;
    dil.conformal_factor = ScalarField::constant(2, 2.0);
    if (V == PotentialKind::Harmonic) dil.potential_degree = 2.0;
    if (V == PotentialKind::Kepler) dil.potential_degree = -1.0;
    cat.push_back(make_entry("rotation", "∂φ", unit_field(2, 1), ConformalKind::Killing));
    cat.push_back(make_entry("translation-killing", "cosφ∂r−(1/r)sinφ∂φ", polar_translation_x(),
                             ConformalKind::Killing));
    cat.push_back(make_entry("translation-killing-sin", "sinφ∂r+(1/r)cosφ∂φ", polar_translation_y(),
                             ConformalKind::Killing));
    cat.push_back(std::move(dil));
    return cat;
}

SystemSpec build_flat(const SystemId& id) {
    const int n = id.n;
    if (n < 1) throw InvalidParameter("flat: n must be >= 1");
    ScalarField V = zero_potential(n);
    if (id.potential == PotentialKind::Harmonic)
        V = cartesian_harmonic(n, id.k);
    else if (id.potential != PotentialKind::Zero)
        throw InvalidParameter("flat: potential must be zero or harmonic");

    std::vector<CatalogEntry> cat;
    for (int k = 0; k < n; ++k) {
        const std::string idx = std::to_string(k + 1);
        cat.push_back(make_entry("translation-" + idx, "∂q" + idx, unit_field(n, k), ConformalKind::Killing));
    }
    if (n == 2) {
        cat.push_back(make_entry(
            "rotation", "−q2∂q1+q1∂q2",
            VectorFieldDef(
                2, [](const Point& q) -> Vec { return vec2(-q[1], q[0]); },
                [](const Point&) -> Mat {
                    Mat j(2, 2);
                    j << 0.0, -1.0, 1.0, 0.0;
                    return j;
                }),
            ConformalKind::Killing));
    }
    auto dil = make_entry(
        "dilation", "r∂r",
        VectorFieldDef(
            n, [](const Point& q) -> Vec { return q; }, [n](const Point&) -> Mat { return Mat::Identity(n, n); }),
        ConformalKind::Homothetic);
    dil.expected_lambda = 2.0;
    dil.conformal_factor = ScalarField::constant(n, 2.0);
    if (id.potential == PotentialKind::Harmonic) dil.potential_degree = 2.0;
    cat.push_back(std::move(dil));

    return SystemSpec{system_name(id),
                      euclidean(n, 1.0),
                      V,
                      [](const Point& q) { return q.allFinite(); },
                      std::move(cat),
                      Vec::Constant(n, -2.0),
                      Vec::Constant(n, 2.0)};
}

SystemSpec build_sphere(const SystemId& id) {
    if (!(id.R > 0.0)) throw InvalidParameter("sphere: R must be positive");
    ScalarField V = zero_potential(2);
    if (id.potential == PotentialKind::Cosine) {
        const double k = id.k;
        V = ScalarField(
            2, [k](const Point& q) { return k * std::cos(q[0]); },
            [k](const Point& q) -> Vec { return vec2(-k * std::sin(q[0]), 0.0); });
    } else if (id.potential != PotentialKind::Zero) {
        throw InvalidParameter("sphere: potential must be zero or cosine");
    }

    std::vector<CatalogEntry> cat;
    cat.push_back(make_entry("X3", "∂φ", unit_field(2, 1), ConformalKind::Killing));
    cat.push_back(make_entry(
        "X1", "cosφ∂θ−sinφcotθ∂φ",
        VectorFieldDef(
            2,
            [](const Point& q) -> Vec {
                return vec2(std::cos(q[1]), -std::sin(q[1]) * std::cos(q[0]) / std::sin(q[0]));
            },
            [](const Point& q) -> Mat {
                const double st = std::sin(q[0]), ct = std::cos(q[0]);
                const double sp = std::sin(q[1]), cp = std::cos(q[1]);
                Mat j(2, 2);
                j << 0.0, -sp, sp / (st * st), -cp * ct / st;
                return j;
            }),
        ConformalKind::Killing));

    auto conf = make_entry(
        "conformal-sin", "sinθ∂θ",
        VectorFieldDef(
            2, [](const Point& q) -> Vec { return vec2(std::sin(q[0]), 0.0); },
            [](const Point& q) -> Mat {
                Mat j = Mat::Zero(2, 2);
                j(0, 0) = std::cos(q[0]);
                return j;
            }),
        ConformalKind::ProperConformal);
    conf.conformal_factor = ScalarField(
        2, [](const Point& q) { return 2.0 * std::cos(q[0]); },
        [](const Point& q) -> Vec { return vec2(-2.0 * std::sin(q[0]), 0.0); });
    cat.push_back(std::move(conf));

    auto tan_field = make_entry(
        "tan-dilation", "tanθ∂θ",
        VectorFieldDef(
            2, [](const Point& q) -> Vec { return vec2(std::tan(q[0]), 0.0); },
            [](const Point& q) -> Mat {
                const double c = std::cos(q[0]);
                Mat j = Mat::Zero(2, 2);
                j(0, 0) = 1.0 / (c * c);
                return j;
            }),
        ConformalKind::NonConformal);
    tan_field.domain = [](const Point& q) { return std::abs(std::cos(q[0])) > 1e-2; };
    cat.push_back(std::move(tan_field));

    return SystemSpec{system_name(id),
                      sphere_metric(id.R),
                      V,
                      [](const Point& q) { return q.allFinite() && std::sin(q[0]) > kGuardEps; },
                      std::move(cat),
                      vec2(0.1, -kPi),
                      vec2(kPi - 0.1, kPi)};
}

SystemSpec build_gnomonic(const SystemId& id) {
    const double lambda = id.lambda;
    if (!(lambda > 0.0)) throw InvalidParameter("gnomonic: lambda must be positive");
    ScalarField V = zero_potential(2);
    if (id.potential == PotentialKind::Cosine) {
        // cos(theta) = -1 / sqrt(1 + lambda r^2) on the lower hemisphere
        const double k = id.k;
        V = ScalarField(
            2, [k, lambda](const Point& q) { return -k / std::sqrt(1.0 + lambda * q[0] * q[0]); },
            [k, lambda](const Point& q) -> Vec {
                const double w = 1.0 + lambda * q[0] * q[0];
                return vec2(k * lambda * q[0] / (w * std::sqrt(w)), 0.0);
            });
    } else if (id.potential != PotentialKind::Zero) {
        throw InvalidParameter("gnomonic: potential must be zero or cosine");
    }

    std::vector<CatalogEntry> cat;
    auto proj = make_entry(
        "projective-dilation", "r(1+λr²)∂r",
        VectorFieldDef(
            2, [lambda](const Point& q) -> Vec { return vec2(q[0] * (1.0 + lambda * q[0] * q[0]), 0.0); },
            [lambda](const Point& q) -> Mat {
                Mat j = Mat::Zero(2, 2);
                j(0, 0) = 1.0 + 3.0 * lambda * q[0] * q[0];
                return j;
            }),
        ConformalKind::NonConformal);
    // L_X g = f g' with g' the Euclidean metric in polar coordinates
    proj.conformal_factor = ScalarField(
        2, [lambda](const Point& q) { return 2.0 / (1.0 + lambda * q[0] * q[0]); },
        [lambda](const Point& q) -> Vec {
            const double w = 1.0 + lambda * q[0] * q[0];
            return vec2(-4.0 * lambda * q[0] / (w * w), 0.0);
        });
    proj.secondary_metric = polar_metric(1.0);
    cat.push_back(std::move(proj));
    cat.push_back(make_entry("rotation", "∂φ", unit_field(2, 1), ConformalKind::Killing));

    return SystemSpec{system_name(id),
                      gnomonic_metric(lambda),
                      V,
                      [](const Point& q) { return q.allFinite() && q[0] > kGuardEps; },
                      std::move(cat),
                      vec2(0.1, -kPi),
                      vec2(3.0, kPi)};
}

SystemSpec build_polar(const SystemId& id) {
    ScalarField V = zero_potential(2);
    if (id.potential == PotentialKind::Harmonic)
        V = radial_harmonic(2, id.k);
    else if (id.potential == PotentialKind::Kepler)
        V = radial_kepler(2, id.k);
    else if (id.potential != PotentialKind::Zero)
        throw InvalidParameter("polar: potential must be zero, harmonic or kepler");
    return SystemSpec{system_name(id),
                      polar_metric(1.0),
                      V,
                      [](const Point& q) { return q.allFinite() && q[0] > kGuardEps; },
                      polar_catalog(id.potential),
                      vec2(0.2, -kPi),
                      vec2(3.0, kPi)};
}

SystemSpec build_kepler(const SystemId& id) {
    if (!(id.k > 0.0) || !(id.m > 0.0)) throw InvalidParameter("kepler: gamma m m' and m must be positive");
    return SystemSpec{system_name(id),
                      polar_metric(id.m),
                      radial_kepler(2, id.k),
                      [](const Point& q) { return q.allFinite() && q[0] > kGuardEps; },
                      polar_catalog(PotentialKind::Kepler),
                      vec2(0.2, -kPi),
                      vec2(3.0, kPi)};
}

SystemSpec build_toda(const SystemId& id) {
    const int n = id.n;
    if (n < 2) throw InvalidParameter("toda: n must be >= 2");
    if (!(id.m > 0.0)) throw InvalidParameter("toda: m must be positive");
    std::vector<CatalogEntry> cat;
    for (int k = 0; k < n; ++k) {
        const std::string idx = std::to_string(k + 1);
        cat.push_back(make_entry("X" + idx, "∂q" + idx, unit_field(n, k), ConformalKind::Killing));
    }
    cat.push_back(make_entry("center", "Σ∂qk", constant_field(Vec::Ones(n)), ConformalKind::Killing));
    return SystemSpec{system_name(id),
                      euclidean(n, id.m),
                      toda_potential(n),
                      [](const Point& q) { return q.allFinite(); },
                      std::move(cat),
                      Vec::Constant(n, -1.0),
                      Vec::Constant(n, 1.0)};
}

SystemSpec build_radial(const SystemId& id) {
    const double p = id.h_power;
    if (!std::isfinite(p)) throw InvalidParameter("radial: h power must be finite");
    ScalarField V = zero_potential(3);
    if (id.potential == PotentialKind::Harmonic)
        V = radial_harmonic(3, id.k);
    else if (id.potential == PotentialKind::Kepler)
        V = radial_kepler(3, id.k);
    else if (id.potential != PotentialKind::Zero)
        throw InvalidParameter("radial: potential must be zero, harmonic or kepler");

    // X_r = r / h^{1/2} = r^{1 - p/2}, f = 2 / h^{1/2} = 2 r^{-p/2}
    const double exponent = 1.0 - 0.5 * p;
    std::string label;
    if (p == 0.0)
        label = "r∂r";
    else if (p == 2.0)
        label = "∂r";
    else {
        std::ostringstream os;
        os << "r^" << exponent << "∂r";
        label = os.str();
    }
    auto conf = make_entry("radial-conformal", label, radial_power_field(3, exponent),
                           p == 0.0 ? ConformalKind::Homothetic : ConformalKind::ProperConformal);
    conf.conformal_factor = ScalarField(
        3, [p](const Point& q) { return 2.0 * std::pow(q[0], -0.5 * p); },
        [p](const Point& q) -> Vec {
            Vec g = Vec::Zero(3);
            g[0] = p == 0.0 ? 0.0 : -p * std::pow(q[0], -0.5 * p - 1.0);
            return g;
        });
    if (p == 0.0) {
        conf.expected_lambda = 2.0;
        if (id.potential == PotentialKind::Harmonic) conf.potential_degree = 2.0;
        if (id.potential == PotentialKind::Kepler) conf.potential_degree = -1.0;
    }
    std::vector<CatalogEntry> cat;
    cat.push_back(std::move(conf));
    cat.push_back(make_entry("rotation", "∂φ", unit_field(3, 2), ConformalKind::Killing));

    return SystemSpec{system_name(id),
                      radial_metric(p),
                      V,
                      [](const Point& q) { return q.allFinite() && q[0] > kGuardEps && std::sin(q[1]) > kGuardEps; },
                      std::move(cat),
                      box({0.3, 0.2, -kPi}),
                      box({3.0, kPi - 0.2, kPi})};
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw InvalidParameter("parameter '" + key + "': '" + value + "' is not a number");
    }
}

PotentialKind parse_potential(const std::string& s) {
    if (s == "zero") return PotentialKind::Zero;
    if (s == "cosine" || s == "cos") return PotentialKind::Cosine;
    if (s == "harmonic") return PotentialKind::Harmonic;
    if (s == "kepler") return PotentialKind::Kepler;
    if (s == "toda") return PotentialKind::Toda;
    throw InvalidParameter("unknown potential '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(SystemFamily f) {
    switch (f) {
        case SystemFamily::Flat: return "flat";
        case SystemFamily::Sphere: return "sphere";
        case SystemFamily::Gnomonic: return "gnomonic";
        case SystemFamily::Polar: return "polar";
        case SystemFamily::Kepler: return "kepler";
        case SystemFamily::Toda: return "toda";
        case SystemFamily::Radial: return "radial";
    }
    return "unknown";
}

std::string to_string(PotentialKind p) {
    switch (p) {
        case PotentialKind::Zero: return "zero";
        case PotentialKind::Cosine: return "cosine";
        case PotentialKind::Harmonic: return "harmonic";
        case PotentialKind::Kepler: return "kepler";
        case PotentialKind::Toda: return "toda";
    }
    return "unknown";
}

SystemId SystemId::flat(int n, PotentialKind V, double k) {
    SystemId id;
    id.family = SystemFamily::Flat;
    id.n = n;
    id.potential = V;
    id.k = k;
    return id;
}

SystemId SystemId::sphere(double R, PotentialKind V, double k) {
    SystemId id;
    id.family = SystemFamily::Sphere;
    id.R = R;
    id.lambda = 1.0 / (R * R);
    id.potential = V;
    id.k = k;
    return id;
}

SystemId SystemId::gnomonic(double lambda, PotentialKind V, double k) {
    SystemId id;
    id.family = SystemFamily::Gnomonic;
    id.lambda = lambda;
    id.R = 1.0 / std::sqrt(lambda);
    id.potential = V;
    id.k = k;
    return id;
}

SystemId SystemId::polar(PotentialKind V, double k) {
    SystemId id;
    id.family = SystemFamily::Polar;
    id.potential = V;
    id.k = k;
    return id;
}

SystemId SystemId::kepler(double gamma_mm, double m) {
    SystemId id;
    id.family = SystemFamily::Kepler;
    id.potential = PotentialKind::Kepler;
    id.k = gamma_mm;
    id.m = m;
    return id;
}

SystemId SystemId::toda(int n, double m) {
    SystemId id;
    id.family = SystemFamily::Toda;
    id.potential = PotentialKind::Toda;
    id.n = n;
    id.m = m;
    return id;
}

SystemId SystemId::radial(double h_power, PotentialKind V, double k) {
    SystemId id;
    id.family = SystemFamily::Radial;
    id.h_power = h_power;
    id.potential = V;
    id.k = k;
    return id;
}

std::string system_name(const SystemId& id) {
    if (id.family == SystemFamily::Flat && id.n == 1 && id.potential == PotentialKind::Harmonic)
        return "flat-oscillator";
    return to_string(id.family);
}

std::vector<std::string> system_names() {
    return {"flat", "flat-oscillator", "sphere", "gnomonic", "polar", "kepler", "toda", "radial"};
}

SystemId parse_system_id(const std::string& name, const std::map<std::string, std::string>& params) {
    SystemId id;
    if (name == "flat")
        id = SystemId::flat(2);
    else if (name == "flat-oscillator")
        id = SystemId::flat(1);
    else if (name == "sphere")
        id = SystemId::sphere(1.0);
    else if (name == "gnomonic")
        id = SystemId::gnomonic(1.0);
    else if (name == "polar")
        id = SystemId::polar();
    else if (name == "kepler")
        id = SystemId::kepler();
    else if (name == "toda")
        id = SystemId::toda();
    else if (name == "radial")
        id = SystemId::radial(2.0);
    else
        throw InvalidParameter("unknown system '" + name + "'");

    for (const auto& [key, value] : params) {
        if (key == "n") {
            const double n = parse_double(key, value);
            if (n != std::floor(n)) throw InvalidParameter("parameter 'n' must be an integer");
            id.n = static_cast<int>(n);
        } else if (key == "R") {
            id.R = parse_double(key, value);
            id.lambda = 1.0 / (id.R * id.R);
        } else if (key == "lambda") {
            id.lambda = parse_double(key, value);
            id.R = 1.0 / std::sqrt(id.lambda);
        } else if (key == "k" || key == "gamma_mm") {
            id.k = parse_double(key, value);
        } else if (key == "m") {
            id.m = parse_double(key, value);
        } else if (key == "h") {
            id.h_power = parse_double(key, value);
        } else if (key == "potential") {
            id.potential = parse_potential(value);
        } else {
            throw InvalidParameter("unknown system parameter '" + key + "'");
        }
    }
    return id;
}

std::vector<SystemId> bundled_systems() {
    return {SystemId::flat(1),   SystemId::flat(2),        SystemId::sphere(1.0), SystemId::gnomonic(1.0),
            SystemId::polar(),   SystemId::kepler(),       SystemId::toda(3),     SystemId::radial(2.0),
            SystemId::radial(0.0)};
}

SystemSpec build_system(const SystemId& id) {
    switch (id.family) {
        case SystemFamily::Flat: return build_flat(id);
        case SystemFamily::Sphere: return build_sphere(id);
        case SystemFamily::Gnomonic: return build_gnomonic(id);
        case SystemFamily::Polar: return build_polar(id);
        case SystemFamily::Kepler: return build_kepler(id);
        case SystemFamily::Toda: return build_toda(id);
        case SystemFamily::Radial: return build_radial(id);
    }
    throw InvalidParameter("unknown system family");
}

// ---------------------------------------------------------------------------
// Fixtures

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double kepler_period(const SystemId& id, const State& s) {
    const double r = s.q[0];
    const double e = 0.5 * id.m * (s.v[0] * s.v[0] + r * r * s.v[1] * s.v[1]) - id.k / r;
    if (!(e < 0.0)) throw InvalidParameter("kepler_period: orbit is not bound");
    const double a = -id.k / (2.0 * e);
    return 2.0 * kPi * std::sqrt(id.m * a * a * a / id.k);
}

namespace {

State make_state(std::initializer_list<double> q, std::initializer_list<double> v) { return {box(q), box(v)}; }

IntegratorConfig config(double dt, double t_end) {
    IntegratorConfig c;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

State sphere_default_state() { return make_state({2.5, 0.0}, {0.0, 1.0}); }

}  // namespace

std::vector<Fixture> reference_initial_states(const SystemId& id, std::uint64_t seed) {
    std::vector<Fixture> out;
    switch (id.family) {
        case SystemFamily::Flat: {
            const int n = id.n;
            if (n == 1) {
                out.push_back({"oscillator", make_state({1.0}, {0.0}), config(1e-3, 2.0 * kPi)});
            } else {
                Vec q = Vec::Zero(n), v = Vec::Zero(n);
                q[0] = 1.0;
                v[1] = 0.5;
                out.push_back({"default", {q, v}, config(1e-3, 100.0)});
            }
            break;
        }
        case SystemFamily::Sphere:
            out.push_back({"default", sphere_default_state(), config(1e-3, 100.0)});
            out.push_back({"equator", make_state({kPi / 2.0, 0.0}, {0.0, 1.0}), config(1e-3, 100.0)});
            break;
        case SystemFamily::Gnomonic:
            out.push_back({"default", sphere_to_gnomonic(sphere_default_state(), id.R), config(1e-3, 100.0)});
            break;
        case SystemFamily::Polar:
            if (id.potential == PotentialKind::Kepler)
                out.push_back({"default", make_state({1.0, 0.0}, {0.0, 1.1}), config(1e-3, 100.0)});
            else
                out.push_back({"default", make_state({1.0, 0.0}, {0.3, 0.8}), config(1e-3, 100.0)});
            break;
        case SystemFamily::Kepler: {
            const double vc = std::sqrt(id.k / id.m);
            const State ellipse = make_state({1.0, 0.0}, {0.0, 1.1 * vc});
            const State circular = make_state({1.0, 0.0}, {0.0, vc});
            out.push_back({"ellipse", ellipse, config(1e-3, 10.0 * kepler_period(id, ellipse))});
            out.push_back({"circular", circular, config(1e-3, 10.0 * kepler_period(id, circular))});
            break;
        }
        case SystemFamily::Toda: {
            std::mt19937_64 rng(seed);
            const int n = id.n;
            Vec q(n), v(n);
            for (int i = 0; i < n; ++i) q[i] = 0.5 * (2.0 * unit_uniform(rng()) - 1.0);
            for (int i = 0; i < n; ++i) v[i] = 0.5 * (2.0 * unit_uniform(rng()) - 1.0);
            v.array() -= v.mean();  // zero total momentum
            out.push_back({"default", {q, v}, config(1e-3, 100.0)});
            break;
        }
        case SystemFamily::Radial:
            out.push_back({"default", make_state({1.0, kPi / 2.0, 0.0}, {0.2, 0.3, 0.8}), config(1e-3, 100.0)});
            break;
    }
    return out;
}

Fixture find_fixture(const SystemId& id, const std::string& name, std::uint64_t seed) {
    auto all = reference_initial_states(id, seed);
    if (name.empty() || name == "default") return all.front();
    for (auto& f : all)
        if (f.name == name) return f;
    throw InvalidParameter("system '" + system_name(id) + "' has no fixture '" + name + "'");
}

std::vector<Point> sample_points(const SystemSpec& sys, int count, std::uint64_t seed, const Guard& extra) {
    std::mt19937_64 rng(seed);
    const int n = sys.dim();
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(count));
    const long long max_attempts = 1000LL * std::max(count, 1);
    for (long long attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
        if (attempt >= max_attempts)
            throw InsufficientSamples("sample_points: guard rejects nearly all of the sample box of '" +
                                      sys.name + "'");
        Point q(n);
        for (int k = 0; k < n; ++k) q[k] = sys.sample_lo[k] + unit_uniform(rng()) * (sys.sample_hi[k] - sys.sample_lo[k]);
        if (sys.admits(q) && (!extra || extra(q))) out.push_back(std::move(q));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sphere <-> gnomonic chart change

State sphere_to_gnomonic(const State& s, double R) {
    const double theta = s.q[0];
    if (!(theta > kPi / 2.0 && theta < kPi))
        throw InvalidParameter("sphere_to_gnomonic: theta must lie in the open lower hemisphere");
    const double t = std::tan(theta);
    const double r = -R * t;
    // dr/dt = -R sec^2(theta) dtheta/dt
    const double vr = -R * (1.0 + t * t) * s.v[0];
    return make_state({r, s.q[1]}, {vr, s.v[1]});
}

double gnomonic_to_sphere_theta(double r, double R) { return kPi - std::atan(r / R); }

Mat gnomonic_to_sphere_jacobian(double r, double R) {
    Mat j = Mat::Identity(2, 2);
    j(0, 0) = -1.0 / (R * (1.0 + r * r / (R * R)));
    return j;
}

}  // namespace vgeo
