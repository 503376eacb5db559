#include "virial_geo/cli.hpp"

#include "virial_geo/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace vgeo::cli {

using nlohmann::json;

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

Vec vec_from_json(const json& j, const std::string& key) {
    if (!j.is_array()) throw InvalidParameter("config: '" + key + "' must be an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidParameter("config: '" + key + "' must be an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

double number_from_json(const json& j, const std::string& key) {
    if (!j.is_number()) throw InvalidParameter("config: '" + key + "' must be a number");
    return j.get<double>();
}

std::string param_string(const json& j, const std::string& key) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return format_number(j.get<double>());
    throw InvalidParameter("config: system parameter '" + key + "' must be a number or string");
}

std::string expected_text(const CatalogEntry& e) {
    std::string s = to_string(e.expected);
    if (e.expected == ConformalKind::Homothetic) s += "(λ=" + format_number(e.expected_lambda) + ")";
    return s;
}

Guard entry_guard(const SystemSpec& sys, const CatalogEntry& e) {
    if (!e.domain) return [&sys](const Point& q) { return sys.admits(q); };
    return [&sys, &e](const Point& q) { return sys.admits(q) && e.domain(q); };
}

double default_classify_tol(const SystemSpec& sys, const CatalogEntry& e) {
    const bool analytic =
        sys.metric.deriv_mode() == DerivMode::Analytic && e.field.jacobian_mode() == DerivMode::Analytic;
    return analytic ? kClassifyTolAnalytic : kClassifyTolFiniteDiff;
}

struct RelationOutcome {
    VirialRelation relation;
    std::string field;
    std::string classification;
    VirialReport report;
    std::optional<PartitionResult> partition;
    bool pass = false;
};

json relation_json(const RelationOutcome& r, double tol) {
    json j;
    j["name"] = r.relation.name;
    j["kind"] = to_string(r.relation.kind);
    j["field"] = r.field.empty() ? json(nullptr) : json(r.field);
    j["classification"] = r.classification.empty() ? json(nullptr) : json(r.classification);
    j["residual"] = number(r.report.residual);
    j["value_half"] = number(r.report.value_half);
    j["balance_check"] = number(r.report.balance_check);
    j["G_start"] = number(r.report.G_start);
    j["G_end"] = number(r.report.G_end);
    j["G_max"] = number(r.report.G_max);
    j["integrand_max"] = number(r.report.integrand_max);
    j["converged"] = r.report.converged;
    j["convergence_threshold"] = number(r.report.tolerance);
    j["tolerance"] = number(tol);
    j["verdict"] = r.pass ? "pass" : "fail";
    if (r.partition) {
        const auto& p = *r.partition;
        j["partition"] = {{"mu", number(r.relation.mu)},   {"nu", number(r.relation.nu)},
                          {"energy", number(p.energy)},    {"avg_T", number(p.avg_T)},
                          {"avg_V", number(p.avg_V)},      {"pred_T", number(p.pred_T)},
                          {"pred_V", number(p.pred_V)}};
    }
    return j;
}

json base_report(const RunConfig& cfg, const SystemSpec& sys, const std::string& fixture, const State& s0,
                 const IntegratorConfig& ic) {
    json params = json::object();
    for (const auto& [k, v] : cfg.params) params[k] = v;
    json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["tool"] = "virial-geo";
    rep["system"] = {{"name", sys.name}, {"params", params}, {"dim", sys.dim()}};
    rep["fixture"] = fixture.empty() ? json(nullptr) : json(fixture);
    rep["seed"] = cfg.seed;
    rep["initial_state"] = {{"q", vec_json(s0.q)}, {"v", vec_json(s0.v)}};
    rep["integrator"] = {{"method", ic.method},
                         {"dt", number(ic.dt)},
                         {"t_end", number(ic.t_end)},
                         {"energy_drift_limit", number(ic.energy_drift_limit)},
                         {"max_steps", ic.max_steps}};
    rep["relations"] = json::array();
    return rep;
}

std::string csv_for(const SystemSpec& sys, const Trajectory& traj, const std::vector<RelationOutcome>& rels,
                     int stride) {
    const int n = traj.dim;
    std::vector<Observable> gs, as;
    std::vector<std::string> gnames, anames;
    for (const auto& r : rels) {
        if (auto g = relation_virial_function(r.relation)) {
            gs.push_back(*g);
            gnames.push_back("G_" + r.relation.name);
        }
        as.push_back(relation_integrand(r.relation));
        anames.push_back("A_" + r.relation.name);
    }

    std::string out = "t";
    for (int i = 1; i <= n; ++i) out += ",q" + std::to_string(i);
    for (int i = 1; i <= n; ++i) out += ",v" + std::to_string(i);
    out += ",E";
    for (const auto& s : gnames) out += "," + s;
    for (const auto& s : anames) out += "," + s;
    out += "\n";

    for (std::size_t i = 0; i < traj.size(); i += static_cast<std::size_t>(stride)) {
        const State st = traj.state(i);
        out += format_number(traj.times[i]);
        for (int k = 0; k < n; ++k) out += "," + format_number(st.q[k]);
        for (int k = 0; k < n; ++k) out += "," + format_number(st.v[k]);
        out += "," + format_number(traj.energies[i]);
        for (const auto& g : gs) out += "," + format_number(g.eval(sys, st));
        for (const auto& a : as) out += "," + format_number(a.eval(sys, st));
        out += "\n";
    }
    return out;
}

// Pads to a display width counted in UTF-8 code points.
std::string pad(const std::string& s, std::size_t width) {
    std::size_t cps = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++cps;
    return s + std::string(cps < width ? width - cps : 1, ' ');
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

long long max_steps_from_env(long long fallback) {
    const char* env = std::getenv(kMaxStepsEnv);
    if (!env || !*env) return fallback;
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v <= 0)
        throw InvalidParameter(std::string(kMaxStepsEnv) + " must be a positive integer");
    return v;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidParameter("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw InvalidParameter("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw InvalidParameter("config: top level must be an object");

    static const std::set<std::string> known = {"system", "fixture",  "initial", "integrator", "relations", "mu",
                                                "nu",     "output",   "seed",    "stride",     "tolerance",
                                                "samples"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw InvalidParameter("config: unknown key '" + key + "'");

    RunConfig cfg;
    if (j.contains("system")) {
        const json& s = j["system"];
        if (s.is_string()) {
            cfg.system = s.get<std::string>();
        } else if (s.is_object()) {
            if (!s.contains("name") || !s["name"].is_string()) throw InvalidParameter("config: system.name missing");
            cfg.system = s["name"].get<std::string>();
            if (s.contains("params")) {
                if (!s["params"].is_object()) throw InvalidParameter("config: system.params must be an object");
                for (const auto& [k, v] : s["params"].items()) cfg.params[k] = param_string(v, k);
            }
        } else {
            throw InvalidParameter("config: 'system' must be a string or object");
        }
    }
    if (j.contains("fixture")) {
        if (!j["fixture"].is_string()) throw InvalidParameter("config: 'fixture' must be a string");
        cfg.fixture = j["fixture"].get<std::string>();
    }
    if (j.contains("initial")) {
        const json& s = j["initial"];
        if (!s.is_object() || !s.contains("q") || !s.contains("v"))
            throw InvalidParameter("config: 'initial' needs 'q' and 'v'");
        cfg.initial = State{vec_from_json(s["q"], "initial.q"), vec_from_json(s["v"], "initial.v")};
    }
    if (j.contains("integrator")) {
        const json& s = j["integrator"];
        if (!s.is_object()) throw InvalidParameter("config: 'integrator' must be an object");
        for (const auto& [k, v] : s.items()) {
            if (k == "dt")
                cfg.dt = number_from_json(v, "integrator.dt");
            else if (k == "t_end")
                cfg.t_end = number_from_json(v, "integrator.t_end");
            else if (k == "energy_drift_limit")
                cfg.energy_drift_limit = number_from_json(v, "integrator.energy_drift_limit");
            else if (k == "method") {
                if (v != "rk4") throw InvalidParameter("config: integrator.method must be 'rk4'");
            } else
                throw InvalidParameter("config: unknown integrator key '" + k + "'");
        }
    }
    if (j.contains("relations")) {
        const json& r = j["relations"];
        if (!r.is_array()) throw InvalidParameter("config: 'relations' must be an array of names");
        for (const auto& x : r) {
            if (!x.is_string()) throw InvalidParameter("config: 'relations' must be an array of names");
            cfg.relations.push_back(x.get<std::string>());
        }
    }
    if (j.contains("mu")) cfg.mu = number_from_json(j["mu"], "mu");
    if (j.contains("nu")) cfg.nu = number_from_json(j["nu"], "nu");
    if (j.contains("output")) {
        const json& o = j["output"];
        if (!o.is_object()) throw InvalidParameter("config: 'output' must be an object");
        if (o.contains("dir")) cfg.output_dir = o["dir"].get<std::string>();
        if (o.contains("csv")) cfg.csv_name = o["csv"].get<std::string>();
        if (o.contains("json")) cfg.json_name = o["json"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw InvalidParameter("config: 'seed' must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("stride")) {
        if (!j["stride"].is_number_integer() || j["stride"].get<int>() < 1)
            throw InvalidParameter("config: 'stride' must be a positive integer");
        cfg.stride = j["stride"].get<int>();
    }
    if (j.contains("tolerance")) cfg.tolerance = number_from_json(j["tolerance"], "tolerance");
    if (j.contains("samples")) cfg.classify_samples = static_cast<int>(number_from_json(j["samples"], "samples"));
    return cfg;
}

VirialRelation resolve_relation(const SystemSpec& sys, const std::string& ref, std::optional<double> mu,
                                std::optional<double> nu) {
    if (ref == "homogeneous") {
        if (!mu || !nu) {
            // Fall back to a homothetic catalog field whose potential degree is known.
            for (const auto& e : sys.catalog)
                if (e.expected == ConformalKind::Homothetic && e.potential_degree) {
                    if (!mu) mu = e.expected_lambda;
                    if (!nu) nu = *e.potential_degree;
                    break;
                }
        }
        if (!mu || !nu)
            throw InvalidParameter("relation 'homogeneous' needs --mu and --nu for system '" + sys.name + "'");
        if (std::abs(*mu + *nu) < 1e-12) throw DegenerateDegrees("relation 'homogeneous': mu + nu vanishes");
        return VirialRelation::homogeneous("homogeneous", *mu, *nu);
    }
    const std::string prefix = "general:";
    if (ref.rfind(prefix, 0) == 0) {
        const CatalogEntry& e = sys.entry(ref.substr(prefix.size()));
        return VirialRelation::general("general-" + e.name, e.field);
    }
    return default_relation(sys.entry(ref));
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::unique_ptr<SystemSpec> sys;
    SystemId id;
    Fixture fixture;
    State s0;
    IntegratorConfig ic;
    std::vector<RelationOutcome> outcomes;

    try {
        if (cfg.stride < 1) throw InvalidParameter("stride must be >= 1");
        if (!(cfg.tolerance > 0.0)) throw InvalidParameter("tolerance must be positive");
        id = parse_system_id(cfg.system, cfg.params);
        sys = std::make_unique<SystemSpec>(build_system(id));
        fixture = find_fixture(id, cfg.fixture, cfg.seed);
        s0 = cfg.initial ? *cfg.initial : fixture.state;
        if (s0.q.size() != sys->dim() || s0.v.size() != sys->dim())
            throw InvalidParameter("initial state has the wrong dimension for '" + sys->name + "'");
        ic = fixture.config;
        if (cfg.dt) ic.dt = *cfg.dt;
        if (cfg.t_end) ic.t_end = *cfg.t_end;
        if (cfg.energy_drift_limit) ic.energy_drift_limit = *cfg.energy_drift_limit;
        ic.max_steps = max_steps_from_env(ic.max_steps);
        step_count(ic);  // validates dt / t_end

        std::vector<std::string> refs = cfg.relations;
        if (refs.empty())
            for (const auto& e : sys->catalog) refs.push_back(e.name);
        for (const auto& ref : refs) {
            RelationOutcome o{resolve_relation(*sys, ref, cfg.mu, cfg.nu), "", "", {}, std::nullopt, false};
            if (o.relation.kind != RelationKind::HomogeneousPartition) {
                const std::string fname = ref.rfind("general:", 0) == 0 ? ref.substr(8) : ref;
                const CatalogEntry& e = sys->entry(fname);
                o.field = e.name;
                try {
                    const auto pts = sample_points(*sys, cfg.classify_samples, cfg.seed, e.domain);
                    o.classification =
                        to_string(classify_vector_field(e.field, sys->metric, pts, default_classify_tol(*sys, e))
                                      .kind);
                } catch (const InsufficientSamples&) {
                    o.classification.clear();
                }
            }
            outcomes.push_back(std::move(o));
        }
    } catch (const std::exception& e) {
        err << "virial-geo: configuration error: " << e.what() << "\n";
        return kExitError;
    }

    const std::string fixture_name = cfg.initial ? std::string() : fixture.name;
    json rep = base_report(cfg, *sys, fixture_name, s0, ic);
    const std::string json_path = join_path(cfg.output_dir, cfg.json_name);
    const std::string csv_path = join_path(cfg.output_dir, cfg.csv_name);

    Trajectory traj;
    try {
        traj = integrate(*sys, s0, ic);
    } catch (const GuardViolation& gv) {
        rep["status"] = "rejected";
        rep["message"] = gv.what();
        rep["t_violation"] = gv.has_time() ? number(gv.time()) : json(nullptr);
        try {
            write_file_atomic(json_path, rep.dump(2) + "\n");
        } catch (const std::exception& e) {
            err << "virial-geo: " << e.what() << "\n";
        }
        err << "virial-geo: integration aborted: " << gv.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "virial-geo: integration error: " << e.what() << "\n";
        return kExitError;
    }

    rep["integrator"]["dt"] = number(traj.dt);
    rep["integrator"]["steps"] = traj.steps;
    rep["integrator"]["energy_drift_max"] = number(traj.max_energy_drift);
    rep["integrator"]["rejected"] = traj.rejected;

    try {
        if (traj.rejected) {
            rep["status"] = "rejected";
            rep["message"] = "energy drift " + format_number(traj.max_energy_drift) + " exceeds limit " +
                             format_number(traj.energy_drift_limit);
            write_file_atomic(csv_path, csv_for(*sys, traj, {}, cfg.stride));
            write_file_atomic(json_path, rep.dump(2) + "\n");
            err << "virial-geo: trajectory rejected: " << rep["message"].get<std::string>() << "\n";
            return kExitError;
        }

        // Relations are independent reads of one immutable trajectory.
        std::vector<std::future<void>> jobs;
        for (auto& o : outcomes)
            jobs.push_back(std::async(std::launch::async, [&o, &sys, &traj, &cfg] {
                o.report = virial_residual(*sys, traj, o.relation);
                if (o.relation.kind == RelationKind::HomogeneousPartition) {
                    o.partition = homogeneous_partition(*sys, traj, o.relation.mu, o.relation.nu);
                    o.pass = std::abs(o.partition->avg_T - o.partition->pred_T) <= cfg.tolerance &&
                             std::abs(o.partition->avg_V - o.partition->pred_V) <= cfg.tolerance;
                    o.report.converged = o.report.converged && o.partition->converged;
                } else {
                    o.pass = std::abs(o.report.residual) <= cfg.tolerance;
                }
            }));
        for (auto& j : jobs) j.get();

        bool all_ok = true;
        for (const auto& o : outcomes) {
            rep["relations"].push_back(relation_json(o, cfg.tolerance));
            all_ok = all_ok && o.pass && o.report.converged;
        }
        rep["status"] = "ok";
        write_file_atomic(csv_path, csv_for(*sys, traj, outcomes, cfg.stride));
        write_file_atomic(json_path, rep.dump(2) + "\n");

        out << "system " << sys->name << ", " << traj.steps << " steps of " << format_number(traj.dt)
            << ", energy drift " << format_number(traj.max_energy_drift) << "\n";
        for (const auto& o : outcomes) {
            out << "  " << std::left << std::setw(28) << o.relation.name << " " << std::setw(20)
                << to_string(o.relation.kind) << " residual=" << format_number(o.report.residual)
                << (o.report.converged ? " converged" : " not-converged") << " " << (o.pass ? "pass" : "fail")
                << "\n";
        }
        out << "wrote " << csv_path << " and " << json_path << "\n";
        return all_ok ? kExitOk : kExitRelationFailed;
    } catch (const std::exception& e) {
        err << "virial-geo: " << e.what() << "\n";
        return kExitError;
    }
}

int classify(const std::string& system, const std::map<std::string, std::string>& params, const std::string& field,
             int samples, std::uint64_t seed, std::optional<double> tol, bool as_json, std::ostream& out,
             std::ostream& err) {
    try {
        const SystemId id = parse_system_id(system, params);
        const SystemSpec sys = build_system(id);
        const CatalogEntry& e = sys.entry(field);
        const double t = tol ? *tol : default_classify_tol(sys, e);
        const auto pts = sample_points(sys, samples, seed, e.domain);
        const ConformalClassification c = classify_vector_field(e.field, sys.metric, pts, t, entry_guard(sys, e));

        if (as_json) {
            json j;
            j["system"] = sys.name;
            j["field"] = e.name;
            j["label"] = e.label;
            j["kind"] = to_string(c.kind);
            j["expected"] = to_string(e.expected);
            j["lambda"] = number(c.lambda);
            j["max_residual"] = number(c.max_residual);
            j["factor_spread"] = number(c.factor_spread);
            j["samples_used"] = c.samples_used;
            j["samples_skipped"] = c.samples_skipped;
            j["tolerance"] = number(t);
            json rows = json::array();
            for (const auto& s : c.f_samples) rows.push_back({{"q", vec_json(s.q)}, {"f", number(s.f)}});
            j["samples"] = rows;
            out << j.dump(2) << "\n";
        } else {
            out << sys.name << " / " << e.name << " (" << e.label << "): " << to_string(c.kind);
            if (c.kind == ConformalKind::Homothetic) out << "(λ=" << format_number(c.lambda) << ")";
            out << "\n";
            out << "expected " << expected_text(e) << ", max residual " << format_number(c.max_residual)
                << ", factor spread " << format_number(c.factor_spread) << ", samples " << c.samples_used
                << " (skipped " << c.samples_skipped << "), tol " << format_number(t) << "\n";
            for (int k = 1; k <= sys.dim(); ++k) out << std::setw(24) << ("q" + std::to_string(k));
            out << std::setw(24) << "f";
            if (e.conformal_factor && !e.secondary_metric) out << std::setw(24) << "f_expected";
            out << "\n";
            for (const auto& s : c.f_samples) {
                for (int k = 0; k < sys.dim(); ++k) out << std::setw(24) << format_number(s.q[k]);
                out << std::setw(24) << format_number(s.f);
                if (e.conformal_factor && !e.secondary_metric)
                    out << std::setw(24) << format_number(e.conformal_factor->eval(s.q));
                out << "\n";
            }
        }
        return kExitOk;
    } catch (const std::exception& ex) {
        err << "virial-geo: " << ex.what() << "\n";
        return kExitError;
    }
}

int list_systems(bool as_json, std::ostream& out) {
    json arr = json::array();
    std::ostringstream table;
    table << pad("system", 18) << pad("field", 26) << pad("label", 24) << pad("expected", 22) << "relation\n";
    for (const auto& name : system_names()) {
        const SystemId id = parse_system_id(name);
        const SystemSpec sys = build_system(id);
        json fields = json::array();
        for (const auto& e : sys.catalog) {
            const VirialRelation rel = default_relation(e);
            fields.push_back({{"name", e.name},
                              {"label", e.label},
                              {"expected", to_string(e.expected)},
                              {"lambda", e.expected == ConformalKind::Homothetic ? number(e.expected_lambda)
                                                                                  : json(nullptr)},
                              {"relation", to_string(rel.kind)}});
            table << pad(name, 18) << pad(e.name, 26) << pad(e.label, 24) << pad(expected_text(e), 22)
                  << to_string(rel.kind) << "\n";
        }
        arr.push_back({{"system", name},
                       {"family", to_string(id.family)},
                       {"dim", sys.dim()},
                       {"potential", to_string(id.potential)},
                       {"fields", fields}});
    }
    if (as_json)
        out << arr.dump(2) << "\n";
    else
        out << table.str();
    return kExitOk;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"virial-geo: virial identities of mechanical systems on Riemannian charts"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string config_path, system, fixture, output, field;
    std::vector<std::string> relations, params;
    std::optional<double> dt, t_end, tol, mu, nu;
    std::optional<std::uint64_t> seed;
    std::optional<int> stride;
    int samples = 64;
    bool as_json = false;

    auto* run_cmd = app.add_subcommand("run", "integrate a fixture and evaluate virial relations");
    run_cmd->add_option("--config", config_path, "JSON run configuration");
    run_cmd->add_option("--system", system, "system name");
    run_cmd->add_option("--param", params, "system parameter key=value (repeatable)");
    run_cmd->add_option("--fixture", fixture, "initial-state fixture");
    run_cmd->add_option("--relation", relations, "relation reference (repeatable)");
    run_cmd->add_option("--dt", dt, "integrator step");
    run_cmd->add_option("--t-end", t_end, "integration horizon");
    run_cmd->add_option("--tol", tol, "pass tolerance on |residual|");
    run_cmd->add_option("--seed", seed, "seed for randomized samples and fixtures");
    run_cmd->add_option("--output", output, "output directory");
    run_cmd->add_option("--mu", mu, "homogeneity degree of T_g under X");
    run_cmd->add_option("--nu", nu, "homogeneity degree of V under X");
    run_cmd->add_option("--stride", stride, "CSV row every k-th step");
    run_cmd->add_flag("--json", as_json, "print the JSON report to standard output");

    auto* cls_cmd = app.add_subcommand("classify", "classify a catalog vector field");
    cls_cmd->add_option("--system", system, "system name")->required();
    cls_cmd->add_option("--param", params, "system parameter key=value (repeatable)");
    cls_cmd->add_option("--field", field, "catalog field name or label")->required();
    cls_cmd->add_option("--samples", samples, "number of sample points")->check(CLI::PositiveNumber);
    cls_cmd->add_option("--seed", seed, "sampling seed");
    cls_cmd->add_option("--tol", tol, "classification tolerance");
    cls_cmd->add_flag("--json", as_json, "JSON output");

    auto* list_cmd = app.add_subcommand("list-systems", "list bundled systems and catalog fields");
    list_cmd->add_flag("--json", as_json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "virial-geo: " << e.what() << "\n" << app.help();
        return kExitError;
    }

    std::map<std::string, std::string> param_map;
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) {
            err << "virial-geo: --param expects key=value, got '" << p << "'\n";
            return kExitError;
        }
        param_map[p.substr(0, eq)] = p.substr(eq + 1);
    }

    if (list_cmd->parsed()) return list_systems(as_json, out);
    if (cls_cmd->parsed())
        return classify(system, param_map, field, samples, seed.value_or(kDefaultSeed), tol, as_json, out, err);

    try {
        if (!config_path.empty()) rc = load_config(config_path);
    } catch (const std::exception& e) {
        err << "virial-geo: " << e.what() << "\n";
        return kExitError;
    }
    if (!system.empty()) {
        if (system != rc.system) rc.params.clear();
        rc.system = system;
    }
    for (const auto& [k, v] : param_map) rc.params[k] = v;
    if (!fixture.empty()) {
        rc.fixture = fixture;
        rc.initial.reset();
    }
    if (!relations.empty()) rc.relations = relations;
    if (dt) rc.dt = dt;
    if (t_end) rc.t_end = t_end;
    if (tol) rc.tolerance = *tol;
    if (seed) rc.seed = *seed;
    if (!output.empty()) rc.output_dir = output;
    if (mu) rc.mu = mu;
    if (nu) rc.nu = nu;
    if (stride) rc.stride = *stride;

    const int code = run(rc, out, err);
    if (as_json && code != kExitError) {
        std::ifstream is(join_path(rc.output_dir, rc.json_name));
        out << is.rdbuf();
    }
    return code;
}

}  // namespace vgeo::cli
