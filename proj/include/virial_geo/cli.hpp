#pragma once

// Batch experiment runner behind the `virial-geo` executable.

#include "virial_geo/systems.hpp"
#include "virial_geo/virial.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vgeo::cli {

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kMaxStepsEnv = "VIRIAL_GEO_MAX_STEPS";

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitRelationFailed = 2 };

struct RunConfig {
    std::string system = "kepler";
    std::map<std::string, std::string> params;
    std::string fixture;              // empty selects the system's default fixture
    std::optional<State> initial;     // overrides the fixture state
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<double> energy_drift_limit;
    std::vector<std::string> relations;  // empty: every catalog relation
    std::optional<double> mu;
    std::optional<double> nu;
    std::string output_dir = ".";
    std::string csv_name = "timeseries.csv";
    std::string json_name = "report.json";
    std::uint64_t seed = kDefaultSeed;
    int stride = 10;
    double tolerance = 1e-6;
    int classify_samples = 64;
};

// Reads a JSON run configuration. Throws InvalidParameter with a message
// naming the offending key.
RunConfig load_config(const std::string& path);

// Resolves a relation reference against a system: a catalog field name gives
// its default relation, "general:<field>" the general relation of that field
// and "homogeneous" the homogeneous partition with (mu, nu).
VirialRelation resolve_relation(const SystemSpec& sys, const std::string& ref, std::optional<double> mu,
                                std::optional<double> nu);

// Step cap from VIRIAL_GEO_MAX_STEPS, or the default.
long long max_steps_from_env(long long fallback);

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int classify(const std::string& system, const std::map<std::string, std::string>& params, const std::string& field,
             int samples, std::uint64_t seed, std::optional<double> tol, bool json, std::ostream& out,
             std::ostream& err);
int list_systems(bool json, std::ostream& out);

// Full command-line entry point.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Report writers, exposed for tests.
std::string format_number(double x);
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace vgeo::cli
