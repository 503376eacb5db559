#include "virial_geo/cli.hpp"

#include "virial_geo/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace vgeo::cli {

// 17 significant digits, '.' separator regardless of locale-free printf.
std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw InvalidParameter("cannot write '" + tmp.string() + "'");
        os << contents;
        os.flush();
        if (!os) throw InvalidParameter("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace vgeo::cli
