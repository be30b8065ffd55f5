#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dynamo/fourier_field.hpp"

namespace dynamo::testing {

// Largest coefficient difference between two fields of equal truncation.
inline double max_coef_diff(const SpectralVectorField& a, const SpectralVectorField& b) {
    double m = 0.0;
    const auto ra = a.raw();
    const auto rb = b.raw();
    for (std::size_t i = 0; i < ra.size(); ++i) m = std::max(m, std::abs(ra[i] - rb[i]));
    return m;
}

inline bool bitwise_equal(const SpectralVectorField& a, const SpectralVectorField& b) {
    const auto ra = a.raw();
    const auto rb = b.raw();
    if (ra.size() != rb.size()) return false;
    for (std::size_t i = 0; i < ra.size(); ++i)
        if (ra[i] != rb[i]) return false;
    return true;
}

inline double rel_diff(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// Fresh per-test scratch directory under the system temp root.
inline std::string scratch_dir(const std::string& name) {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / ("dynamo_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dynamo::testing
