#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <doctest.h>

#include "rkhs/error.hpp"
#include "rkhs/trajectory.hpp"

namespace test {

inline rkhs::Vector vec(std::initializer_list<double> v) {
    rkhs::Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) { out(i++) = x; }
    return out;
}

inline rkhs::Matrix mat2(double a, double b, double c, double d) {
    rkhs::Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

/// Runs f and returns the ErrorCode it threw; fails the test if it did not throw.
template <class F>
rkhs::ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const rkhs::Error& e) {
        return e.code();
    }
    FAIL("expected an rkhs::Error");
    return rkhs::ErrorCode::IoError;
}

/// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rkhs_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace test
