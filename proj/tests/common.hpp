#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "vbx/jet.hpp"

namespace testutil {

inline std::string example_path(const std::string& name) { return std::string(VBX_SOURCE_DIR) + "/examples/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline vbx::SystemSpec example(const std::string& name) { return vbx::load_system(slurp(example_path(name + ".json"))); }

inline vbx::Expr P(const std::string& s, int n = 3) { return vbx::Expr::parse(s, n); }

}  // namespace testutil
