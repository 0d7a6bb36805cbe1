#pragma once

#include <string>

namespace cflow::testing {

inline std::string spec_path(const std::string& name) { return std::string(CFLOW_SPEC_DIR) + "/" + name; }
inline std::string fixture_path(const std::string& name) { return std::string(CFLOW_FIXTURE_DIR) + "/" + name; }

} // namespace cflow::testing
