#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace hsgd::testing {

inline std::string data_path(const std::string& name) { return std::string(HSGD_TEST_DATA) + "/" + name; }

inline std::string read_data(const std::string& name) {
  std::ifstream in(data_path(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hsgd::testing
