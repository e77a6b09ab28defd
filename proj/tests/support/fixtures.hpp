#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace vpvn::test {

inline std::string source_path(const std::string& relative) {
  return std::string(VPVN_SOURCE_DIR) + "/" + relative;
}

inline std::string read_text(const std::string& relative) {
  std::ifstream in(source_path(relative), std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace vpvn::test
