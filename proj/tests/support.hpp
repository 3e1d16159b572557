// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDSV_TESTS_SUPPORT_HPP
#define FDSV_TESTS_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fds/parser.hpp"

namespace fdsv_tests {

inline fds::Program parse(const std::string& text,
                          const std::string& name = "<test>") {
  fds::Program p = fds::parse_program(text, name);
  fds::validate(p);
  return p;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e :
       std::filesystem::directory_iterator(FDSV_CORPUS_DIR))
    if (e.path().extension() == ".fds") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fdsv_tests

#endif
