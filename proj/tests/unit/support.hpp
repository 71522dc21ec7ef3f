#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "absaudit/format.hpp"

namespace test_support {

inline std::filesystem::path fixtures_dir() { return ABSAUDIT_FIXTURES_DIR; }
inline std::filesystem::path data_dir() { return ABSAUDIT_DATA_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<absaudit::Scm> load_model(const std::filesystem::path& p) {
  return std::make_shared<absaudit::Scm>(absaudit::parse_model(slurp(p)));
}

inline absaudit::Abstraction load_abstraction(const std::filesystem::path& p) {
  const std::string text = slurp(p);
  const auto refs = absaudit::read_abstraction_refs(text);
  const auto dir = p.parent_path();
  return absaudit::parse_abstraction(text, load_model(dir / refs.source), load_model(dir / refs.target));
}

inline std::vector<std::filesystem::path> files_with_extension(const std::filesystem::path& dir,
                                                               const std::string& ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace test_support
