#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evhmm/corpus.hpp"

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(EVHMM_FIXTURES) / name;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<evhmm::TaggedSentence> load_corpus(const std::string& name) {
  std::ifstream in(fixture(name), std::ios::binary);
  return evhmm::parse_tagged_corpus(in);
}

inline std::vector<evhmm::TaggedSentence> parse_text(const std::string& text) {
  std::istringstream in(text);
  return evhmm::parse_tagged_corpus(in);
}
