#pragma once

// Sectioned plain-text model files. Counts, not probabilities, are stored so
// that every decoder variant can be derived from the same trained artifact.
//
//   EVHMM 1
//   [tags]       one label per line, in frame order
//   [vocab]      surface count
//   [initial]    tag count
//   [unigram]    tag count
//   [bigram]     tag tag count
//   [trigram]    tag tag tag count
//   [emission]   tag token count
//   [emission2]  prev_tag tag token count
//   [config]     key value
//
// Labels and tokens are percent-escaped for '%', '[', space, tab, CR and LF.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "evhmm/corpus.hpp"
#include "evhmm/hmm_prob.hpp"

namespace evhmm {

struct ModelConfig {
  Count unk_threshold = 1;
  double add_k = 0.001;
  LambdaMode lambda_mode = LambdaMode::brants;
  bool operator==(const ModelConfig&) const = default;
};

struct Model {
  CorpusCounts counts;
  ModelConfig config;
  bool operator==(const Model&) const = default;
};

std::string escape_label(std::string_view text);
std::string unescape_label(std::string_view text);

void write_model(std::ostream& out, const Model& model);
/// Throws VersionError on an unknown header and FormatError on malformed or
/// truncated content.
Model read_model(std::istream& in);

/// Throw IoError when the file cannot be opened or written.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace evhmm
