#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "evhmm/errors.hpp"

namespace evhmm {

inline const std::string kUnknownToken = "<UNK>";

struct TaggedToken {
  std::string surface;
  std::string tag;
  bool operator==(const TaggedToken&) const = default;
};

using TaggedSentence = std::vector<TaggedToken>;

/// Two-column corpus: `token<TAB>tag` per line, blank line between sentences.
/// A trailing '\r' is stripped. Throws ParseError naming the 1-based line.
std::vector<TaggedSentence> parse_tagged_corpus(std::istream& in);
void write_tagged_corpus(std::ostream& out, const std::vector<TaggedSentence>& corpus);

using TagId = std::uint32_t;
using Count = std::uint64_t;

/// Integer statistics of a tagged corpus. Tags are indexed into `tags`
/// (sorted); emission tables are keyed by the token after the UNK policy.
struct CorpusCounts {
  std::vector<std::string> tags;
  std::map<TagId, Count> tag_unigrams;
  std::map<std::array<TagId, 2>, Count> tag_bigrams;
  std::map<std::array<TagId, 3>, Count> tag_trigrams;
  std::map<std::pair<TagId, std::string>, Count> emissions;
  /// (previous tag, tag, token)
  std::map<std::tuple<TagId, TagId, std::string>, Count> emissions2;
  std::map<TagId, Count> initial_tags;
  /// Raw surface frequencies before the UNK policy.
  std::map<std::string, Count> vocab;
  Count total_tokens = 0;

  std::size_t num_tags() const { return tags.size(); }
  Count num_sentences() const;
  Count unigram(TagId k) const;
  Count bigram(TagId j, TagId k) const;
  Count trigram(TagId i, TagId j, TagId k) const;

  bool operator==(const CorpusCounts&) const = default;
};

/// Tokens whose corpus frequency is <= unk_threshold are counted as <UNK> in
/// the emission tables. Throws EmptyCorpus.
CorpusCounts accumulate_counts(const std::vector<TaggedSentence>& corpus, Count unk_threshold);

}  // namespace evhmm
