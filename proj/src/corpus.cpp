#include "evhmm/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

namespace evhmm {

std::vector<TaggedSentence> parse_tagged_corpus(std::istream& in) {
  std::vector<TaggedSentence> corpus;
  TaggedSentence current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) corpus.push_back(std::move(current));
      current.clear();
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "missing tab separator");
    std::string surface = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (surface.empty()) throw ParseError(lineno, "empty token");
    if (tag.empty()) throw ParseError(lineno, "empty tag");
    if (tag.find('\t') != std::string::npos) throw ParseError(lineno, "more than two columns");
    current.push_back({std::move(surface), std::move(tag)});
  }
  if (!current.empty()) corpus.push_back(std::move(current));
  return corpus;
}

void write_tagged_corpus(std::ostream& out, const std::vector<TaggedSentence>& corpus) {
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) out << token.surface << '\t' << token.tag << '\n';
    out << '\n';
  }
}

Count CorpusCounts::num_sentences() const {
  Count n = 0;
  for (const auto& [tag, c] : initial_tags) n += c;
  return n;
}

namespace {
template <typename Map, typename Key>
Count lookup(const Map& map, const Key& key) {
  auto it = map.find(key);
  return it == map.end() ? 0 : it->second;
}
}  // namespace

Count CorpusCounts::unigram(TagId k) const { return lookup(tag_unigrams, k); }
Count CorpusCounts::bigram(TagId j, TagId k) const {
  return lookup(tag_bigrams, std::array<TagId, 2>{j, k});
}
Count CorpusCounts::trigram(TagId i, TagId j, TagId k) const {
  return lookup(tag_trigrams, std::array<TagId, 3>{i, j, k});
}

CorpusCounts accumulate_counts(const std::vector<TaggedSentence>& corpus, Count unk_threshold) {
  CorpusCounts counts;
  std::set<std::string> tagset;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      tagset.insert(token.tag);
      ++counts.vocab[token.surface];
    }
  }
  if (tagset.empty()) throw EmptyCorpus();
  counts.tags.assign(tagset.begin(), tagset.end());

  auto tag_id = [&](const std::string& tag) {
    return static_cast<TagId>(std::lower_bound(counts.tags.begin(), counts.tags.end(), tag) -
                              counts.tags.begin());
  };

  for (const auto& sentence : corpus) {
    if (sentence.empty()) continue;
    std::vector<TagId> ids;
    ids.reserve(sentence.size());
    for (const auto& token : sentence) ids.push_back(tag_id(token.tag));

    ++counts.initial_tags[ids.front()];
    for (std::size_t t = 0; t < sentence.size(); ++t) {
      const std::string& surface = sentence[t].surface;
      const std::string& token =
          counts.vocab.at(surface) <= unk_threshold ? kUnknownToken : surface;
      ++counts.tag_unigrams[ids[t]];
      ++counts.emissions[{ids[t], token}];
      ++counts.total_tokens;
      if (t >= 1) {
        ++counts.tag_bigrams[{ids[t - 1], ids[t]}];
        ++counts.emissions2[{ids[t - 1], ids[t], token}];
      }
      if (t >= 2) ++counts.tag_trigrams[{ids[t - 2], ids[t - 1], ids[t]}];
    }
  }
  return counts;
}

}  // namespace evhmm
