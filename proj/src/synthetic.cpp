#include "evhmm/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string>

namespace evhmm {

namespace {

constexpr std::array<const char*, 3> kTags = {"A", "B", "C"};
// Two private words per tag, then the shared words: tag t shares with t + 1.
constexpr std::array<std::array<const char*, 2>, 3> kPrivate = {{{"ant", "ape"}, {"bee", "bat"}, {"cod", "cow"}}};
constexpr std::array<std::array<const char*, 2>, 3> kShared = {{{"ab1", "ab2"}, {"bc1", "bc2"}, {"ca1", "ca2"}}};

// Uniform in [0, 1) from the raw engine output, independent of the standard
// library's distribution implementations.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::min(static_cast<std::size_t>(uniform(rng) * static_cast<double>(n)), n - 1);
}

std::string emit(std::mt19937_64& rng, std::size_t tag, double ambiguity) {
  if (uniform(rng) < ambiguity) {
    // Shared words of this tag: its own pair (with tag + 1) or the pair of tag - 1.
    std::size_t owner = pick(rng, 2) == 0 ? tag : (tag + 2) % 3;
    return kShared[owner][pick(rng, 2)];
  }
  return kPrivate[tag][pick(rng, 2)];
}

}  // namespace

std::vector<TaggedSentence> generate_second_order_corpus(std::uint64_t seed, const SyntheticOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<TaggedSentence> corpus;
  corpus.reserve(options.sentences);
  const std::size_t span = options.max_length - options.min_length + 1;
  for (std::size_t s = 0; s < options.sentences; ++s) {
    std::size_t length = options.min_length + pick(rng, span);
    TaggedSentence sentence;
    std::size_t prev2 = pick(rng, 3);
    std::size_t prev1 = pick(rng, 3);
    for (std::size_t t = 0; t < length; ++t) {
      std::size_t tag;
      if (t == 0) {
        tag = prev2;
      } else if (t == 1) {
        tag = prev1;
      } else {
        tag = uniform(rng) < options.fidelity ? (prev2 + prev1) % 3 : pick(rng, 3);
        prev2 = prev1;
        prev1 = tag;
      }
      sentence.push_back({emit(rng, tag, options.ambiguity), kTags[tag]});
    }
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace evhmm
