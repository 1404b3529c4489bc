#pragma once

// Seeded generator for tagged corpora drawn from a genuine second-order tag
// chain: the next tag depends on both previous tags, and given only the
// previous tag it is uniform. Half of the word types are shared between two
// tags, so emissions alone cannot resolve them.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "evhmm/corpus.hpp"

namespace evhmm {

struct SyntheticOptions {
  std::size_t sentences = 250;
  std::size_t min_length = 5;
  std::size_t max_length = 10;
  /// Probability that the chain follows its second-order rule.
  double fidelity = 0.85;
  /// Probability that a tag emits one of its shared (ambiguous) words.
  double ambiguity = 0.6;
};

/// Tags A, B, C; 12 word types. Identical seeds give identical corpora.
std::vector<TaggedSentence> generate_second_order_corpus(std::uint64_t seed,
                                                         const SyntheticOptions& options = {});

}  // namespace evhmm
