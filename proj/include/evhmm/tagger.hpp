#pragma once

// Decoder selection over one trained model: (order, paradigm) picks one of
// viterbi1, viterbi2, credal_viterbi1 and credal_viterbi2.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evhmm/hmm_belief.hpp"
#include "evhmm/hmm_prob.hpp"
#include "evhmm/model_file.hpp"

namespace evhmm {

enum class Paradigm { prob, belief };

std::string_view to_string(Paradigm paradigm);
Paradigm parse_paradigm(std::string_view text);

struct TaggerConfig {
  int order = 1;
  Paradigm paradigm = Paradigm::prob;
  BbaMode bba_mode = BbaMode::consonant;
  LambdaMode lambda_mode = LambdaMode::brants;
  double add_k = 0.001;
  PairRule pair_rule = PairRule::conjunctive;
};

/// Name used in comparison tables, e.g. "prob-1" or "belief-2".
std::string decoder_name(const TaggerConfig& config);

class Tagger {
 public:
  Tagger(const Model& model, const TaggerConfig& config);

  const TaggerConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return hmm1_->vocab(); }
  const std::vector<std::string>& tags() const { return hmm1_->tags(); }

  /// Numeric failures (TotalConflict, AllZeroLikelihoods, ...) propagate.
  std::vector<TagId> decode(std::span<const TokenId> obs) const;
  std::vector<std::string> tag(std::span<const std::string> words) const;

 private:
  TaggerConfig config_;
  std::shared_ptr<const Hmm1> hmm1_;
  std::shared_ptr<const Hmm2> hmm2_;
  std::shared_ptr<const BeliefHmm1> belief1_;
  std::shared_ptr<const BeliefHmm2> belief2_;
};

/// Token-level accuracy with the known/unknown split by a vocabulary of raw
/// training surface forms.
struct AccuracyCounts {
  Count correct = 0;
  Count total = 0;
  Count known_correct = 0;
  Count known_total = 0;
  Count unknown_correct = 0;
  Count unknown_total = 0;

  void add(bool correct_tag, bool known);
};

/// correct / total with four decimals, rounded half to even on the exact
/// ratio; "NA" when total is zero.
std::string format_accuracy(Count correct, Count total);

}  // namespace evhmm
