#include "evhmm/tagger.hpp"

#include <stdexcept>

namespace evhmm {

std::string_view to_string(Paradigm paradigm) { return paradigm == Paradigm::prob ? "prob" : "belief"; }

Paradigm parse_paradigm(std::string_view text) {
  if (text == "prob") return Paradigm::prob;
  if (text == "belief") return Paradigm::belief;
  throw std::invalid_argument("unknown paradigm: " + std::string(text));
}

std::string decoder_name(const TaggerConfig& config) {
  return std::string(to_string(config.paradigm)) + "-" + std::to_string(config.order);
}

Tagger::Tagger(const Model& model, const TaggerConfig& config) : config_(config) {
  if (config.order != 1 && config.order != 2) throw std::invalid_argument("order must be 1 or 2");
  hmm1_ = std::make_shared<const Hmm1>(estimate_hmm1(model.counts, config.add_k));
  if (config.order == 2) {
    Hmm2Options options;
    options.lambda_mode = config.lambda_mode;
    options.add_k = config.add_k;
    hmm2_ = std::make_shared<const Hmm2>(estimate_hmm2(model.counts, options));
  }
  if (config.paradigm == Paradigm::belief) {
    if (config.order == 1) {
      belief1_ = std::make_shared<const BeliefHmm1>(from_prob_hmm(*hmm1_, config.bba_mode));
    } else {
      belief2_ = std::make_shared<const BeliefHmm2>(from_prob_hmm(*hmm2_, config.bba_mode, config.pair_rule));
    }
  }
}

std::vector<TagId> Tagger::decode(std::span<const TokenId> obs) const {
  if (config_.paradigm == Paradigm::prob) {
    return config_.order == 1 ? viterbi1(*hmm1_, obs).path : viterbi2(*hmm2_, obs).path;
  }
  return config_.order == 1 ? credal_viterbi1(*belief1_, obs).path : credal_viterbi2(*belief2_, obs).path;
}

std::vector<std::string> Tagger::tag(std::span<const std::string> words) const {
  std::vector<TokenId> obs = vocab().encode(words);
  std::vector<std::string> out;
  for (TagId t : decode(obs)) out.push_back(tags().at(t));
  return out;
}

void AccuracyCounts::add(bool correct_tag, bool known) {
  ++total;
  correct += correct_tag;
  if (known) {
    ++known_total;
    known_correct += correct_tag;
  } else {
    ++unknown_total;
    unknown_correct += correct_tag;
  }
}

std::string format_accuracy(Count correct, Count total) {
  if (total == 0) return "NA";
  // Exact integer rounding of correct * 10^4 / total.
  Count scaled = correct * 10000;
  Count q = scaled / total;
  Count r = scaled % total;
  Count twice = r * 2;
  if (twice > total || (twice == total && q % 2 == 1)) ++q;
  std::string frac = std::to_string(q % 10000);
  return std::to_string(q / 10000) + "." + std::string(4 - frac.size(), '0') + frac;
}

}  // namespace evhmm
