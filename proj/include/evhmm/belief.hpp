#pragma once

// Dempster-Shafer belief functions on small finite frames.
//
// Subsets of a frame with N labels are encoded as bitmasks (bit i <=> label i),
// so the power set is indexed by 0 .. 2^N - 1. Mass functions follow the
// transferable belief model: mass on the empty set (conflict) is kept as a
// first-class value and only removed by the pignistic transform or by an
// explicit call to normalize_conflict().

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evhmm/errors.hpp"

namespace evhmm {

using SubsetMask = std::uint32_t;

inline constexpr std::size_t kMaxFrameSize = 16;

/// Ordered set of distinct labels (the frame of discernment).
class Frame {
 public:
  explicit Frame(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t power_set_size() const { return std::size_t{1} << labels_.size(); }
  SubsetMask full() const { return static_cast<SubsetMask>(power_set_size() - 1); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::size_t index_of(const std::string& label) const;

  /// Human-readable subset, e.g. "{DET,NOUN}".
  std::string format(SubsetMask subset) const;

  bool operator==(const Frame& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
};

using FramePtr = std::shared_ptr<const Frame>;

FramePtr make_frame(std::vector<std::string> labels);

inline constexpr SubsetMask singleton(std::size_t i) { return SubsetMask{1} << i; }

struct FocalElement {
  SubsetMask subset;
  double mass;
};

/// Basic belief assignment. Only focal elements (strictly positive masses)
/// are stored, sorted by subset mask. Masses sum to 1 within 1e-9.
class MassFunction {
 public:
  MassFunction(FramePtr frame, std::vector<FocalElement> focal);

  static MassFunction vacuous(FramePtr frame);
  static MassFunction categorical(FramePtr frame, SubsetMask subset);
  /// From a dense table over the whole power set.
  static MassFunction from_dense(FramePtr frame, std::span<const double> masses);

  const Frame& frame() const { return *frame_; }
  const FramePtr& frame_ptr() const { return frame_; }

  double mass(SubsetMask subset) const;
  double conflict() const { return mass(0); }
  std::span<const FocalElement> focal_elements() const { return focal_; }
  std::vector<double> dense() const;

  bool is_bayesian() const;

 private:
  FramePtr frame_;
  std::vector<FocalElement> focal_;
};

/// q(A) = sum of m(B) over B containing A, tabulated over the power set.
class Commonality {
 public:
  Commonality(FramePtr frame, std::vector<double> values);

  const Frame& frame() const { return *frame_; }
  const FramePtr& frame_ptr() const { return frame_; }
  double operator[](SubsetMask subset) const { return values_[subset]; }
  std::span<const double> values() const { return values_; }

 private:
  FramePtr frame_;
  std::vector<double> values_;
};

/// BetP, one probability per singleton.
class PignisticDistribution {
 public:
  PignisticDistribution(FramePtr frame, std::vector<double> probs);

  const Frame& frame() const { return *frame_; }
  const FramePtr& frame_ptr() const { return frame_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  std::size_t argmax() const;

 private:
  FramePtr frame_;
  std::vector<double> probs_;
};

// Dense in-place transforms over a power-set table of size 2^n, O(n 2^n).
namespace lattice {
void superset_sum(std::span<double> f);         // m -> q
void superset_difference(std::span<double> f);  // q -> m
void subset_sum(std::span<double> f);           // m -> b (implicability)
void subset_difference(std::span<double> f);    // b -> m
}  // namespace lattice

Commonality mass_to_commonality(const MassFunction& m);
MassFunction commonality_to_mass(const Commonality& q);

/// b(A) = sum of m(B) over B included in A (implicability, includes m(empty)).
std::vector<double> implicability(const MassFunction& m);

/// Unnormalized (TBM) conjunctive rule; conflict stays on the empty set.
MassFunction conjunctive_combine(const MassFunction& m1, const MassFunction& m2);
/// Disjunctive rule of combination.
MassFunction disjunctive_combine(const MassFunction& m1, const MassFunction& m2);

/// Dempster normalization: removes m(empty) and rescales. Throws TotalConflict
/// when everything is conflict.
MassFunction normalize_conflict(const MassFunction& m);

PignisticDistribution pignistic_transform(const MassFunction& m);

/// Least-committed consonant bba with the given pignistic transform.
/// Ties in probability are ordered by label index.
MassFunction inverse_pignistic_consonant(const PignisticDistribution& p);

MassFunction bayesian_bba(const PignisticDistribution& p);

/// Builds m(A) = prod_{s in A} pl(s) * prod_{s not in A} (1 - pl(s)) after
/// rescaling the likelihoods so that their maximum is 1.
MassFunction gbt_bba_from_likelihoods(FramePtr frame, std::span<const double> likelihoods);

}  // namespace evhmm
