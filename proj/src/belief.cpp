#include "evhmm/belief.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace evhmm {

namespace {

constexpr double kSumTolerance = 1e-9;
// Values whose magnitude is below this are treated as transform round-off.
constexpr double kRoundOff = 1e-15;
constexpr double kNotAMassThreshold = -1e-6;

void check_same_frame(const FramePtr& a, const FramePtr& b) {
  if (a != b && !(*a == *b)) throw FrameMismatch();
}

// Shared tail of the q -> m and b -> m paths: clamps round-off and builds the
// focal list. `expected_total` is the mass total implied by the input table.
MassFunction masses_from_dense(FramePtr frame, std::vector<double> m, double expected_total) {
  double total = 0.0;
  for (double& v : m) {
    if (v < kNotAMassThreshold) {
      throw NotAMass("set function does not invert to a mass function (value " +
                     std::to_string(v) + ")");
    }
    if (v < kRoundOff) v = 0.0;
    total += v;
  }
  if (std::abs(total - expected_total) > kSumTolerance && total > 0.0) {
    for (double& v : m) v *= expected_total / total;
  }
  std::vector<FocalElement> focal;
  for (std::size_t a = 0; a < m.size(); ++a) {
    if (m[a] > 0.0) focal.push_back({static_cast<SubsetMask>(a), m[a]});
  }
  return MassFunction(std::move(frame), std::move(focal));
}

}  // namespace

// ---------------------------------------------------------------------------
// Frame

Frame::Frame(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("frame must contain at least one label");
  if (labels_.size() > kMaxFrameSize) {
    throw std::invalid_argument("frame has " + std::to_string(labels_.size()) +
                                " labels; at most " + std::to_string(kMaxFrameSize) +
                                " are supported");
  }
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw std::invalid_argument("frame labels must be unique");
}

std::size_t Frame::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::out_of_range("label not in frame: " + label);
  return static_cast<std::size_t>(it - labels_.begin());
}

std::string Frame::format(SubsetMask subset) const {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (std::size_t i = 0; i < size(); ++i) {
    if (subset & singleton(i)) {
      if (!first) out << ',';
      out << labels_[i];
      first = false;
    }
  }
  out << '}';
  return out.str();
}

FramePtr make_frame(std::vector<std::string> labels) {
  return std::make_shared<const Frame>(std::move(labels));
}

// ---------------------------------------------------------------------------
// MassFunction

MassFunction::MassFunction(FramePtr frame, std::vector<FocalElement> focal)
    : frame_(std::move(frame)) {
  if (!frame_) throw std::invalid_argument("mass function needs a frame");
  std::sort(focal.begin(), focal.end(),
            [](const FocalElement& a, const FocalElement& b) { return a.subset < b.subset; });
  double total = 0.0;
  for (const auto& fe : focal) {
    if (fe.subset > frame_->full()) throw NotAMass("subset outside the frame");
    if (!(fe.mass >= 0.0) || !std::isfinite(fe.mass)) throw NotAMass("negative or non-finite mass");
    total += fe.mass;
    if (fe.mass == 0.0) continue;
    if (!focal_.empty() && focal_.back().subset == fe.subset) {
      focal_.back().mass += fe.mass;
    } else {
      focal_.push_back(fe);
    }
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw NotAMass("masses sum to " + std::to_string(total) + ", not 1");
  }
}

MassFunction MassFunction::vacuous(FramePtr frame) {
  SubsetMask full = frame->full();
  return MassFunction(std::move(frame), {{full, 1.0}});
}

MassFunction MassFunction::categorical(FramePtr frame, SubsetMask subset) {
  return MassFunction(std::move(frame), {{subset, 1.0}});
}

MassFunction MassFunction::from_dense(FramePtr frame, std::span<const double> masses) {
  if (masses.size() != frame->power_set_size()) {
    throw std::invalid_argument("dense mass table has the wrong size");
  }
  std::vector<FocalElement> focal;
  for (std::size_t a = 0; a < masses.size(); ++a) {
    if (masses[a] != 0.0) focal.push_back({static_cast<SubsetMask>(a), masses[a]});
  }
  return MassFunction(std::move(frame), std::move(focal));
}

double MassFunction::mass(SubsetMask subset) const {
  auto it = std::lower_bound(focal_.begin(), focal_.end(), subset,
                             [](const FocalElement& fe, SubsetMask s) { return fe.subset < s; });
  return (it != focal_.end() && it->subset == subset) ? it->mass : 0.0;
}

std::vector<double> MassFunction::dense() const {
  std::vector<double> out(frame_->power_set_size(), 0.0);
  for (const auto& fe : focal_) out[fe.subset] = fe.mass;
  return out;
}

bool MassFunction::is_bayesian() const {
  return std::all_of(focal_.begin(), focal_.end(),
                     [](const FocalElement& fe) { return std::popcount(fe.subset) == 1; });
}

// ---------------------------------------------------------------------------
// Commonality, PignisticDistribution

Commonality::Commonality(FramePtr frame, std::vector<double> values)
    : frame_(std::move(frame)), values_(std::move(values)) {
  if (values_.size() != frame_->power_set_size()) {
    throw std::invalid_argument("commonality table has the wrong size");
  }
}

PignisticDistribution::PignisticDistribution(FramePtr frame, std::vector<double> probs)
    : frame_(std::move(frame)), probs_(std::move(probs)) {
  if (probs_.size() != frame_->size()) {
    throw std::invalid_argument("distribution size does not match the frame");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(total));
  }
}

std::size_t PignisticDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) -
                                  probs_.begin());
}

// ---------------------------------------------------------------------------
// Lattice transforms

namespace lattice {

void superset_sum(std::span<double> f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (!(a & bit)) f[a] += f[a | bit];
    }
  }
}

void superset_difference(std::span<double> f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (!(a & bit)) f[a] -= f[a | bit];
    }
  }
}

void subset_sum(std::span<double> f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (a & bit) f[a] += f[a ^ bit];
    }
  }
}

void subset_difference(std::span<double> f) {
  for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (a & bit) f[a] -= f[a ^ bit];
    }
  }
}

}  // namespace lattice

// ---------------------------------------------------------------------------
// Representations

Commonality mass_to_commonality(const MassFunction& m) {
  auto q = m.dense();
  lattice::superset_sum(q);
  return Commonality(m.frame_ptr(), std::move(q));
}

MassFunction commonality_to_mass(const Commonality& q) {
  if (std::abs(q[0] - 1.0) > kSumTolerance) {
    throw NotAMass("commonality of the empty set is " + std::to_string(q[0]) + ", not 1");
  }
  std::vector<double> m(q.values().begin(), q.values().end());
  lattice::superset_difference(m);
  return masses_from_dense(q.frame_ptr(), std::move(m), q[0]);
}

std::vector<double> implicability(const MassFunction& m) {
  auto b = m.dense();
  lattice::subset_sum(b);
  return b;
}

// ---------------------------------------------------------------------------
// Combination

MassFunction conjunctive_combine(const MassFunction& m1, const MassFunction& m2) {
  check_same_frame(m1.frame_ptr(), m2.frame_ptr());
  auto q = m1.dense();
  auto q2 = m2.dense();
  lattice::superset_sum(q);
  lattice::superset_sum(q2);
  for (std::size_t a = 0; a < q.size(); ++a) q[a] *= q2[a];
  lattice::superset_difference(q);
  return masses_from_dense(m1.frame_ptr(), std::move(q), 1.0);
}

MassFunction disjunctive_combine(const MassFunction& m1, const MassFunction& m2) {
  check_same_frame(m1.frame_ptr(), m2.frame_ptr());
  auto b = implicability(m1);
  auto b2 = implicability(m2);
  for (std::size_t a = 0; a < b.size(); ++a) b[a] *= b2[a];
  lattice::subset_difference(b);
  return masses_from_dense(m1.frame_ptr(), std::move(b), 1.0);
}

MassFunction normalize_conflict(const MassFunction& m) {
  double kept = 1.0 - m.conflict();
  if (kept <= 1e-12) throw TotalConflict("cannot normalize a totally conflicting mass function");
  std::vector<FocalElement> focal;
  for (const auto& fe : m.focal_elements()) {
    if (fe.subset != 0) focal.push_back({fe.subset, fe.mass / kept});
  }
  return MassFunction(m.frame_ptr(), std::move(focal));
}

// ---------------------------------------------------------------------------
// Decisions and bba construction

PignisticDistribution pignistic_transform(const MassFunction& m) {
  double conflict = m.conflict();
  if (conflict >= 1.0 - 1e-12) throw TotalConflict("pignistic transform of total conflict");
  std::vector<double> betp(m.frame().size(), 0.0);
  for (const auto& fe : m.focal_elements()) {
    if (fe.subset == 0) continue;
    double share = fe.mass / std::popcount(fe.subset);
    for (SubsetMask rest = fe.subset; rest; rest &= rest - 1) {
      betp[static_cast<std::size_t>(std::countr_zero(rest))] += share;
    }
  }
  for (double& p : betp) p /= 1.0 - conflict;
  return PignisticDistribution(m.frame_ptr(), std::move(betp));
}

MassFunction inverse_pignistic_consonant(const PignisticDistribution& p) {
  const std::size_t n = p.frame().size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

  std::vector<FocalElement> focal;
  SubsetMask nested = 0;
  for (std::size_t k = 0; k < n; ++k) {
    nested |= singleton(order[k]);
    double next = (k + 1 < n) ? p[order[k + 1]] : 0.0;
    double mass = static_cast<double>(k + 1) * (p[order[k]] - next);
    if (mass > 0.0) focal.push_back({nested, mass});
  }
  return MassFunction(p.frame_ptr(), std::move(focal));
}

MassFunction bayesian_bba(const PignisticDistribution& p) {
  std::vector<FocalElement> focal;
  for (std::size_t i = 0; i < p.frame().size(); ++i) {
    if (p[i] > 0.0) focal.push_back({singleton(i), p[i]});
  }
  return MassFunction(p.frame_ptr(), std::move(focal));
}

MassFunction gbt_bba_from_likelihoods(FramePtr frame, std::span<const double> likelihoods) {
  const std::size_t n = frame->size();
  if (likelihoods.size() != n) throw std::invalid_argument("likelihood table size mismatch");
  double top = 0.0;
  for (double l : likelihoods) {
    if (!(l >= 0.0)) throw std::invalid_argument("likelihoods must be non-negative");
    top = std::max(top, l);
  }
  if (top <= 0.0) throw AllZeroLikelihoods();

  std::vector<double> pl(n);
  for (std::size_t i = 0; i < n; ++i) pl[i] = likelihoods[i] / top;

  std::vector<double> m(frame->power_set_size());
  for (std::size_t a = 0; a < m.size(); ++a) {
    double v = 1.0;
    for (std::size_t i = 0; i < n; ++i) v *= (a & singleton(i)) ? pl[i] : 1.0 - pl[i];
    m[a] = v;
  }
  return masses_from_dense(frame, std::move(m), 1.0);
}

}  // namespace evhmm
