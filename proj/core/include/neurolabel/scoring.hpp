#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nlab {

/// Scalar activations of one neuron over a set of images. Non-empty and
/// finite by construction.
class ActivationSet {
 public:
  /// Throws Error{empty_activation} or Error{non_finite_activation}.
  explicit ActivationSet(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Population moments of a control set.
struct ControlStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Mean activation; the loop objective. Streaming (Welford) update, so a
/// constant set returns that constant exactly.
double score_avg(const ActivationSet& activations);

/// Exact numerator/denominator of the AUC: number of (control, concept)
/// pairs with control < concept, and the total pair count.
struct PairCount {
  std::uint64_t less = 0;
  std::uint64_t total = 0;
};

/// O((n+m) log(n+m)) strict-inequality pair count via sorting.
PairCount auc_pair_count(std::span<const double> control, std::span<const double> concept_label);

/// Fraction of pairs where the concept activation strictly exceeds the
/// control activation. Ties count zero.
double score_auc(const ActivationSet& control, const ActivationSet& concept_label);

/// Population mean and standard deviation (Welford).
ControlStats control_stats(const ActivationSet& control);

/// (mean(concept) - control.mean) / control.std. Throws
/// Error{degenerate_control} when control.std is zero.
double score_mad(const ControlStats& control, const ActivationSet& concept_label);

}  // namespace nlab
