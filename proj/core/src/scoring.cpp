#include "neurolabel/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "neurolabel/error.hpp"

namespace nlab {

ActivationSet::ActivationSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(Errc::empty_activation, "activation set is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(Errc::non_finite_activation,
                  fmt::format("activation {} is not finite ({})", i, values_[i]));
    }
  }
}

double score_avg(const ActivationSet& activations) {
  double mean = 0.0;
  std::size_t n = 0;
  for (double x : activations.values()) {
    ++n;
    mean += (x - mean) / static_cast<double>(n);
  }
  return mean;
}

PairCount auc_pair_count(std::span<const double> control, std::span<const double> concept_label) {
  std::vector<double> a(control.begin(), control.end());
  std::vector<double> b(concept_label.begin(), concept_label.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // For each concept value, count control values strictly below it.
  PairCount out;
  out.total = static_cast<std::uint64_t>(a.size()) * b.size();
  std::size_t below = 0;
  for (double v : b) {
    while (below < a.size() && a[below] < v) ++below;
    out.less += below;
  }
  return out;
}

double score_auc(const ActivationSet& control, const ActivationSet& concept_label) {
  const auto count = auc_pair_count(control.values(), concept_label.values());
  return static_cast<double>(count.less) / static_cast<double>(count.total);
}

ControlStats control_stats(const ActivationSet& control) {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : control.values()) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  return ControlStats{mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(n))), n};
}

double score_mad(const ControlStats& control, const ActivationSet& concept_label) {
  if (!(control.std > 0.0)) {
    throw Error(Errc::degenerate_control,
                fmt::format("control standard deviation is {}; cannot normalize", control.std));
  }
  return (score_avg(concept_label) - control.mean) / control.std;
}

}  // namespace nlab
