#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurolabel/activation.hpp"
#include "neurolabel/image_cache.hpp"
#include "neurolabel/label.hpp"
#include "neurolabel/neuron.hpp"
#include "neurolabel/scoring.hpp"
#include "neurolabel/synthesis.hpp"

namespace nlab {

struct EvalConfig {
  std::size_t batch_size = 5;
  /// Salt for the evaluation images. Differs from the loop salt by default,
  /// so labels are scored on images other than those that selected them.
  std::uint64_t run_salt = 0x6576616cULL;
  /// Salt used by the labelling run, if known; equality with run_salt marks
  /// the report as reusing the selection images.
  std::optional<std::uint64_t> loop_salt;
  std::size_t control_size = 500;
  std::uint64_t control_seed = 0;
  RetryPolicy retry{3, 0};
};

struct CosyScore {
  double auc = 0.0;
  double mad = 0.0;
};

/// Synthesises the label's images with the loop's seeding scheme, extracts
/// the neuron's activations and scores them against `control`. Throws
/// Error{degenerate_control} if the control set has zero spread.
CosyScore cosy_eval(const ConceptLabel& label, const NeuronAddress& neuron, const ActivationSet& control,
                    T2iProvider& t2i, VisionProvider& vision, ImageCache* cache, const EvalConfig& cfg);

/// Seeded sample of `size` dataset images: each draw picks a class
/// uniformly; class k contributes its first c_k images in canonical order
/// (cycling if the class is smaller). Returns one control set per index.
std::vector<ActivationSet> build_control_sets(VisionProvider& vision, const LabeledImageSource& dataset,
                                              const std::string& layer, std::span<const std::size_t> indices,
                                              std::size_t size, std::uint64_t seed,
                                              const RetryPolicy& retry = {});

struct EvalRow {
  std::string method;
  NeuronAddress neuron;
  ConceptLabel label;
  double auc = 0.0;
  double mad = 0.0;
};

struct MetricAggregate {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct MethodAggregate {
  std::size_t count = 0;
  MetricAggregate auc;
  MetricAggregate mad;
};

struct MissingPair {
  std::string method;
  NeuronAddress neuron;
  std::string reason;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::map<std::string, MethodAggregate> aggregates;
  std::vector<MissingPair> missing;
  bool reuses_selection_images = false;
};

using MethodAssignments = std::map<std::string, std::map<NeuronAddress, ConceptLabel>>;
using ControlLookup = std::function<const ActivationSet&(const NeuronAddress&)>;

/// Evaluates every (method, neuron) pair on the neurons all methods cover.
/// Pairs outside the intersection, and pairs whose evaluation fails, are
/// listed in `missing`. Rows are ordered by method, then neuron.
EvalReport eval_methods(const MethodAssignments& assignments, const ControlLookup& controls, T2iProvider& t2i,
                        VisionProvider& vision, ImageCache* cache, const EvalConfig& cfg);

/// Aggregates are computed over rows in (method, neuron) order, so they do
/// not depend on input order.
std::map<std::string, MethodAggregate> aggregate_rows(std::span<const EvalRow> rows);

/// Header: method,neuron_layer,neuron_index,label,auc,mad
std::string report_csv(const EvalReport& report);
std::string report_sidecar_json(const EvalReport& report);

/// Reads a labels CSV with header neuron_layer,neuron_index,label.
std::map<NeuronAddress, ConceptLabel> parse_labels_csv(std::string_view csv);

class EditProvider {
 public:
  virtual ~EditProvider() = default;
  virtual Image edit(const Image& image, const std::string& instruction) = 0;
};

/// "Remove the {concept} from the image"
std::string removal_instruction(const ConceptLabel& concept_label);

struct AblationRecord {
  std::string image_id;
  ConceptLabel concept_label;
  double act_before = 0.0;
  double act_after = 0.0;
  /// (after - before) / |before|; negative means the activation dropped.
  /// When before == 0 this is the absolute change and absolute_fallback is set.
  double rel_change = 0.0;
  bool absolute_fallback = false;
  /// Set when the edit failed; activations after the edit are then invalid.
  std::optional<std::string> error;
};

AblationRecord causal_ablation(const Image& image, const ConceptLabel& concept_label, EditProvider& editor,
                               VisionProvider& vision, const NeuronAddress& neuron);

}  // namespace nlab
