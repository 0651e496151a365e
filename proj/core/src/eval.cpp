#include "neurolabel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "csv_util.hpp"
#include "json_util.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/rng.hpp"

namespace nlab {

using detail::csv_field;
using detail::split_csv_line;

namespace {

MetricAggregate aggregate(const std::vector<double>& xs) {
  MetricAggregate out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(xs.size()));
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  out.min = *lo;
  out.max = *hi;
  // Rounding in the mean can land a hair outside [min, max] for constant rows.
  out.mean = std::clamp(out.mean, out.min, out.max);
  return out;
}

nlohmann::json metric_json(const MetricAggregate& m) {
  return {{"mean", m.mean}, {"std", m.std}, {"min", m.min}, {"max", m.max}};
}

}  // namespace

CosyScore cosy_eval(const ConceptLabel& label, const NeuronAddress& neuron, const ActivationSet& control,
                    T2iProvider& t2i, VisionProvider& vision, ImageCache* cache, const EvalConfig& cfg) {
  const auto stats = control_stats(control);
  if (!(stats.std > 0.0)) {
    throw Error(Errc::degenerate_control, fmt::format("control set for {} has zero spread", to_string(neuron)));
  }
  auto make = [&] {
    const auto prompts = build_prompts(label, cfg.batch_size, seed_for(label, cfg.run_salt));
    return generate(t2i, prompts, cfg.retry);
  };
  std::shared_ptr<const ImageBatch> batch;
  if (cache) {
    batch = cache->get_or_create(label, cfg.run_salt, make).batch;
  } else {
    batch = std::make_shared<const ImageBatch>(make());
  }
  const auto concept_label = extract(vision, batch->images, neuron, cfg.retry);
  return CosyScore{score_auc(control, concept_label), score_mad(stats, concept_label)};
}

std::vector<ActivationSet> build_control_sets(VisionProvider& vision, const LabeledImageSource& dataset,
                                              const std::string& layer, std::span<const std::size_t> indices,
                                              std::size_t size, std::uint64_t seed, const RetryPolicy& retry) {
  if (size == 0) throw Error(Errc::configuration, "control set size must be >= 1");
  const auto classes = dataset.classes();
  if (classes.empty()) throw Error(Errc::insufficient_data, fmt::format("dataset '{}' has no classes", dataset.id()));

  Rng rng(seed);
  std::vector<std::size_t> per_class(classes.size(), 0);
  for (std::size_t i = 0; i < size; ++i) ++per_class[rng.below(classes.size())];

  std::vector<Image> images;
  images.reserve(size);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (per_class[k] == 0) continue;
    const auto available = dataset.images(classes[k], per_class[k]);
    if (available.empty()) {
      throw Error(Errc::insufficient_data, fmt::format("class '{}' has no images", classes[k]));
    }
    for (std::size_t j = 0; j < per_class[k]; ++j) images.push_back(available[j % available.size()]);
  }

  std::vector<std::vector<double>> columns(indices.size());
  constexpr std::size_t kChunk = 64;
  for (std::size_t begin = 0; begin < images.size(); begin += kChunk) {
    const auto chunk = std::span<const Image>(images).subspan(begin, std::min(kChunk, images.size() - begin));
    const auto rows = with_retry(retry, [&] { return vision.activations(chunk, layer, indices); });
    if (rows.size() != chunk.size()) throw Error(Errc::protocol, "provider returned the wrong number of rows");
    for (const auto& row : rows) {
      if (row.size() != indices.size()) throw Error(Errc::protocol, "provider returned the wrong number of columns");
      for (std::size_t n = 0; n < indices.size(); ++n) columns[n].push_back(row[n]);
    }
  }
  std::vector<ActivationSet> out;
  for (auto& c : columns) out.emplace_back(std::move(c));
  return out;
}

std::map<std::string, MethodAggregate> aggregate_rows(std::span<const EvalRow> rows) {
  std::vector<const EvalRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const EvalRow* a, const EvalRow* b) {
    return std::tie(a->method, a->neuron) < std::tie(b->method, b->neuron);
  });
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> values;
  for (const auto* r : sorted) {
    values[r->method].first.push_back(r->auc);
    values[r->method].second.push_back(r->mad);
  }
  std::map<std::string, MethodAggregate> out;
  for (const auto& [method, v] : values) {
    out[method] = MethodAggregate{v.first.size(), aggregate(v.first), aggregate(v.second)};
  }
  return out;
}

EvalReport eval_methods(const MethodAssignments& assignments, const ControlLookup& controls, T2iProvider& t2i,
                        VisionProvider& vision, ImageCache* cache, const EvalConfig& cfg) {
  EvalReport report;
  report.reuses_selection_images = cfg.loop_salt && *cfg.loop_salt == cfg.run_salt;
  if (assignments.empty()) return report;

  std::set<NeuronAddress> common;
  for (const auto& [neuron, label] : assignments.begin()->second) common.insert(neuron);
  for (const auto& [method, labels] : assignments) {
    std::set<NeuronAddress> mine;
    for (const auto& [neuron, label] : labels) mine.insert(neuron);
    std::set<NeuronAddress> both;
    std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
                          std::inserter(both, both.begin()));
    common = std::move(both);
  }
  for (const auto& [method, labels] : assignments) {
    for (const auto& [neuron, label] : labels) {
      if (!common.contains(neuron)) report.missing.push_back({method, neuron, "not covered by every method"});
    }
  }
  for (const auto& [method, labels] : assignments) {
    for (const auto& neuron : common) {
      const auto& label = labels.at(neuron);
      try {
        const auto score = cosy_eval(label, neuron, controls(neuron), t2i, vision, cache, cfg);
        report.rows.push_back({method, neuron, label, score.auc, score.mad});
      } catch (const Error& err) {
        report.missing.push_back({method, neuron, err.what()});
      }
    }
  }
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "method,neuron_layer,neuron_index,label,auc,mad\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{:.6f},{:.6f}\n", csv_field(r.method), csv_field(r.neuron.layer), r.neuron.index,
                       csv_field(r.label.text()), r.auc, r.mad);
  }
  return out;
}

std::string report_sidecar_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["reuses_selection_images"] = report.reuses_selection_images;
  doc["methods"] = nlohmann::json::object();
  for (const auto& [method, agg] : report.aggregates) {
    doc["methods"][method] = {{"count", agg.count}, {"auc", metric_json(agg.auc)}, {"mad", metric_json(agg.mad)}};
  }
  doc["missing"] = nlohmann::json::array();
  for (const auto& m : report.missing) {
    doc["missing"].push_back({{"method", m.method}, {"neuron", to_string(m.neuron)}, {"reason", m.reason}});
  }
  return doc.dump(2) + "\n";
}

std::map<NeuronAddress, ConceptLabel> parse_labels_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, "labels CSV is empty");
  const auto header = split_csv_line(line);
  auto column = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(Errc::io, fmt::format("labels CSV lacks column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto layer_col = column("neuron_layer");
  const auto index_col = column("neuron_index");
  const auto label_col = column("label");
  std::map<NeuronAddress, ConceptLabel> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) throw Error(Errc::io, fmt::format("labels CSV line {} is short", line_no));
    const auto neuron = parse_neuron(fields[layer_col] + ":" + fields[index_col]);
    out.insert_or_assign(neuron, ConceptLabel::normalize(fields[label_col]));
  }
  return out;
}

std::string removal_instruction(const ConceptLabel& concept_label) {
  return fmt::format("Remove the {} from the image", concept_label.text());
}

AblationRecord causal_ablation(const Image& image, const ConceptLabel& concept_label, EditProvider& editor,
                               VisionProvider& vision, const NeuronAddress& neuron) {
  AblationRecord record{image.id, concept_label, 0.0, 0.0, 0.0, false, std::nullopt};
  record.act_before = extract(vision, std::span<const Image>(&image, 1), neuron)[0];
  Image edited;
  try {
    edited = editor.edit(image, removal_instruction(concept_label));
  } catch (const Error& err) {
    record.act_after = record.act_before;
    record.error = err.what();
    return record;
  }
  record.act_after = extract(vision, std::span<const Image>(&edited, 1), neuron)[0];
  if (record.act_before != 0.0) {
    record.rel_change = (record.act_after - record.act_before) / std::abs(record.act_before);
  } else {
    record.rel_change = record.act_after - record.act_before;
    record.absolute_fallback = true;
  }
  return record;
}

}  // namespace nlab
