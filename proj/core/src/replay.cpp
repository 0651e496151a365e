#include "neurolabel/replay.hpp"

#include <charconv>

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/io.hpp"

namespace nlab {

namespace {

constexpr std::string_view kReplayPrefix = "replay:";

}  // namespace

ReplayFixture load_replay_fixture(const std::filesystem::path& dir) {
  ReplayFixture fx;
  try {
    const auto meta = detail::read_json_file(dir / "fixture.json");
    fx.neuron = NeuronAddress{meta.at("neuron").at("layer").get<std::string>(),
                              meta.at("neuron").at("index").get<std::size_t>()};
    const auto& c = meta.at("config");
    fx.config.iterations = c.value("iterations", fx.config.iterations);
    fx.config.batch_size = c.value("batch_size", fx.config.batch_size);
    fx.config.init_top = c.value("init_top", fx.config.init_top);
    fx.config.init_random = c.value("init_random", fx.config.init_random);
    fx.config.init_classes = c.value("init_classes", fx.config.init_classes);
    fx.config.init_images = c.value("init_images", fx.config.init_images);
    fx.config.max_retries = c.value("max_retries", fx.config.max_retries);

    const auto init = detail::read_json_file(dir / "init_matrix.json");
    fx.init.class_labels = init.at("class_labels").get<std::vector<std::string>>();
    const auto rows = init.at("values").get<std::vector<std::vector<double>>>();
    fx.init.rows = rows.size();
    fx.init.cols = rows.empty() ? 0 : rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != fx.init.cols) throw Error(Errc::io, "init matrix fixture rows have different lengths");
      fx.init.values.insert(fx.init.values.end(), r.begin(), r.end());
    }
    fx.init.validate();

    fx.transcript = parse_transcript(read_file(dir / "transcript.json"));

    const auto acts = detail::read_json_file(dir / "activations.json");
    for (const auto& [concept_label, values] : acts.items()) {
      fx.activations.emplace(ConceptLabel::normalize(concept_label), values.get<std::vector<double>>());
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::io, fmt::format("malformed replay fixture in '{}': {}", dir.string(), ex.what()));
  } catch (const std::invalid_argument& ex) {
    throw Error(Errc::io, fmt::format("invalid replay fixture in '{}': {}", dir.string(), ex.what()));
  }
  return fx;
}

std::vector<Image> ReplayT2i::generate(std::span<const PromptSpec> prompts) {
  std::vector<Image> out;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    out.push_back(Image{fmt::format("{}{}#{}", kReplayPrefix, prompts[i].concept_label.text(), i), "", {}, {}});
  }
  return out;
}

std::vector<std::vector<double>> ReplayVision::activations(std::span<const Image> images, const std::string& layer,
                                                           std::span<const std::size_t> indices) {
  std::vector<std::vector<double>> out;
  for (const auto& image : images) {
    const auto hash = image.id.rfind('#');
    if (!image.id.starts_with(kReplayPrefix) || hash == std::string::npos) {
      throw Error(Errc::protocol, fmt::format("'{}' is not a replay image", image.id));
    }
    const auto concept_label = ConceptLabel::normalize(
        std::string_view(image.id).substr(kReplayPrefix.size(), hash - kReplayPrefix.size()));
    std::size_t position = 0;
    std::from_chars(image.id.data() + hash + 1, image.id.data() + image.id.size(), position);
    auto it = activations_.find(concept_label);
    if (it == activations_.end() || position >= it->second.size()) {
      throw Error(Errc::configuration, fmt::format("no recorded activation for '{}' image {}", concept_label.text(), position));
    }
    std::vector<double> row;
    for (auto index : indices) {
      if (layer != neuron_.layer || index != neuron_.index) {
        throw Error(Errc::configuration, fmt::format("replay only covers {}", to_string(neuron_)));
      }
      row.push_back(it->second[position]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace nlab
