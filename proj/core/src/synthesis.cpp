#include "neurolabel/synthesis.hpp"

#include <fmt/format.h>

#include "neurolabel/error.hpp"
#include "neurolabel/rng.hpp"

namespace nlab {

std::string_view to_string(Angle angle) noexcept {
  switch (angle) {
    case Angle::extreme_close_up: return "extreme close-up";
    case Angle::wide_angle_shot: return "wide angle shot";
    case Angle::aerial_view: return "aerial view";
    case Angle::low_angle: return "low angle";
  }
  return "extreme close-up";
}

std::string_view to_string(Lighting lighting) noexcept {
  switch (lighting) {
    case Lighting::cinematic_lighting: return "cinematic lighting";
    case Lighting::natural_sunlight: return "natural sunlight";
    case Lighting::studio_lighting: return "studio lighting";
  }
  return "cinematic lighting";
}

std::string render_t2i_prompt(const ConceptLabel& concept_label, Angle angle, Lighting lighting) {
  return fmt::format("A realistic photo of a {}, {}, {}", concept_label.text(), to_string(angle),
                     to_string(lighting));
}

PromptSpec make_prompt(const ConceptLabel& concept_label, Angle angle, Lighting lighting, std::uint64_t seed) {
  return PromptSpec{concept_label, angle, lighting, seed, render_t2i_prompt(concept_label, angle, lighting)};
}

std::uint64_t seed_for(const ConceptLabel& concept_label, std::uint64_t run_salt) noexcept {
  return mix_seed(fnv1a64(concept_label.text()), run_salt);
}

std::vector<PromptSpec> build_prompts(const ConceptLabel& concept_label, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::configuration, "prompt batch size must be >= 1");
  Rng rng(seed);
  std::vector<PromptSpec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto angle = kAllAngles[rng.below(kAllAngles.size())];
    const auto lighting = kAllLightings[rng.below(kAllLightings.size())];
    out.push_back(make_prompt(concept_label, angle, lighting, seed + i));
  }
  return out;
}

ImageBatch generate(T2iProvider& provider, std::span<const PromptSpec> prompts, const RetryPolicy& retry,
                    const Sleeper& sleeper) {
  if (prompts.empty()) throw Error(Errc::configuration, "cannot generate an empty prompt batch");
  auto images = with_retry(retry, [&] { return provider.generate(prompts); }, sleeper);
  if (images.size() != prompts.size()) {
    throw Error(Errc::protocol, fmt::format("provider returned {} images for {} prompts", images.size(),
                                            prompts.size()));
  }
  return ImageBatch{prompts.front().concept_label, std::move(images), {prompts.begin(), prompts.end()}};
}

}  // namespace nlab
