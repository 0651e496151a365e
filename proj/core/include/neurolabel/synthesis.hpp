#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurolabel/image.hpp"
#include "neurolabel/label.hpp"
#include "neurolabel/retry.hpp"

namespace nlab {

enum class Angle { extreme_close_up, wide_angle_shot, aerial_view, low_angle };
enum class Lighting { cinematic_lighting, natural_sunlight, studio_lighting };

inline constexpr std::array kAllAngles{Angle::extreme_close_up, Angle::wide_angle_shot,
                                       Angle::aerial_view, Angle::low_angle};
inline constexpr std::array kAllLightings{Lighting::cinematic_lighting, Lighting::natural_sunlight,
                                          Lighting::studio_lighting};

std::string_view to_string(Angle angle) noexcept;
std::string_view to_string(Lighting lighting) noexcept;

struct PromptSpec {
  ConceptLabel concept_label;
  Angle angle = Angle::extreme_close_up;
  Lighting lighting = Lighting::cinematic_lighting;
  std::uint64_t seed = 0;
  std::string rendered;
};

/// "A realistic photo of a {concept}, {angle}, {lighting}"
std::string render_t2i_prompt(const ConceptLabel& concept_label, Angle angle, Lighting lighting);
PromptSpec make_prompt(const ConceptLabel& concept_label, Angle angle, Lighting lighting, std::uint64_t seed);

/// Stable 64-bit seed for a concept within a run: FNV-1a of the normalised
/// text, mixed with the run salt through splitmix64.
std::uint64_t seed_for(const ConceptLabel& concept_label, std::uint64_t run_salt) noexcept;

/// n prompts whose angle and lighting are drawn uniformly with replacement
/// from a generator seeded by `seed`; prompt i carries seed + i.
std::vector<PromptSpec> build_prompts(const ConceptLabel& concept_label, std::size_t n, std::uint64_t seed);

struct ImageBatch {
  ConceptLabel concept_label;
  std::vector<Image> images;
  std::vector<PromptSpec> prompts;
};

class T2iProvider {
 public:
  virtual ~T2iProvider() = default;
  /// One image per prompt, same order.
  virtual std::vector<Image> generate(std::span<const PromptSpec> prompts) = 0;
};

/// Calls the provider under `retry`; retryable provider failures that
/// persist are rethrown. Throws Error{protocol} if the provider returns the
/// wrong number of images.
ImageBatch generate(T2iProvider& provider, std::span<const PromptSpec> prompts,
                    const RetryPolicy& retry = {}, const Sleeper& sleeper = sleep_for);

}  // namespace nlab
