#include <gtest/gtest.h>

#include <map>
#include <set>

#include <json.hpp>
#include <neurolabel/error.hpp>
#include <neurolabel/io.hpp>
#include <neurolabel/rng.hpp>
#include <neurolabel/sim_providers.hpp>
#include <neurolabel/synthesis.hpp>

#include "test_support.hpp"

using namespace nlab;
using nlab::test::L;

TEST(Synthesis, TemplateInstantiation) {
  const auto p = make_prompt(L("dam"), Angle::aerial_view, Lighting::studio_lighting, 0);
  EXPECT_EQ(p.rendered, "A realistic photo of a dam, aerial view, studio lighting");
}

TEST(Synthesis, EveryModifierPairRendersTheTemplate) {
  const std::set<std::string> angles{"extreme close-up", "wide angle shot", "aerial view", "low angle"};
  const std::set<std::string> lights{"cinematic lighting", "natural sunlight", "studio lighting"};
  std::set<std::string> seen_a, seen_l;
  for (auto a : kAllAngles) {
    for (auto l : kAllLightings) {
      const auto p = make_prompt(L("gym"), a, l, 1);
      EXPECT_EQ(p.rendered, "A realistic photo of a gym, " + std::string(to_string(a)) + ", " + std::string(to_string(l)));
      seen_a.insert(std::string(to_string(a)));
      seen_l.insert(std::string(to_string(l)));
    }
  }
  EXPECT_EQ(seen_a, angles);
  EXPECT_EQ(seen_l, lights);
}

TEST(SeedFor, NormalizationPrecedesHashing) {
  EXPECT_EQ(seed_for(L("gym"), 5), seed_for(L("GYM "), 5));
}

TEST(SeedFor, DistinctAcrossFixtureVocabulary) {
  std::set<std::uint64_t> seeds;
  const char* vocab[] = {"pool table", "barbell", "exercise mat", "dumbbell", "parallel bars", "leonberg",
                         "chocolate sauce", "pier", "christmas stocking", "beer glass", "flat surface",
                         "weight plate", "gym", "billiards", "strength training", "weightlifting",
                         "weightlifting equipment", "strength", "physical exercise"};
  for (const char* c : vocab) seeds.insert(seed_for(L(c), 0));
  EXPECT_EQ(seeds.size(), std::size(vocab));
}

TEST(SeedFor, SaltChangesSeed) { EXPECT_NE(seed_for(L("gym"), 0), seed_for(L("gym"), 1)); }

TEST(SeedFor, FrozenGoldenValues) {
  const auto doc = nlohmann::json::parse(read_file(nlab::test::fixture_dir() / "seed_for_golden.json"));
  ASSERT_FALSE(doc.empty());
  for (const auto& e : doc) {
    const auto got = seed_for(L(e["concept"].get<std::string>()), e["run_salt"].get<std::uint64_t>());
    EXPECT_EQ(to_hex(got), e["seed"].get<std::string>()) << e["concept"];
  }
}

TEST(BuildPrompts, DeterministicForSameInputs) {
  const auto a = build_prompts(L("strength training"), 5, 42);
  const auto b = build_prompts(L("strength training"), 5, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].rendered, b[i].rendered);
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
}

TEST(BuildPrompts, BatchOfFiveWithIndexedSeeds) {
  const auto p = build_prompts(L("strength training"), 5, 1000);
  ASSERT_EQ(p.size(), 5u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p[i].concept_label.text(), "strength training");
    EXPECT_EQ(p[i].seed, 1000 + i);
    EXPECT_EQ(p[i].rendered, make_prompt(p[i].concept_label, p[i].angle, p[i].lighting, 0).rendered);
  }
}

TEST(BuildPrompts, ModifiersRoughlyUniform) {
  std::map<Angle, int> angles;
  std::map<Lighting, int> lights;
  const auto p = build_prompts(L("x"), 12000, 7);
  for (const auto& s : p) {
    ++angles[s.angle];
    ++lights[s.lighting];
  }
  for (auto a : kAllAngles) EXPECT_NEAR(angles[a], 3000, 300);
  for (auto l : kAllLightings) EXPECT_NEAR(lights[l], 4000, 300);
}

TEST(BuildPrompts, ZeroRejected) { EXPECT_THROW(build_prompts(L("x"), 0, 1), Error); }

namespace {

SimWorld small_world(double noise) {
  SimWorldSpec spec;
  spec.dim = 8;
  spec.vocabulary_size = 20;
  spec.neuron_count = 4;
  spec.noise_sigma = noise;
  spec.seed = 3;
  return SimWorld::generate(spec);
}

class CountingT2i final : public T2iProvider {
 public:
  int calls = 0;
  int fail_first = 0;
  std::size_t shortfall = 0;
  std::vector<Image> generate(std::span<const PromptSpec> prompts) override {
    ++calls;
    if (calls <= fail_first) throw ProviderError("busy", 503, true);
    std::vector<Image> out;
    for (std::size_t i = 0; i + shortfall < prompts.size(); ++i)
      out.push_back(Image{"img", "image/png", {0x89, 'P', 'N', 'G'}, {}});
    return out;
  }
};

}  // namespace

TEST(Generate, SimNoiseZeroGivesExactEmbeddings) {
  const auto world = small_world(0.0);
  SimT2i t2i(world);
  const auto label = world.vocabulary()[2];
  const auto prompts = build_prompts(label, 5, seed_for(label, 0));
  const auto batch = generate(t2i, prompts);
  ASSERT_EQ(batch.images.size(), 5u);
  for (const auto& img : batch.images) EXPECT_EQ(img.embedding, world.embedding(label));
}

TEST(Generate, SimFixedSeedIsReproducible) {
  const auto world = small_world(0.3);
  SimT2i t2i(world);
  const auto prompts = build_prompts(world.vocabulary()[0], 5, 77);
  const auto a = generate(t2i, prompts), b = generate(t2i, prompts);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.images[i].embedding, b.images[i].embedding);
  EXPECT_NE(a.images[0].embedding, a.images[1].embedding);
}

TEST(Generate, RetriesTransientFailures) {
  CountingT2i t2i;
  t2i.fail_first = 2;
  const auto prompts = build_prompts(L("gym"), 3, 1);
  const auto batch = generate(t2i, prompts, RetryPolicy{3, 0});
  EXPECT_EQ(batch.images.size(), 3u);
  EXPECT_EQ(t2i.calls, 3);
}

TEST(Generate, GivesUpAfterConfiguredAttempts) {
  CountingT2i t2i;
  t2i.fail_first = 10;
  const auto prompts = build_prompts(L("gym"), 3, 1);
  EXPECT_THROW(generate(t2i, prompts, RetryPolicy{3, 0}), ProviderError);
  EXPECT_EQ(t2i.calls, 3);
}

TEST(Generate, CountMismatchIsProtocolError) {
  CountingT2i t2i;
  t2i.shortfall = 1;
  const auto prompts = build_prompts(L("gym"), 3, 1);
  try {
    generate(t2i, prompts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::protocol);
  }
}

TEST(RetryPolicy, BackoffStrictlyIncreases) {
  RetryPolicy p{5, 100};
  std::vector<std::chrono::milliseconds> waits;
  int calls = 0;
  EXPECT_THROW(with_retry(
                   p,
                   [&]() -> int {
                     ++calls;
                     throw ProviderError("x", 500, true);
                   },
                   [&](std::chrono::milliseconds d) { waits.push_back(d); }),
               ProviderError);
  EXPECT_EQ(calls, 5);
  ASSERT_EQ(waits.size(), 4u);
  for (std::size_t i = 1; i < waits.size(); ++i) EXPECT_GT(waits[i], waits[i - 1]);
  EXPECT_EQ(waits[0].count(), 100);
}

TEST(RetryPolicy, NonRetryableStopsImmediately) {
  int calls = 0;
  EXPECT_THROW(with_retry(RetryPolicy{5, 0},
                          [&]() -> int {
                            ++calls;
                            throw ProviderError("bad request", 400, false);
                          }),
               ProviderError);
  EXPECT_EQ(calls, 1);
}
