#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <neurolabel/error.hpp>
#include <neurolabel/rng.hpp>
#include <neurolabel/simworld.hpp>

#include "test_support.hpp"

using namespace nlab;
using nlab::test::L;

namespace {

SimWorld make(double noise = 0.0, std::uint64_t seed = 3) {
  SimWorldSpec spec;
  spec.noise_sigma = noise;
  spec.seed = seed;
  return SimWorld::generate(spec);
}

double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

}  // namespace

TEST(SimWorld, UnitNormsAndTruthDirection) {
  const auto w = make();
  for (const auto& l : w.vocabulary()) EXPECT_NEAR(norm(w.embedding(l)), 1.0, 1e-9);
  ASSERT_EQ(w.neurons().size(), 100u);
  for (const auto& n : w.neurons()) {
    EXPECT_NEAR(norm(n.direction), 1.0, 1e-9);
    EXPECT_TRUE(w.knows(n.truth_label));
    EXPECT_EQ(w.embedding(n.truth_label), n.direction);
    EXPECT_GE(n.gain, 0.5);
    EXPECT_LE(n.gain, 2.0);
  }
}

TEST(SimWorld, TruthLabelsDistinctAndExcludedFromClasses) {
  const auto w = make();
  std::set<ConceptLabel> truths;
  for (const auto& n : w.neurons()) truths.insert(n.truth_label);
  EXPECT_EQ(truths.size(), w.neurons().size());
  const auto classes = w.class_labels();
  EXPECT_EQ(classes.size(), w.vocabulary().size() - truths.size());
  for (const auto& c : classes) EXPECT_FALSE(truths.contains(c));
}

TEST(SimWorld, PairwiseCosineBounded) {
  const auto w = make();
  const auto& v = w.vocabulary();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      EXPECT_LE(dot(w.embedding(v[i]), w.embedding(v[j])), 0.95);
}

TEST(SimWorld, NoiselessImageIsVocabularyVector) {
  const auto w = make();
  const auto& l = w.vocabulary()[17];
  EXPECT_EQ(w.image(l, 1), w.embedding(l));
  EXPECT_EQ(w.image(l, 99), w.embedding(l));
}

TEST(SimWorld, SameSeedSameImage) {
  const auto w = make(0.3);
  const auto& l = w.vocabulary()[4];
  EXPECT_EQ(w.image(l, 11), w.image(l, 11));
  EXPECT_NE(w.image(l, 11), w.image(l, 12));
}

TEST(SimWorld, UnknownConceptHashEmbeddingIsStable) {
  const auto a = make(0.0, 1);
  const auto b = make(0.0, 1);
  const auto e = a.embedding(L("purple giraffe"));
  EXPECT_FALSE(a.knows(L("purple giraffe")));
  EXPECT_NEAR(norm(e), 1.0, 1e-9);
  EXPECT_EQ(e, b.embedding(L("Purple  Giraffe")));
  EXPECT_NE(e, a.embedding(L("green giraffe")));
}

TEST(SimWorld, ActivationExamples) {
  const auto w = make();
  const auto& n = w.neurons()[0];
  EXPECT_EQ(w.activation(n.direction, n.address), n.gain);
  auto ortho = w.embedding(w.vocabulary()[0] == n.truth_label ? w.vocabulary()[1] : w.vocabulary()[0]);
  const double c = dot(ortho, n.direction);
  for (std::size_t i = 0; i < ortho.size(); ++i) ortho[i] -= c * n.direction[i];
  EXPECT_NEAR(w.activation(ortho, n.address), 0.0, 1e-12);
}

TEST(SimWorld, GainTwoOnDirection) {
  SimWorldSpec spec;
  spec.gain_min = spec.gain_max = 2.0;
  spec.neuron_count = 3;
  const auto w = SimWorld::generate(spec);
  for (const auto& n : w.neurons()) EXPECT_EQ(w.activation(n.direction, n.address), 2.0);
}

TEST(SimWorld, UnknownNeuron) {
  const auto w = make();
  try {
    w.activation(w.neurons()[0].direction, {"sim", 100});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::configuration);
  }
  EXPECT_THROW(w.neuron({"other", 0}), Error);
}

TEST(SimWorld, TruthMaximisesExpectedScore) {
  const auto w = make();
  for (const auto& n : w.neurons()) {
    const double truth = w.activation(w.embedding(n.truth_label), n.address);
    for (const auto& l : w.vocabulary()) EXPECT_LE(w.activation(w.embedding(l), n.address), truth);
  }
}

// Mean activation of noisy truth images: gain plus zero-mean noise.
TEST(SimWorld, MonteCarloTruthExpectation) {
  const double sigma = 0.5;
  const std::size_t samples = 4000;
  const auto w = make(sigma, 21);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& n = w.neurons()[k];
    double sum = 0;
    for (std::size_t s = 0; s < samples; ++s) sum += w.activation(w.image(n.truth_label, mix_seed(k, s)), n.address);
    EXPECT_NEAR(sum / samples, n.gain, 3 * n.gain * sigma / std::sqrt(double(samples)));
  }
}

TEST(SimWorld, ManifestRoundTrip) {
  const auto w = make(0.05, 77);
  const auto m = w.to_manifest();
  const auto back = SimWorld::from_manifest(m);
  EXPECT_EQ(back.to_manifest(), m);
  EXPECT_EQ(back.vocabulary(), w.vocabulary());
  for (std::size_t i = 0; i < w.neurons().size(); ++i) {
    EXPECT_EQ(back.neurons()[i].direction, w.neurons()[i].direction);
    EXPECT_EQ(back.neurons()[i].gain, w.neurons()[i].gain);
    EXPECT_EQ(back.neurons()[i].truth_label, w.neurons()[i].truth_label);
  }
  EXPECT_EQ(back.image(w.vocabulary()[2], 5), w.image(w.vocabulary()[2], 5));
}

TEST(SimWorld, MalformedManifest) {
  EXPECT_THROW(SimWorld::from_manifest("{\"dim\": 3}"), Error);
  EXPECT_THROW(SimWorld::from_manifest("not json"), Error);
}

TEST(SimWorld, ConfigurationErrors) {
  SimWorldSpec spec;
  spec.neuron_count = 300;
  EXPECT_THROW(SimWorld::generate(spec), Error);
  spec = {};
  spec.noise_sigma = -1;
  EXPECT_THROW(SimWorld::generate(spec), Error);
  spec = {};
  spec.dim = 1;
  spec.vocabulary_size = 5;
  spec.neuron_count = 1;
  EXPECT_THROW(SimWorld::generate(spec), Error);
}

TEST(SimWorld, SeedDeterminism) {
  EXPECT_EQ(make(0.1, 5).to_manifest(), make(0.1, 5).to_manifest());
  EXPECT_NE(make(0.1, 5).to_manifest(), make(0.1, 6).to_manifest());
}
