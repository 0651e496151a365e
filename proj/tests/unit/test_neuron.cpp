#include <gtest/gtest.h>

#include <neurolabel/error.hpp>
#include <neurolabel/neuron.hpp>

using namespace nlab;

TEST(Neuron, RoundTripsThroughText) {
  const NeuronAddress n{"avgpool", 1255};
  EXPECT_EQ(to_string(n), "avgpool:1255");
  EXPECT_EQ(parse_neuron("avgpool:1255"), n);
}

TEST(Neuron, SelectorRangesAndLists) {
  const auto v = parse_neuron_selector("avgpool:0-3,7");
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.front(), (NeuronAddress{"avgpool", 0}));
  EXPECT_EQ(v.back(), (NeuronAddress{"avgpool", 7}));
}

TEST(Neuron, SelectorRejectsGarbage) {
  EXPECT_THROW(parse_neuron_selector("avgpool"), Error);
  EXPECT_THROW(parse_neuron_selector("avgpool:5-2"), Error);
  EXPECT_THROW(parse_neuron("avgpool:x"), Error);
}

TEST(Neuron, FileStemIsFilesystemSafe) {
  const auto stem = neuron_file_stem({"encoder.layers/3", 12});
  EXPECT_EQ(stem.find('/'), std::string::npos);
  EXPECT_EQ(stem.find(':'), std::string::npos);
}
