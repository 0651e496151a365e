#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <neurolabel/scoreboard.hpp>

namespace nlab::test {

inline std::filesystem::path data_dir() { return NLAB_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return NLAB_TEST_FIXTURES; }
inline std::filesystem::path replay_fixture() { return data_dir() / "fixtures" / "neuron_1255"; }
inline std::filesystem::path protocol_file() { return NLAB_PROTOCOL_FILE; }

inline ConceptLabel L(std::string_view s) { return ConceptLabel::normalize(s); }

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("nlab_test_" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// The final board of the neuron-1255 trace: seeded classes at step 0, the
/// generated concepts at their steps, the summary at N + 1 = 11.
inline Scoreboard golden_board() {
  Scoreboard b(NeuronAddress{"avgpool", 1255});
  auto pre = [&](const char* l, double s) { b.insert({L(l), s, 0, Origin::predefined, {}}); };
  auto gen = [&](const char* l, double s, std::size_t step, Origin o = Origin::generated) {
    b.insert({L(l), s, step, o, {}});
  };
  pre("pool table", 0.96);
  pre("barbell", 0.67);
  pre("exercise mat", 0.59);
  pre("dumbbell", 0.46);
  pre("parallel bars", 0.35);
  pre("leonberg", 0.31);
  pre("chocolate sauce", 0.18);
  pre("pier", 0.24);
  pre("christmas stocking", 0.23);
  pre("beer glass", 0.11);
  gen("exercise mat", 0.59, 1);
  gen("flat surface", 0.11, 2);
  gen("weight plate", 0.08, 3);
  gen("gym", 1.91, 4);
  gen("billiards", 0.71, 5);
  gen("strength training", 2.08, 6);
  gen("weightlifting", 1.47, 7);
  gen("weightlifting equipment", 1.30, 8);
  gen("weightlifting", 1.47, 9);
  gen("strength", 0.24, 10);
  gen("physical exercise", 1.33, 11, Origin::summary);
  return b;
}

}  // namespace nlab::test
