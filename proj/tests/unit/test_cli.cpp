#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include <commands.hpp>
#include <neurolabel/activation.hpp>
#include <neurolabel/io.hpp>
#include <neurolabel/rng.hpp>
#include <neurolabel/scoreboard.hpp>

#include "bridge_stub.hpp"
#include "test_support.hpp"

using namespace nlab;
using namespace nlab::cli;
using nlab::test::TempDir;

namespace {

ToolConfig small_sim(std::uint64_t seed = 1) {
  ToolConfig cfg;
  cfg.seed = seed;
  cfg.sim.dim = 16;
  cfg.sim.vocabulary_size = 60;
  cfg.sim.neuron_count = 5;
  cfg.run.iterations = 4;
  cfg.run.init_classes = 10;
  cfg.run.init_images = 3;
  return cfg;
}

}  // namespace

TEST(ToolConfig, ParsesSectionsAndRejectsUnknownKeys) {
  const auto cfg = load_tool_config(R"({
    "provider": "sim", "seed": 9, "neurons": "sim:0-2",
    "run": {"iterations": 20, "batch_size": 3},
    "sim": {"dim": 8, "noise_sigma": 0.05, "strategy": "oracle"},
    "cache": {"images": "imgs"},
    "eval": {"control_size": 50, "methods": {"ours": "labels.csv"}}
  })");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(*cfg.neurons, "sim:0-2");
  EXPECT_EQ(cfg.run.iterations, 20u);
  EXPECT_EQ(cfg.sim.dim, 8u);
  EXPECT_EQ(cfg.strategy, SimStrategy::oracle);
  EXPECT_EQ(cfg.eval.control_size, 50u);
  EXPECT_EQ(cfg.methods.at("ours"), "labels.csv");

  for (const char* bad : {R"({"provder": "sim"})", R"({"run": {"seed": 1}})", R"({"sim": {"dims": 3}})",
                          R"({"seed": "x"})", R"({"bridge": {"roles": {"judge": {}}}})", "{"}) {
    EXPECT_THROW(load_tool_config(bad), Error) << bad;
  }
}

TEST(ToolConfig, BridgeRolesOverrideShared) {
  const auto cfg = load_tool_config(R"({"bridge": {"base_url": "http://a:1", "max_in_flight": 2,
    "roles": {"t2i": {"base_url": "http://b:2"}}}})");
  EXPECT_EQ(cfg.bridge.llm.base_url, "http://a:1");
  EXPECT_EQ(cfg.bridge.t2i.base_url, "http://b:2");
  EXPECT_EQ(cfg.bridge.t2i.max_in_flight, 2u);
}

TEST(ToolConfig, FinalizeDerivesSeeds) {
  auto a = small_sim(5);
  auto b = small_sim(5);
  a.finalize();
  b.finalize();
  EXPECT_EQ(a.run.seed, 5u);
  EXPECT_EQ(a.sim.seed, b.sim.seed);
  EXPECT_NE(a.sim.seed, a.eval.control_seed);
  auto c = small_sim(6);
  c.finalize();
  EXPECT_NE(a.sim.seed, c.sim.seed);
  a.provider = "gpt";
  EXPECT_THROW(a.finalize(), Error);
}

TEST(ToolConfig, FilePathsAreRelativeToTheFile) {
  TempDir dir;
  write_file_atomic(dir / "cfg/run.json", R"({"replay": {"fixture": "fx"}, "cache": {"init": "/abs/init"}})");
  const auto cfg = load_tool_config_file(dir / "cfg/run.json");
  EXPECT_EQ(cfg.fixture, dir / "cfg" / "fx");
  EXPECT_EQ(cfg.init_cache, "/abs/init");
  EXPECT_THROW(load_tool_config_file(dir / "missing.json"), Error);
}

TEST(ToolConfig, EchoHidesApiKey) {
  auto cfg = load_tool_config(R"({"bridge": {"base_url": "http://a:1", "api_key": "hunter2"}})");
  const auto echo = tool_config_json(cfg);
  EXPECT_EQ(echo.find("hunter2"), std::string::npos);
  EXPECT_NE(echo.find("<set>"), std::string::npos);
}

TEST(CmdExplain, ReplayFixture) {
  TempDir dir;
  ToolConfig cfg;
  cfg.provider = "replay";
  cfg.fixture = nlab::test::replay_fixture();
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kOk) << log.str();
  const auto board = scoreboard_from_json(read_file(dir / "scoreboards/avgpool_1255.json"));
  EXPECT_EQ(board.best().label.text(), "strength training");
  EXPECT_NE(read_file(dir / "labels.csv").find("avgpool,1255,strength training,2.080000,6,generated"),
            std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "effective_config.json"));
}

TEST(CmdExplain, ReplayRejectsOtherNeurons) {
  TempDir dir;
  ToolConfig cfg;
  cfg.provider = "replay";
  cfg.fixture = nlab::test::replay_fixture();
  cfg.neurons = "avgpool:1";
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kUsage);
  cfg.fixture.clear();
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kUsage);
}

TEST(CmdExplain, InvalidLayerListsAvailableLayers) {
  TempDir dir;
  auto cfg = small_sim();
  cfg.neurons = "conv1:0";
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kUsage);
  EXPECT_NE(log.str().find("unknown layer 'conv1'; available layers: sim"), std::string::npos) << log.str();
  cfg.neurons = "sim:99";
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kUsage);
}

TEST(CmdExplain, SimSelection) {
  TempDir dir;
  auto cfg = small_sim();
  cfg.neurons = "sim:1,3";
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kOk) << log.str();
  EXPECT_TRUE(std::filesystem::exists(dir / "scoreboards/sim_1.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "scoreboards/sim_0.json"));
}

TEST(CmdExplain, BridgeNeedsNeuronsAndDataset) {
  TempDir dir;
  ToolConfig cfg;
  cfg.provider = "bridge";
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kUsage);
  cfg.neurons = "x:0";
  EXPECT_EQ(cmd_explain(cfg, dir.path(), log), kUsage);
}

namespace {

void write_dataset(const std::filesystem::path& root) {
  for (const char* cls : {"barbell", "pool_table", "pier"}) {
    for (int i = 0; i < 2; ++i) {
      std::string png = "\x89PNG\r\n\x1a\n";
      png += cls;
      png += static_cast<char>('0' + i);
      write_file_atomic(root / cls / ("img" + std::to_string(i) + ".png"), png);
    }
  }
}

ToolConfig bridge_config(const nlab::test::BridgeStub& stub, const TempDir& dir) {
  ToolConfig cfg;
  cfg.provider = "bridge";
  for (auto* ep : {&cfg.bridge.llm, &cfg.bridge.t2i, &cfg.bridge.vision, &cfg.bridge.edit}) *ep = stub.endpoint();
  cfg.bridge.dataset_dir = dir / "dataset";
  cfg.init_cache = dir / "init";
  cfg.run.iterations = 2;
  cfg.run.batch_size = 2;
  cfg.run.init_classes = 3;
  cfg.run.init_images = 2;
  cfg.run.init_top = 1;
  cfg.run.init_random = 1;
  cfg.run.provider_retry = {2, 0};
  write_dataset(cfg.bridge.dataset_dir);
  return cfg;
}

}  // namespace

TEST(CmdExplain, BridgeEndToEndAndPartialFailure) {
  nlab::test::BridgeStub stub;
  TempDir dir;
  auto cfg = bridge_config(stub, dir);
  cfg.neurons = "stub_features:0-1";
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir / "ok", log), kOk) << log.str();
  EXPECT_TRUE(std::filesystem::exists(dir / "ok/scoreboards/stub_features_1.json"));
  EXPECT_TRUE(std::filesystem::exists(init_cache_path(cfg.init_cache, "model", {"stub_features", 0}, "dataset")));

  cfg.neurons = "stub_features:0,9";
  EXPECT_EQ(cmd_explain(cfg, dir / "partial", log), kPartial) << log.str();
  EXPECT_NE(log.str().find("failed stub_features:9"), std::string::npos);
  EXPECT_TRUE(stub.violations().empty());

  cfg.neurons = "stub_features:8,9";
  EXPECT_EQ(cmd_explain(cfg, dir / "none", log), kProvider);
}

TEST(CmdExplain, BridgeUnreachableIsProviderFailure) {
  TempDir dir;
  ModelEndpoint dead;
  {
    nlab::test::BridgeStub stub;
    dead = stub.endpoint();
  }
  nlab::test::BridgeStub live;
  auto cfg = bridge_config(live, dir);
  for (auto* ep : {&cfg.bridge.llm, &cfg.bridge.t2i, &cfg.bridge.vision, &cfg.bridge.edit}) *ep = dead;
  cfg.neurons = "stub_features:0";
  std::ostringstream log;
  EXPECT_EQ(cmd_explain(cfg, dir / "out", log), kProvider) << log.str();
}

TEST(CmdInitCache, ReusesValidFilesAndRegeneratesCorrupt) {
  TempDir dir;
  auto cfg = small_sim();
  cfg.init_cache = dir / "init";
  std::ostringstream log;
  ASSERT_EQ(cmd_init_cache(cfg, log), kOk) << log.str();
  EXPECT_NE(log.str().find("5 built, 0 reused"), std::string::npos) << log.str();

  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(cfg.init_cache))
    if (e.is_regular_file()) files.push_back(e.path());
  ASSERT_EQ(files.size(), 5u);
  std::sort(files.begin(), files.end());
  const auto before = read_file(files[0]);
  const auto mtime = std::filesystem::last_write_time(files[1]);

  std::ostringstream again;
  ASSERT_EQ(cmd_init_cache(cfg, again), kOk);
  EXPECT_NE(again.str().find("0 built, 5 reused"), std::string::npos) << again.str();
  EXPECT_EQ(std::filesystem::last_write_time(files[1]), mtime);

  auto corrupt = before;
  corrupt[0] = 'X';
  write_file_atomic(files[0], corrupt);
  std::ostringstream third;
  ASSERT_EQ(cmd_init_cache(cfg, third), kOk);
  EXPECT_NE(third.str().find("1 built, 4 reused"), std::string::npos) << third.str();
  EXPECT_EQ(read_file(files[0]), before);
}

TEST(CmdInitCache, ReplayIsRejected) {
  ToolConfig cfg;
  cfg.provider = "replay";
  std::ostringstream log;
  EXPECT_EQ(cmd_init_cache(cfg, log), kUsage);
}

TEST(CmdSimulate, DeterministicOutputs) {
  TempDir a, b, c;
  std::ostringstream log;
  ASSERT_EQ(cmd_simulate(small_sim(3), a.path(), log), kOk) << log.str();
  ASSERT_EQ(cmd_simulate(small_sim(3), b.path(), log), kOk);
  ASSERT_EQ(cmd_simulate(small_sim(4), c.path(), log), kOk);
  for (const char* f : {"cumulative_best.csv", "labels.csv", "truth.csv", "world.json"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  EXPECT_NE(read_file(a / "world.json"), read_file(c / "world.json"));
  const auto curve = read_file(a / "cumulative_best.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 1 + 4 + 2);
}

TEST(CmdSimulate, WorkersDoNotChangeOutputs) {
  TempDir a, b;
  std::ostringstream log;
  auto cfg = small_sim(8);
  ASSERT_EQ(cmd_simulate(cfg, a.path(), log), kOk);
  cfg.run.workers = 4;
  ASSERT_EQ(cmd_simulate(cfg, b.path(), log), kOk);
  EXPECT_EQ(read_file(a / "labels.csv"), read_file(b / "labels.csv"));
  EXPECT_EQ(read_file(a / "cumulative_best.csv"), read_file(b / "cumulative_best.csv"));
}

TEST(CmdSimulate, OnlySimProvider) {
  TempDir dir;
  auto cfg = small_sim();
  cfg.provider = "replay";
  std::ostringstream log;
  EXPECT_EQ(cmd_simulate(cfg, dir.path(), log), kUsage);
}

TEST(CmdReport, CountsAndEmptyDirectory) {
  TempDir run, empty;
  std::ostringstream log, out;
  ASSERT_EQ(cmd_simulate(small_sim(), run.path(), log), kOk);
  ASSERT_EQ(cmd_report(run.path(), true, out, log), kOk);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["origin"]["predefined"].get<int>() + j["origin"]["generated"].get<int>() +
                j["origin"]["summary"].get<int>(),
            5);
  std::ostringstream text;
  EXPECT_EQ(cmd_report(run.path(), false, text, log), kOk);
  EXPECT_NE(text.str().find("winning label origin"), std::string::npos);

  std::ostringstream err;
  EXPECT_NE(cmd_report(empty.path(), false, out, err), kOk);
  EXPECT_NE(err.str().find("error:"), std::string::npos);
}

TEST(CmdEval, SimTruthVersusRun) {
  TempDir dir;
  std::ostringstream log;
  auto cfg = small_sim(2);
  ASSERT_EQ(cmd_simulate(cfg, dir / "run", log), kOk);
  // Truth labels as a second method.
  const auto truth = read_file(dir / "run/truth.csv");
  std::string csv = "neuron_layer,neuron_index,label\n";
  std::istringstream in(truth);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    csv += f[0] + "," + f[1] + "," + f[2] + "\n";
  }
  write_file_atomic(dir / "truth_labels.csv", csv);
  cfg.methods = {{"loop", dir / "run/labels.csv"}, {"truth", dir / "truth_labels.csv"}};
  cfg.eval.control_size = 100;
  ASSERT_EQ(cmd_eval(cfg, dir / "eval", log), kOk) << log.str();
  const auto report = nlohmann::json::parse(read_file(dir / "eval/eval.json"));
  EXPECT_EQ(report["methods"]["truth"]["auc"]["mean"].get<double>(), 1.0);
  EXPECT_EQ(report["reuses_selection_images"], false);
  EXPECT_EQ(read_file(dir / "eval/eval.csv").rfind("method,neuron_layer,neuron_index,label,auc,mad\n", 0), 0u);

  cfg.methods.clear();
  EXPECT_EQ(cmd_eval(cfg, dir / "eval2", log), kUsage);
}
