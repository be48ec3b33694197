#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "genb/commands.hpp"
#include "support/test_support.hpp"

using namespace genb;
using genb::testing::run_cli;
using genb::testing::TempDir;

namespace {

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Two-frame fixture shared by the tests in this file.
const fs::path& fixture_root() {
  static TempDir dir;
  static bool made = false;
  if (!made) {
    const auto r = run_cli("make-fixture " + q(dir / "data") + " --frames 2");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    made = true;
  }
  static const fs::path root = dir / "data";
  return root;
}

}  // namespace

TEST(Cli, UsageAndHelp) {
  EXPECT_EQ(run_cli("").exit_code, cli::kExitUsage);
  EXPECT_EQ(run_cli("frobnicate").exit_code, cli::kExitUsage);
  const auto help = run_cli("--help");
  EXPECT_EQ(help.exit_code, 0);
  EXPECT_NE(help.out.find("generate"), std::string::npos);
  EXPECT_EQ(run_cli("generate a b --mock --workers 0").exit_code, cli::kExitUsage);
}

TEST(Cli, Presets) {
  const auto r = run_cli("presets");
  EXPECT_EQ(r.exit_code, 0);
  std::string expect = "none\n";
  for (const auto& p : ablation_presets()) expect += p + "\n";
  EXPECT_EQ(r.out, expect);
}

TEST(Cli, ValidateReportsFramesAndErrors) {
  const auto ok = run_cli("validate " + q(fixture_root()));
  ASSERT_EQ(ok.exit_code, 0) << ok.out << ok.err;
  const auto report = nlohmann::json::parse(ok.out);
  EXPECT_EQ(report.at("frames"), 2);
  EXPECT_EQ(report.at("persons"), 3);
  EXPECT_TRUE(report.at("errors").empty());

  TempDir broken;
  fs::copy(fixture_root(), broken.path(), fs::copy_options::recursive);
  fs::remove(broken / "frame_0001/seg.png");
  const auto bad = run_cli("validate " + q(broken.path()));
  EXPECT_EQ(bad.exit_code, cli::kExitFailure);
  const auto errors = nlohmann::json::parse(bad.out).at("errors");
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].at("code"), "MissingAsset");

  EXPECT_EQ(run_cli("validate " + q(broken / "nowhere")).exit_code, cli::kExitFailure);
}

TEST(Cli, GenerateWithMock) {
  TempDir out;
  const auto r = run_cli("generate " + q(fixture_root()) + " " + q(out / "gen") +
                         " --mock --workers 2 --dump-conditions --seed 3");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary.at("frames"), 2);
  EXPECT_EQ(summary.at("done"), 2);
  const auto events = json_lines(r.err);
  ASSERT_EQ(events.size(), 2u);
  for (const auto& e : events) EXPECT_EQ(e.at("event"), "frame");

  for (const char* f : {"frame_0000", "frame_0001"}) {
    EXPECT_TRUE(fs::exists(out / "gen" / f / "gen_rgb.png"));
    const GenerationProvenance p = read_provenance(out / "gen" / f);
    EXPECT_EQ(p.global_seed, 3u);
    EXPECT_EQ(p.backend, "mock/1");
  }
  EXPECT_EQ(read_provenance(out / "gen/frame_0000").skipped.size(), 1u);
  for (const char* name : {"depth.png", "normals.png", "edges.png", "pose.png", "mask.png"}) {
    EXPECT_TRUE(fs::exists(out / "gen/frame_0001/cond/1/head" / name)) << name;
  }
  const auto manifest = nlohmann::json::parse(genb::testing::slurp(out / "gen/run_manifest.json"));
  EXPECT_EQ(manifest.at("frames").size(), 2u);
  EXPECT_EQ(manifest.at("config").at("global_seed"), 3);

  const auto again = run_cli("generate " + q(fixture_root()) + " " + q(out / "gen") +
                             " --mock --seed 3 --resume");
  ASSERT_EQ(again.exit_code, 0) << again.err;
  EXPECT_EQ(nlohmann::json::parse(again.out).at("skipped"), 2);
}

TEST(Cli, GenerateFrameGlobAndPreset) {
  TempDir out;
  const auto r = run_cli("generate " + q(fixture_root()) + " " + q(out.path()) +
                         " --mock --frames 'frame_0001' --preset noise-0.7");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_FALSE(fs::exists(out / "frame_0000"));
  const GenerationProvenance p = read_provenance(out / "frame_0001");
  EXPECT_EQ(p.preset, "noise-0.7");
  for (const auto& part : p.parts) EXPECT_EQ(part.steps_run, 28);

  EXPECT_EQ(run_cli("generate " + q(fixture_root()) + " " + q(out / "x") + " --mock --frames 'zzz*'")
                .exit_code,
            cli::kExitFailure);
}

TEST(Cli, GenerateUsageErrors) {
  TempDir out;
  const std::string base = "generate " + q(fixture_root()) + " " + q(out / "o");
  EXPECT_EQ(run_cli(base + " --mock --preset fancy").exit_code, cli::kExitUsage);
  std::ofstream(out / "cfg.json") << R"({"strengths": {"feet": 2.0}})";
  EXPECT_EQ(run_cli(base + " --mock --config " + q(out / "cfg.json")).exit_code, cli::kExitUsage);
  std::ofstream(out / "cfg.json") << R"({"strengths": {"hands": 0.5}})";
  EXPECT_EQ(run_cli(base + " --mock --config " + q(out / "cfg.json")).exit_code, cli::kExitUsage);
  std::ofstream(out / "cfg.json") << R"({"controls": {"segmentation": 1}})";
  EXPECT_EQ(run_cli(base + " --mock --config " + q(out / "cfg.json")).exit_code, cli::kExitUsage);
  const auto no_backend = run_cli(base, "env -u GENB_BACKEND_URL");
  EXPECT_EQ(no_backend.exit_code, cli::kExitUsage);
  EXPECT_EQ(json_lines(no_backend.err).at(0).at("code"), "InvalidConfig");
  EXPECT_FALSE(fs::exists(out / "o"));
}

TEST(Cli, FidBetweenTrees) {
  TempDir out;
  const auto r = run_cli("fid " + q(fixture_root()) + " " + q(fixture_root()) + " --mock --crop-size 64 --out " +
                         q(out / "fid.json") + " --cache-dir " + q(out / "cache"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("n_a"), 3);
  EXPECT_LE(j.at("fid").get<double>(), 1e-6);
  EXPECT_EQ(nlohmann::json::parse(genb::testing::slurp(out / "fid.json")), j);
  EXPECT_FALSE(fs::is_empty(out / "cache"));
  EXPECT_EQ(run_cli("fid " + q(fixture_root()) + " " + q(out / "none") + " --mock").exit_code,
            cli::kExitFailure);
  EXPECT_EQ(run_cli("fid a b --mock --image sideways").exit_code, cli::kExitUsage);
}

TEST(Cli, ContactSheet) {
  TempDir out;
  const auto r = run_cli("contact-sheet " + q(fixture_root()) + " " + q(fixture_root()) + " " +
                         q(out / "sheet.png") + " --cell-width 160");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ImageU8 sheet = read_png(out / "sheet.png");
  EXPECT_EQ(sheet.width(), 2 * 160 + 12);
  EXPECT_EQ(sheet.height(), 4 + 2 * (120 + 4));

  TempDir partial;
  fs::copy(fixture_root() / "frame_0000", partial / "frame_0000", fs::copy_options::recursive);
  EXPECT_EQ(run_cli("contact-sheet " + q(fixture_root()) + " " + q(partial.path()) + " " + q(out / "s2.png"))
                .exit_code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli("contact-sheet " + q(fixture_root()) + " " + q(partial.path()) + " " +
                    q(out / "s3.png") + " --frames frame_0000")
                .exit_code,
            0);
  EXPECT_EQ(run_cli("contact-sheet " + q(fixture_root()) + " " + q(out.path()) + " " + q(out / "s4.png"))
                .exit_code,
            cli::kExitFailure);
}

TEST(Cli, GlobMatching) {
  EXPECT_TRUE(cli::matches_glob("", "anything"));
  EXPECT_TRUE(cli::matches_glob("frame_00[0-4]?", "frame_0031"));
  EXPECT_FALSE(cli::matches_glob("frame_00[0-4]?", "frame_0051"));
  EXPECT_TRUE(cli::matches_glob("*_0001", "frame_0001"));
}

TEST(Cli, ServeMockSpeaksWireProtocol) {
  const int port = 20000 + static_cast<int>(::getpid() % 20000);
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    const std::string p = std::to_string(port);
    ::execl(GENB_CLI_PATH, GENB_CLI_PATH, "serve-mock", "--port", p.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  RemoteOptions opt;
  opt.max_retries = 0;
  RemoteBackend remote("http://127.0.0.1:" + std::to_string(port), opt);
  bool up = false;
  for (int i = 0; i < 100 && !up; ++i) {
    up = remote.healthy();
    if (!up) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  EXPECT_TRUE(up);
  if (up) {
    EXPECT_EQ(remote.info().name, "mock");
    EXPECT_EQ(remote.schedule(40).id, "mock-40");
  }
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
}
