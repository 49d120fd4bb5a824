#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

#include <json.hpp>

#include "support.hpp"

using namespace testing_support;

namespace {

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(ICS_SCOPE_BIN) + " " + args + " 2>/dev/null";
  Run r{-1, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

int run_status_with_stderr(const std::string& args, std::string& err) {
  auto dir = fresh_dir("cli_stderr");
  std::string cmd = std::string(ICS_SCOPE_BIN) + " " + args + " >/dev/null 2>" + (dir / "err.txt").string();
  int st = std::system(cmd.c_str());
  err = slurp(dir / "err.txt");
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string scenario(const std::string& name) {
  return (std::filesystem::path(ICS_SCOPE_SCENARIOS) / (name + ".json")).string();
}

}  // namespace

TEST(Cli, Version) {
  auto r = run("version");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "ics-scope 0.1.0\n");
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("analyze").status, 2);
  EXPECT_EQ(run("analyze --config /nonexistent/config.json").status, 2);
}

TEST(Cli, GenAnalyzeRoundTrip) {
  auto dir = fresh_dir("cli_roundtrip");
  ASSERT_EQ(run("gen " + scenario("scanner-sweep") + " --out " + (dir / "corpus").string()).status, 0);
  ASSERT_EQ(run("analyze --config " + (dir / "corpus" / "config.json").string() + " --out " + (dir / "report").string())
                .status,
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "summary.json"));
  ASSERT_EQ(run("sanitize --config " + (dir / "corpus" / "config.json").string() + " --out " +
                (dir / "sanitize").string())
                .status,
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "sanitize" / "sanitize.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "sanitize" / "filters.csv"));
}

TEST(Cli, MissingHoneypotFileNamesPath) {
  auto dir = fresh_dir("cli_missing_hp");
  spit(dir / "hp.txt", "198.18.0.1\n");
  spit(dir / "config.json", R"({"honeypots_all": "hp.txt", "honeypots_ics": "lost_ics.txt"})");
  std::string err;
  EXPECT_EQ(run_status_with_stderr("analyze --config " + (dir / "config.json").string(), err), 2);
  EXPECT_NE(err.find("lost_ics.txt"), std::string::npos) << err;
}

TEST(Cli, MalformedSpecExitsTwo) {
  auto dir = fresh_dir("cli_bad_spec");
  spit(dir / "spec.json", R"({"start": "2018-01-01", "end": "2017-01-01", "flows": []})");
  EXPECT_EQ(run("gen " + (dir / "spec.json").string() + " --out " + (dir / "out").string()).status, 2);
  spit(dir / "syntax.json", "{\"start\":");
  EXPECT_EQ(run("gen " + (dir / "syntax.json").string() + " --out " + (dir / "out").string()).status, 2);
}

TEST(Cli, DissectGoldenModbus) {
  auto pcap = std::filesystem::path(ICS_SCOPE_DATA_DIR) / "golden" / "modbus.pcap";
  auto r = run("dissect " + pcap.string());
  ASSERT_EQ(r.status, 0);
  auto line = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(line["protocol"], "Modbus");
  EXPECT_EQ(line["function_code"], 3);
  EXPECT_EQ(line["verdict"], "WellFormed");
}

TEST(Cli, DissectArpOnlyIsEmpty) {
  auto dir = fresh_dir("cli_arp");
  std::string pcap;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) pcap.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  u32(0xA1B2C3D4);
  u32(0x00040002);
  u32(0);
  u32(0);
  u32(65535);
  u32(1);
  std::string arp(42, '\0');
  arp[12] = 0x08;
  arp[13] = 0x06;
  for (int i = 0; i < 3; ++i) {
    u32(i);
    u32(0);
    u32(42);
    u32(42);
    pcap += arp;
  }
  spit(dir / "arp.pcap", pcap);
  auto r = run("dissect " + (dir / "arp.pcap").string());
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "");
}

TEST(Cli, DissectUnreadableCaptureExitsTwo) {
  auto dir = fresh_dir("cli_bad_pcap");
  spit(dir / "bad.pcap", "not a capture at all");
  EXPECT_EQ(run("dissect " + (dir / "bad.pcap").string()).status, 2);
}

TEST(Cli, GoldenCorpus) {
  auto dir = fresh_dir("cli_golden");
  ASSERT_EQ(run("gen --golden --out " + dir.string()).status, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "s7comm.pcap"));
  auto committed = std::filesystem::path(ICS_SCOPE_DATA_DIR) / "golden";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    EXPECT_EQ(slurp(entry.path()), slurp(committed / entry.path().filename())) << entry.path().filename();
  }
}
