#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "icsscope/pipeline.hpp"
#include "icsscope/report.hpp"
#include "icsscope/templates.hpp"
#include "icsscope/trafficgen.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit code 2: configuration or usage problem.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("ics-scope");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ICS_SCOPE_LOG")) {
    auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string_view(env) != "off") {
      spdlog::warn("ICS_SCOPE_LOG: unknown level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

using namespace icsscope;

struct RunOptions {
  std::string config;
  std::string out;
  std::string filters;
  std::string vantage;
  std::vector<std::string> pcaps;
};

PipelineConfig prepare(const RunOptions& o) {
  auto config = PipelineConfig::load(o.config);
  if (!o.filters.empty()) {
    auto f = FilterSet::parse(o.filters);
    if (!f) throw UsageError("--filters: expected scanners, hp-ics, hp-all or all");
    config.filters = *f;
    config.filters_name = o.filters;
  }
  std::optional<std::string> vantage;
  if (!o.vantage.empty()) vantage = o.vantage;
  for (const auto& p : o.pcaps) config.captures.push_back({p, config.resolve_vantage(vantage)});
  for (const auto& c : config.captures) {
    if (!std::filesystem::is_regular_file(c.path)) throw ConfigError("capture not found: " + c.path.string());
  }
  if (!o.out.empty()) config.output = o.out;
  if (config.output.empty()) config.output = "report";
  return config;
}

int cmd_analyze(const RunOptions& o) {
  auto config = prepare(o);
  auto analysis = analyze(config);
  write_report(analysis, config, config.output);
  spdlog::info("report written to {}", config.output.string());
  return 0;
}

int cmd_sanitize(const RunOptions& o) {
  auto config = prepare(o);
  auto analysis = analyze(config);
  write_sanitize_report(analysis.sanitize, config.output);
  return 0;
}

int cmd_dissect(const std::string& pcap, const std::string& config_path, const std::string& out_path) {
  auto ports = PortRegistry::defaults();
  CaptureMeta meta;
  std::optional<OpcodeTable> opcodes;
  if (!config_path.empty()) {
    auto config = PipelineConfig::load(config_path);
    ports = config.ports;
    meta = config.vantages.at(config.resolve_vantage(std::nullopt));
    opcodes = config.opcodes;
  }
  std::unique_ptr<CaptureReader> reader;
  try {
    reader = std::make_unique<CaptureReader>(pcap, meta);
  } catch (const CaptureError& e) {
    throw UsageError(e.what());
  }
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw UsageError("cannot write " + out_path);
    out = &file;
  }
  std::size_t index = 0;
  while (auto record = reader->next()) {
    if (auto d = dissect(*record, ports)) *out << dissection_json(index, *d, opcodes ? &*opcodes : nullptr).dump() << '\n';
    ++index;
  }
  return 0;
}

int cmd_gen(const std::string& spec_path, const std::string& out, bool golden) {
  if (golden) {
    write_golden_corpus(out);
    return 0;
  }
  if (spec_path.empty()) throw UsageError("gen: a scenario file is required unless --golden is given");
  auto spec = ScenarioSpec::load(spec_path);
  write_corpus(generate(spec), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"ICS protocol traffic analysis for sampled, truncated captures"};
  app.require_subcommand(1);

  RunOptions run;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", run.config, "analysis configuration (JSON)")->required();
    sub->add_option("--out", run.out, "output directory");
    sub->add_option("--filters", run.filters, "scanners | hp-ics | hp-all | all");
    sub->add_option("--vantage", run.vantage, "vantage for captures given on the command line");
    sub->add_option("pcaps", run.pcaps, "additional capture files");
  };
  auto* analyze_cmd = app.add_subcommand("analyze", "run the full pipeline and write the report bundle");
  add_run_options(analyze_cmd);
  auto* sanitize_cmd = app.add_subcommand("sanitize", "write only the sanitization report");
  add_run_options(sanitize_cmd);

  std::string dissect_pcap, dissect_config, dissect_out;
  auto* dissect_cmd = app.add_subcommand("dissect", "print one JSON line per identified packet");
  dissect_cmd->add_option("pcap", dissect_pcap, "capture file")->required();
  dissect_cmd->add_option("--config", dissect_config, "use ports and snap length from this configuration");
  dissect_cmd->add_option("--out", dissect_out, "write to a file instead of stdout");

  std::string gen_spec, gen_out = "corpus";
  bool gen_golden = false;
  auto* gen_cmd = app.add_subcommand("gen", "generate a labeled synthetic corpus");
  gen_cmd->add_option("spec", gen_spec, "scenario file (JSON)");
  gen_cmd->add_option("--out", gen_out, "output directory");
  gen_cmd->add_flag("--golden", gen_golden, "write the per-protocol reference packets instead");

  auto* version_cmd = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(run);
    if (*sanitize_cmd) return cmd_sanitize(run);
    if (*dissect_cmd) return cmd_dissect(dissect_pcap, dissect_config, dissect_out);
    if (*gen_cmd) return cmd_gen(gen_spec, gen_out, gen_golden);
    if (*version_cmd) {
      std::cout << "ics-scope " << kVersion << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
