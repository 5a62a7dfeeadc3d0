// Command-line runner for config-driven sampler experiments.
//
// Subcommands:
//   run <config.json> [--out DIR] [--threads N] [--format csv,json]
//   validate <config.json>
//   schema
//
// Exit codes: 0 ok, 1 invariant failure, 2 schema violation, 3 dimension cap,
// 4 numerical failure, 5 I/O failure. BOSELAB_THREADS overrides the thread
// count.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "boselab/experiment.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boselab: bosonic Gibbs sampler laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", formats = "csv,json";
  int threads = 1;
  if (const char* env = std::getenv("BOSELAB_THREADS")) threads = std::atoi(env);

  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads for sweeps");
  run->add_option("--format", formats, "comma-separated subset of csv,json");

  auto* validate = app.add_subcommand("validate", "validate a config against the schema");
  validate->add_option("config", config_path, "JSON config file")->required();

  auto* schema = app.add_subcommand("schema", "print the config schema");

  CLI11_PARSE(app, argc, argv);

  try {
    if (schema->parsed()) {
      std::cout << boselab::config_schema().dump(2) << "\n";
      return 0;
    }
    nlohmann::json cfg;
    try {
      cfg = load_config(config_path);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      return 2;
    }

    auto problems = boselab::validate_config(cfg);
    if (validate->parsed()) {
      if (problems.empty()) {
        std::cout << "config is valid\n";
        return 0;
      }
      for (const auto& p : problems) std::cerr << "invalid: " << p << "\n";
      return 2;
    }

    if (!problems.empty()) {
      for (const auto& p : problems) std::cerr << "invalid: " << p << "\n";
      return 2;
    }

    boselab::ExperimentReport rep = boselab::run_scenario(cfg, threads);
    if (cfg.contains("output") && cfg["output"].contains("dir") && out_dir == "out")
      out_dir = cfg["output"]["dir"].get<std::string>();
    bool csv = formats.find("csv") != std::string::npos;
    bool json_out = formats.find("json") != std::string::npos;
    boselab::emit_report(rep, out_dir, csv, json_out);

    int failures = 0;
    for (const auto& c : rep.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (value "
                << boselab::format_double(c.value) << ", threshold "
                << boselab::format_double(c.threshold) << ")\n";
      failures += c.pass ? 0 : 1;
    }
    std::cout << rep.scenario << ": " << rep.checks.size() - failures << "/" << rep.checks.size()
              << " checks passed, report in " << out_dir << "\n";
    return failures == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const boselab::DimensionCapError& e) {
    std::cerr << "dimension cap: " << e.what() << "\n";
    return 3;
  } catch (const boselab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
