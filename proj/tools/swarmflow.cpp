// swarmflow command line: run | presets | audit | compare
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "swarmflow/errors.hpp"
#include "swarmflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace swarmflow;

namespace {

Config load_or_preset(const std::string& arg) {
  if (fs::exists(arg)) return load_config(arg);
  for (const auto& name : preset_names())
    if (name == arg) return preset(name);
  throw ConfigError("no such config file or preset: " + arg);
}

void apply_overrides(Config& c, const std::string& out_dir, int threads) {
  if (!out_dir.empty()) c.set("output.directory", out_dir);
  if (threads > 0) c.set("runtime.threads", threads);
  if (const char* env = std::getenv("SWARMFLOW_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n < 1) throw std::invalid_argument("non-positive");
      c.set("runtime.threads", n);
    } catch (const std::exception&) {
      throw ConfigError(std::string("SWARMFLOW_THREADS is not a positive integer: ") + env);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarmflow: Euler-alignment-interaction laboratory"};
  app.require_subcommand(1);

  std::string config_arg, out_dir, candidate_dir, show, write_dir;
  int threads = 0;

  auto* run_cmd = app.add_subcommand("run", "run a scenario config (or a preset by name)");
  run_cmd->add_option("config", config_arg, "config file or preset name")->required();
  run_cmd->add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
  run_cmd->add_option("-t,--threads", threads, "thread count (overrides runtime.threads)");

  auto* presets_cmd = app.add_subcommand("presets", "list the built-in presets");
  presets_cmd->add_option("--show", show, "print one preset config");
  presets_cmd->add_option("--write", write_dir, "write every preset as <name>.cfg into a directory");

  auto* audit_cmd = app.add_subcommand("audit", "audit a subsolution candidate directory");
  audit_cmd->add_option("candidate", candidate_dir, "candidate directory")->required()->check(CLI::ExistingDirectory);
  audit_cmd->add_option("-o,--out", out_dir, "write audit.csv and audit_report.txt here");

  auto* compare_cmd = app.add_subcommand("compare", "particle vs hydro mono-kinetic comparison");
  compare_cmd->add_option("config", config_arg, "config file or preset name")->required();
  compare_cmd->add_option("-t,--threads", threads, "thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      Config c = load_or_preset(config_arg);
      apply_overrides(c, out_dir, threads);
      const RunReport rep = run_scenario(scenario_from_config(c));
      write_run_report(std::cout, rep);
      return rep.exit_code();
    }
    if (*presets_cmd) {
      if (!show.empty()) {
        std::cout << serialize(preset(show));
        return 0;
      }
      if (!write_dir.empty()) fs::create_directories(write_dir);
      for (const auto& name : preset_names()) {
        const Config c = preset(name);
        std::cout << name << "  " << hex_hash(config_hash(c)) << "\n";
        if (!write_dir.empty()) {
          std::ofstream f(fs::path(write_dir) / (name + ".cfg"));
          f << serialize(c);
        }
      }
      return 0;
    }
    if (*audit_cmd) {
      const AuditReport rep = audit_candidate_dir(candidate_dir);
      write_audit_report(std::cout, rep);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream txt(fs::path(out_dir) / "audit_report.txt");
        write_audit_report(txt, rep);
        std::ofstream csv(fs::path(out_dir) / "audit.csv");
        write_audit_csv(csv, rep);
      }
      return rep.pass ? 0 : 2;
    }
    if (*compare_cmd) {
      Config c = load_or_preset(config_arg);
      apply_overrides(c, "", threads);
      const CompareReport rep = monokinetic_compare(c);
      write_compare_report(std::cout, rep);
      return rep.decreasing ? 0 : 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
