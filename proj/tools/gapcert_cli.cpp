// Command-line front end over the C API.
//
//   gapcert certify   <config.json> [--out FILE] [--orbit-csv FILE]
//   gapcert cycle     <config.json> [--out FILE] [--orbit-csv FILE]
//   gapcert lipschitz <config.json> [--out FILE]
//   gapcert norms     <config.json> [--out FILE]
//   gapcert scan      <config.json> [--out FILE]
//
// Exit: 0 certified/complete, 2 refuted, 3 inconclusive, 1 usage or config error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "gapcert/gapcert.h"

namespace {

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

bool write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!text.empty() && text.back() != '\n' && text.back() != '\r') out << '\n';
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-gap limit cycle certification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gc_version()));

  std::string config_path, out_path, orbit_path;
  struct Sub {
    const char* name;
    const char* help;
    bool orbit;
  };
  const Sub subs[] = {
      {"certify", "Run the full hypothesis checklist; JSON verdict", true},
      {"cycle", "Locate the cycle; JSON cycle report", true},
      {"lipschitz", "Lipschitz estimate and gap test; JSON report", false},
      {"norms", "Per-point Jacobian norm table; CSV", false},
      {"scan", "Parameter-region scan; CSV", false},
  };
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_path, "Write the main output here instead of stdout");
    if (s.orbit) sub->add_option("--orbit-csv", orbit_path, "Write the sampled orbit as CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string config;
  if (!read_file(config_path, config)) {
    std::cerr << "gapcert: cannot read " << config_path << "\n";
    return 1;
  }

  gc_result* result = nullptr;
  const gc_status st = gc_run(command.c_str(), config.c_str(), &result);
  if (st != GC_OK) {
    std::cerr << "gapcert: " << gc_last_error() << "\n";
    return (st == GC_ERR_CONFIG || st == GC_ERR_INVALID_ARGUMENT) ? 1 : 3;
  }

  const std::string json = gc_result_json(result);
  const std::string csv = gc_result_csv(result);
  const int code = gc_result_exit_code(result);
  gc_result_free(result);

  const bool csv_main = command == "norms" || command == "scan";
  if (!write_text(out_path, csv_main ? csv : json)) {
    std::cerr << "gapcert: cannot write " << out_path << "\n";
    return 1;
  }
  if (!orbit_path.empty()) {
    if (csv.empty()) std::cerr << "gapcert: no orbit to write\n";
    else if (!write_text(orbit_path, csv)) {
      std::cerr << "gapcert: cannot write " << orbit_path << "\n";
      return 1;
    }
  }
  return code;
}
