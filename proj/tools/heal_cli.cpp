#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "heal/heal.h"
#include "json.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CString {
  char* p = nullptr;
  ~CString() { heal_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int exit_code(heal_status s) {
  switch (s) {
    case HEAL_OK: return kExitOk;
    case HEAL_ERR_INVALID_ARGUMENT:
    case HEAL_ERR_RANGE: return kExitUsage;
    case HEAL_ERR_NUMERICAL: return kExitNumerical;
    default: return kExitOther;
  }
}

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"spectrum", "Eigenvalues of the node or edge Laplacian"},
    {"cheeger", "Cheeger constant and spectral bounds"},
    {"diffuse", "Heat diffusion trace, optionally with boundary conditions"},
    {"transfer", "Label transfer on synthetic topologies"},
    {"heterophily", "Accuracy across CSBM heterophily levels"},
    {"depth", "Accuracy and Dirichlet energy against depth"},
    {"ablation", "Accuracy with exchanger components switched off"},
    {"generate", "Write a synthetic hypergraph and its sidecar"},
};

// Flag spellings that differ from the config key.
const std::map<std::string, std::string> kAliases = {{"model", "models"}};

json typed_value(const json& like, const std::string& key, const std::string& raw) {
  try {
    std::size_t used = 0;
    if (like.is_number_integer()) {
      const long long v = std::stoll(raw, &used);
      if (used == raw.size()) return v;
    } else if (like.is_number()) {
      const double v = std::stod(raw, &used);
      if (used == raw.size()) return v;
    } else if (like.is_boolean()) {
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
    } else {
      return raw;
    }
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError("--" + key, "invalid value '" + raw + "'");
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

struct Command {
  CLI::App* app = nullptr;
  json defaults;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  std::string output;
  std::string summary;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypergraph diffusion analyses and experiments"};
  app.set_version_flag("--version", std::string(heal_version()));
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  for (const auto& [name, help] : kCommands) {
    auto cmd = std::make_unique<Command>();
    CString defaults;
    if (heal_command_defaults(name.c_str(), &defaults.p) != HEAL_OK) {
      std::cerr << "error: " << heal_last_error() << "\n";
      return kExitOther;
    }
    cmd->defaults = json::parse(defaults.str());
    cmd->app = app.add_subcommand(name, help);
    cmd->app->add_option("--config", cmd->config_path, "JSON config file; flags take precedence");
    cmd->app->add_option("-o,--output", cmd->output, "Output file (default stdout)");
    cmd->app->add_option("--summary", cmd->summary, "Summary JSON file (default <output>.json, else stderr)");
    for (const auto& [key, value] : cmd->defaults.items()) {
      if (key == "command") continue;
      std::string flags = "--" + key;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key) flags += ",--" + dashed;
      for (const auto& [alias, target] : kAliases)
        if (target == key) flags += ",--" + alias;
      if (key == "input") flags = "input," + flags;
      cmd->options[key] = cmd->app->add_option(flags, cmd->values[key], "default " + value.dump());
    }
    commands.push_back(std::move(cmd));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  for (auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    const std::string name = cmd->app->get_name();
    json cfg = json::object();
    if (!cmd->config_path.empty()) {
      std::ifstream f(cmd->config_path);
      if (!f) {
        std::cerr << "error: cannot open config file '" << cmd->config_path << "'\n";
        return kExitOther;
      }
      try {
        cfg = json::parse(f);
      } catch (const json::exception& e) {
        std::cerr << "error: config file is not valid JSON: " << e.what() << "\n";
        return kExitUsage;
      }
      if (!cfg.is_object()) {
        std::cerr << "error: config file must hold a JSON object\n";
        return kExitUsage;
      }
    }
    try {
      for (const auto& [key, raw] : cmd->values) {
        if (cmd->options[key]->count() == 0) continue;
        cfg[key] = typed_value(cmd->defaults[key], key, raw);
      }
    } catch (const CLI::ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    if (!cmd->output.empty()) cfg["output"] = cmd->output;

    CString text, summary;
    const heal_status st = heal_run_command(name.c_str(), cfg.dump().c_str(), &text.p, &summary.p);
    if (st != HEAL_OK) {
      std::cerr << "error: " << heal_last_error() << "\n";
      return exit_code(st);
    }
    if (cmd->output.empty()) {
      std::cout << text.str();
    } else if (!write_text(cmd->output, text.str())) {
      std::cerr << "error: cannot write '" << cmd->output << "'\n";
      return kExitOther;
    }
    const std::string s = summary.str();
    if (!s.empty()) {
      const std::string path = !cmd->summary.empty() ? cmd->summary
                               : !cmd->output.empty() ? cmd->output + ".json"
                                                      : std::string();
      if (path.empty()) {
        std::cerr << s << (s.back() == '\n' ? "" : "\n");
      } else if (!write_text(path, s.back() == '\n' ? s : s + "\n")) {
        std::cerr << "error: cannot write '" << path << "'\n";
        return kExitOther;
      }
    }
  }
  return kExitOk;
}
