// mflab: batch runner for Floquet Majorana experiments.
//
//   mflab run <config.json>
//   mflab <experiment> [--flags mirroring config keys]
//   mflab circuit <kind> [...]
//
// Exit codes: 0 ok, 1 config or runtime error, 2 capacity error.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mflab/circuits.hpp"
#include "mflab/experiments.hpp"

namespace {

using nlohmann::json;

std::string dashed(std::string key) {
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  return key;
}

// Flag text to JSON: numbers, booleans and arrays parse as JSON, anything
// else (e.g. "pi/16") stays a string.
json flag_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const mflab::CapacityError& e) {
    std::cerr << "mflab: capacity error: " << e.what() << "\n";
    return 2;
  } catch (const mflab::ConfigError& e) {
    std::cerr << "mflab: config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mflab: error: " << e.what() << "\n";
    return 1;
  }
}

void report(const mflab::cli::ExperimentConfig& cfg, const mflab::cli::RunResult& res) {
  std::cout << mflab::cli::experiment_name(cfg.experiment) << " -> " << cfg.output_dir << "\n";
  for (const auto& [name, _] : res.files) std::cout << "  " << name << "\n";
  if (!res.summary.empty()) std::cout << res.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mflab: Floquet Majorana mode simulator and analysis runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mflab::cli::kVersion);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config file");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);

  // One subcommand per experiment; flags mirror the config keys.
  struct Flags {
    std::map<std::string, std::string> values;
    std::string n, z, xx, zz;
  };
  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [exp, name] : mflab::cli::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    auto& f = flags[name];
    sub->add_option("--n", f.n, "number of sites");
    sub->add_option("--z-angle", f.z, "z angle (radians or e.g. pi/8)");
    sub->add_option("--xx-angle", f.xx, "xx angle");
    sub->add_option("--zz-angle", f.zz, "zz angle");
    std::set<std::string> keys = mflab::cli::common_keys();
    keys.erase("experiment");
    keys.erase("spec");
    for (const auto& k : mflab::cli::extra_keys(exp)) keys.insert(k);
    for (const auto& k : keys) sub->add_option("--" + dashed(k), f.values[k], k);
    subs[name] = sub;
  }

  std::string circuit_kind = "evolution";
  std::string circuit_format = "json";
  std::string c_z = "0", c_xx = "0", c_zz = "0", c_alpha = "0", c_rep = "L";
  int c_n = 2, c_cycles = 1, c_index = 1;
  auto* circ = app.add_subcommand("circuit", "emit a compiled circuit");
  circ->add_option("kind", circuit_kind, "evolution | majorana | pair | braid")
      ->check(CLI::IsMember({"evolution", "majorana", "pair", "braid"}));
  circ->add_option("--n", c_n, "number of sites")->required();
  circ->add_option("--cycles", c_cycles, "Floquet cycles (evolution)");
  circ->add_option("--z-angle", c_z);
  circ->add_option("--xx-angle", c_xx);
  circ->add_option("--zz-angle", c_zz);
  circ->add_option("--index", c_index, "Majorana index or pair site k");
  circ->add_option("--rep", c_rep)->check(CLI::IsMember({"L", "R"}));
  circ->add_option("--alpha", c_alpha, "braid angle");
  circ->add_option("--format", circuit_format)->check(CLI::IsMember({"json", "qasm_like"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every usage error is a config error.
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (run->parsed()) {
    return guarded([&] {
      std::ifstream in(config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      const auto cfg = mflab::cli::parse_config(buf.str());
      report(cfg, mflab::cli::run(cfg));
    });
  }

  if (circ->parsed()) {
    return guarded([&] {
      using namespace mflab;
      const double z = parse_angle(c_z), xx = parse_angle(c_xx), zz = parse_angle(c_zz);
      circuits::Circuit c;
      if (circuit_kind == "evolution") {
        c = circuits::compile_evolution(ChainSpec::uniform(c_n, z, xx, zz), c_cycles);
      } else if (circuit_kind == "majorana") {
        c = circuits::compile_majorana_measurement({c_index, c_rep == "L" ? Rep::L : Rep::R}, c_n);
      } else if (circuit_kind == "pair") {
        c = circuits::compile_pair_measurement(c_index, c_n);
      } else {
        c = circuits::compile_braid_unitary(parse_angle(c_alpha), c_n);
      }
      std::cout << circuits::emit(c, circuits::parse_format(circuit_format));
      if (circuit_format == "json") std::cout << "\n";
    });
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    return guarded([&] {
      const auto& f = flags.at(name);
      json j{{"experiment", name}};
      if (!f.n.empty()) {
        json spec{{"n", flag_value(f.n)}};
        if (!f.z.empty()) spec["z_angle"] = flag_value(f.z);
        if (!f.xx.empty()) spec["xx_angle"] = flag_value(f.xx);
        if (!f.zz.empty()) spec["zz_angle"] = flag_value(f.zz);
        j["spec"] = spec;
      } else if (!f.z.empty() || !f.xx.empty() || !f.zz.empty()) {
        throw mflab::ConfigError("angle flags need --n");
      }
      for (const auto& [key, value] : f.values) {
        if (!value.empty()) j[key] = flag_value(value);
      }
      const auto cfg = mflab::cli::config_from_json(j);
      report(cfg, mflab::cli::run(cfg));
    });
  }
  return 0;
}
