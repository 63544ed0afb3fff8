// envdim: moment-based envelope dimension selection and fitting.
//
// Commands:
//   select    choose the envelope dimension by the 1D or FG criterion
//   fit       fit the envelope estimators at a fixed dimension
//   simulate  reproduce the Monte Carlo tables

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "commands.hpp"

namespace {

// Plain key=value config file; command-line flags take precedence. Keys use
// the long option names without the leading dashes.
void apply_config_file(const std::string& path, CLI::App* cmd,
                       envelope::cli::RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw envelope::InputError("cannot open config file: " + path);
  auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw envelope::InputError("config line " + std::to_string(line_no) +
                                 ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "family" && !given("--family")) config.family = value;
    else if (key == "criterion" && !given("--criterion")) config.criterion = value;
    else if (key == "C" && !given("--C")) config.constant_c = std::stod(value);
    else if (key == "kmax" && !given("--kmax")) config.kmax = std::stoi(value);
    else if (key == "dim" && !given("--dim")) config.dim = std::stoi(value);
    else if (key == "seed" && !given("--seed")) config.seed = std::stoull(value);
    else if (key == "replicates" && !given("--replicates")) config.replicates = std::stoi(value);
    else if (key == "table" && !given("--table")) config.table = value;
    else if (key == "input" && !given("--input")) config.input = value;
    else if (key == "output" && !given("--output")) config.output = value;
    else if (key == "format" && !given("--format")) config.format = value;
    else if (key == "split" && !given("--split")) config.split = std::stod(value);
    else if (key == "n" && !given("--n")) config.n_value = std::stoi(value);
    else if (key == "glm-weighting" && !given("--glm-weighting")) config.glm_weighting = value;
    else if (key == "threads" && !given("--threads")) config.threads = std::stoi(value);
    else if (key != "family" && key != "criterion" && key != "C" && key != "kmax" &&
             key != "dim" && key != "seed" && key != "replicates" && key != "table" &&
             key != "input" && key != "output" && key != "format" && key != "split" &&
             key != "n" && key != "glm-weighting" && key != "threads") {
      throw envelope::InputError("config line " + std::to_string(line_no) + ": unknown key '" +
                                 key + "'");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-based envelope estimation and dimension selection"};
  app.require_subcommand(1);

  envelope::cli::RunConfig config;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--output", config.output, "output path (default: stdout)");
    cmd->add_option("--format", config.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--config", config_path, "key=value config file; flags take precedence");
    return cmd;
  };
  auto add_data_options = [&](CLI::App* cmd) {
    cmd->add_option("--family", config.family, "response|predictor|partial|glm|cox|generic")
        ->check(CLI::IsMember({"response", "predictor", "partial", "glm", "cox", "generic"}));
    cmd->add_option("--input", config.input, "input CSV path");
    cmd->add_option("--n", config.n_value, "sample size (generic family only)");
    cmd->add_option("--glm-weighting", config.glm_weighting, "weighted|unweighted")
        ->check(CLI::IsMember({"weighted", "unweighted"}));
    cmd->add_option("--criterion", config.criterion, "1d|fg|both")
        ->check(CLI::IsMember({"1d", "fg", "both"}));
    cmd->add_option("--C", config.constant_c,
                    "penalty constant; use C = q for a p x q parameter matrix");
    cmd->add_option("--kmax", config.kmax, "largest dimension scored (default p)");
    return cmd;
  };

  CLI::App* select = add_data_options(add_common(app.add_subcommand(
      "select", "select the envelope dimension and fit at the selection")));
  (void)select;

  CLI::App* fit = add_data_options(
      add_common(app.add_subcommand("fit", "fit envelope estimators at a fixed dimension")));
  fit->add_option("--dim", config.dim, "envelope dimension to fit")->required();
  fit->add_option("--split", config.split, "held-out fraction for prediction error");

  CLI::App* simulate =
      add_common(app.add_subcommand("simulate", "reproduce a Monte Carlo table"));
  simulate->add_option("--table", config.table, "T2|T3|T4")
      ->check(CLI::IsMember({"T2", "T3", "T4"}))
      ->required();
  simulate->add_option("--replicates", config.replicates, "Monte Carlo replicates");
  simulate->add_option("--threads", config.threads, "worker threads (results are thread-count invariant)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  CLI::App* active = app.get_subcommands().front();
  config.command = active->get_name();
  if (!config_path.empty()) {
    try {
      apply_config_file(config_path, active, config);
    } catch (const envelope::InputError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: bad config value (" << e.what() << ")\n";
      return 1;
    }
  }
  return envelope::cli::dispatch(config);
}
