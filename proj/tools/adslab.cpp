#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>

#include "adslab/experiments.hpp"

namespace {

using Command = adslab::RunReport (*)(const adslab::RunContext&);

const std::map<std::string, Command> kCommands{
    {"qs", adslab::cmd_qs},     {"hull", adslab::cmd_hull},         {"glue", adslab::cmd_glue},
    {"solve", adslab::cmd_solve}, {"pipeline", adslab::cmd_pipeline},
};

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) adslab::fail(adslab::ErrorKind::kInvalidInput, "cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    adslab::fail(adslab::ErrorKind::kInvalidInput, "config '" + path + "': " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on anti-de Sitter 3-space, quasicircles and gluing maps"};
  std::string command, config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<long> samples, grid;
  app.add_option("command", command, "qs | hull | glue | solve | pipeline")
      ->required()
      ->check(CLI::IsMember({"qs", "hull", "glue", "solve", "pipeline"}));
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out, "directory for the report and data files");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--tol", tol, "tolerance override");
  app.add_option("--samples", samples, "sample count override");
  app.add_option("--grid", grid, "solver grid override");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  nlohmann::ordered_json config_echo;
  try {
    adslab::RunContext ctx;
    ctx.config = load_config(config_path);
    if (!ctx.config.is_object()) adslab::fail(adslab::ErrorKind::kInvalidInput, "config must be a JSON object");
    if (seed) ctx.config["seed"] = *seed;
    if (tol) ctx.config["tol"] = *tol;
    if (samples) ctx.config["samples"] = *samples;
    if (grid) ctx.config["grid"] = *grid;
    if (!out.empty()) ctx.out = out;
    config_echo = nlohmann::ordered_json::parse(ctx.config.dump());

    const adslab::RunReport report = kCommands.at(command)(ctx);
    const std::string text = report.to_json(config_echo).dump(2) + "\n";
    if (ctx.out) {
      std::filesystem::create_directories(*ctx.out);
      std::ofstream(*ctx.out / "report.json") << text;
    }
    std::cout << text;
    std::size_t failed = 0;
    for (const auto& c : report.checks()) failed += c.pass ? 0 : 1;
    std::cerr << command << ": " << report.checks().size() - failed << "/" << report.checks().size()
              << " checks passed";
    if (report.error()) std::cerr << "; " << report.error()->message;
    std::cerr << "\n";
    return report.exit_code();
  } catch (const adslab::Error& e) {
    std::cerr << "adslab: " << e.what() << "\n";
    return adslab::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "adslab: internal error: " << e.what() << "\n";
    return 1;
  }
}
