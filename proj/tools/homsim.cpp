// homsim: reproduces the heralded NOON / superposition-operation figures as
// tidy CSV or JSON tables and runs configured parameter sweeps.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "homsim/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string out;
  std::string format;
  int cutoff = 0;
  int workers = 0;
};

void apply(homsim::ExperimentConfig& c, const Overrides& o) {
  if (!o.out.empty()) c.out = o.out;
  if (!o.format.empty()) c.format = o.format;
  if (o.cutoff > 0) c.cutoff = o.cutoff;
  if (o.workers > 0) c.workers = o.workers;
}

int execute(const homsim::ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = homsim::run_sweep(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (c.out.empty()) {
    homsim::write_result(std::cout, result, c.format);
  } else {
    const auto dir = std::filesystem::path(c.out).parent_path();
    std::error_code ec;
    if (!dir.empty()) std::filesystem::create_directories(dir, ec);
    std::ofstream os(c.out, std::ios::binary);
    if (!os) throw homsim::ConfigError(homsim::ConfigError::Kind::range, "output.path", 0, "cannot write '" + c.out + "'");
    homsim::write_result(os, result, c.format);
    std::ofstream ms(c.out + ".manifest.json", std::ios::binary);
    ms << homsim::manifest(c, result, wall).dump(2) << '\n';
  }
  if (result.any_flagged()) {
    std::cerr << "homsim: some rows are flagged (see status column)\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded second-order superposition operations in truncated Fock space"};
  app.require_subcommand(1);
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", ov.out, "output file (default: stdout)");
    sub->add_option("--format", ov.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--cutoff", ov.cutoff, "signal-mode Fock cutoff")->check(CLI::Range(2, 40));
    sub->add_option("--workers", ov.workers, "concurrent sweep points")->check(CLI::Range(1, 256));
  };

  std::string figure_id;
  auto* figure = app.add_subcommand("figure", "reproduce a figure at its pinned defaults");
  figure->add_option("id", figure_id, "fig4a fig4b fig5a fig5b fig6a fig6b noon")
      ->required()
      ->check(CLI::IsMember({"fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "noon"}));
  add_common(figure);

  std::string sweep_path;
  auto* sweep = app.add_subcommand("sweep", "run the grid described by a config file");
  sweep->add_option("--config", sweep_path, "YAML config")->required();
  add_common(sweep);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", validate_path, "YAML config")->required();

  int noon_n = 4;
  bool physical = false;
  double noon_s = 0.05, noon_eta = -1.0;
  auto* noon = app.add_subcommand("noon", "NOON cascade for one N");
  noon->add_option("--n", noon_n, "even photon number")->required()->check(CLI::Range(2, 20));
  noon->add_flag("--physical", physical, "use the heralded scheme per stage");
  noon->add_option("--s", noon_s, "squeezing strength (physical)")->check(CLI::Range(0.0, 0.8));
  noon->add_option("--eta", noon_eta, "on-off detector efficiency (physical; omit for exact herald)")->check(CLI::Range(0.0, 1.0));
  add_common(noon);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate) {
      const auto report = homsim::validate_config(validate_path);
      (report.ok ? std::cout : std::cerr) << report.message << '\n';
      return report.ok ? kExitOk : kExitConfig;
    }
    homsim::ExperimentConfig c;
    if (*figure) {
      c = homsim::default_config(figure_id);
    } else if (*sweep) {
      c = homsim::load_config(sweep_path);
    } else {
      c = homsim::default_config("noon");
      if (noon_n % 2 != 0) throw homsim::ConfigError(homsim::ConfigError::Kind::range, "--n", 0, "N must be even");
      c.n = {noon_n};
      c.physical = physical;
      c.s = {noon_s};
      c.eta = noon_eta >= 0.0 ? std::vector<double>{noon_eta} : std::vector<double>{};
    }
    apply(c, ov);
    return execute(c);
  } catch (const homsim::ConfigError& e) {
    std::cerr << "homsim: " << e.what() << '\n';
    return kExitConfig;
  } catch (const homsim::Error& e) {
    std::cerr << "homsim: " << homsim::to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == homsim::ErrorKind::grid_too_large || e.kind() == homsim::ErrorKind::config_invalid ? kExitConfig
                                                                                                           : kExitNumerical;
  }
}
