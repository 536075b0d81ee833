#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "transonic/driver.hpp"

namespace {

void print_summary(const transonic::RunReport& rep) {
  std::printf("mode %s\n", transonic::run_mode_name(rep.config.mode).c_str());
  std::printf("shock radius %.17e\n", rep.r_s);
  std::printf("background exit pressure %.17e\n", rep.p_c);
  std::printf("stages:\n");
  for (const auto& s : rep.stages) {
    std::printf("  %-12s residual %.17e  work %lld  time %.17e s\n",
                s.name.c_str(), s.residual, s.work, s.seconds);
  }
  std::printf("invariants:\n");
  for (const auto& iv : rep.invariants) {
    std::printf("  [%s] %-24s value %.17e  bound %.17e\n",
                iv.pass ? "pass" : "FAIL", iv.name.c_str(), iv.value, iv.bound);
  }
  const int failed = rep.failed_invariants();
  if (failed == 0) {
    std::printf("all %zu invariants pass\n", rep.invariants.size());
  } else {
    std::printf("%d invariant(s) failed\n", failed);
  }
}

bool parse_grid(const std::string& s, int& nr, int& nt) {
  const std::size_t x = s.find('x');
  if (x == std::string::npos || x == 0 || x + 1 == s.size()) return false;
  try {
    std::size_t a = 0;
    std::size_t b = 0;
    const int r = std::stoi(s.substr(0, x), &a);
    const int t = std::stoi(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1) return false;
    nr = r;
    nt = t;
  } catch (...) {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transonic shock pipeline in a diverging nozzle sector"};
  std::string config_path;
  std::string out_dir = ".";
  std::string grid_spec;
  int modes = 0;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "configuration file (.toml or .json)");
  app.add_option("--out", out_dir, "output directory for plot data");
  auto* grid_opt = app.add_option("--grid", grid_spec, "solver grid as NRxNT, e.g. 193x49");
  auto* modes_opt = app.add_option("--modes", modes, "cosine mode cutoff");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized invariants");
  app.add_flag("--quiet", quiet, "suppress the console summary");
  app.require_subcommand(0, 1);
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"background", "radial transonic background at the configured shock radius"},
      {"locate-shock", "find the shock radius matching the exit pressure target"},
      {"solve", "recover the exit flux datum for an exit pressure target"},
      {"sweep", "amplitude sweep of the perturbed forward problem"},
      {"check", "run the full invariant suite"},
      {"demo-isentropic", "contrast the isentropic family with the shocked one"},
  };
  for (const auto& [name, desc] : subs) app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    transonic::RunConfig cfg;
    if (!config_path.empty()) cfg = transonic::load_config(config_path);
    const auto chosen = app.get_subcommands();
    if (chosen.empty() && config_path.empty()) {
      std::fputs(app.help().c_str(), stdout);
      return 0;
    }
    if (!chosen.empty()) cfg.mode = transonic::parse_run_mode(chosen.front()->get_name());
    if (grid_opt->count() > 0 && !parse_grid(grid_spec, cfg.nr, cfg.nt))
      throw transonic::ParseError("--grid expects NRxNT, got '" + grid_spec + "'");
    if (modes_opt->count() > 0) cfg.n_modes = modes;
    if (seed_opt->count() > 0) cfg.seed = seed;
    cfg.out_dir = out_dir;
    transonic::validate_config(cfg);
    const transonic::RunReport rep = transonic::run(cfg);
    if (!quiet) print_summary(rep);
    if (rep.exit_code() != 0)
      std::fprintf(stderr, "error: %d invariant(s) failed\n", rep.failed_invariants());
    return rep.exit_code();
  } catch (const transonic::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return transonic::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 70;
  }
}
