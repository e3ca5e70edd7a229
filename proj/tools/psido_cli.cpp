// psido: command-line driver. Exit codes: 0 all gates pass, 1 a gate or certificate failed,
// 2 configuration or usage error, 3 numerical precondition error (spectrum, branch cut, gate on inputs).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "psido/acceptance.hpp"
#include "psido/commands.hpp"
#include "psido/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::string function;
  std::optional<std::uint64_t> seed;
  std::string which = "heat";
};

psido::RunConfig resolve(const Flags& f) {
  psido::RunConfig cfg = f.config.empty() ? psido::RunConfig{} : psido::load_config(f.config);
  if (!f.out.empty()) cfg.output.directory = f.out;
  if (!f.format.empty()) cfg.output.formats = psido::detail::split_list(f.format);
  if (!f.function.empty()) cfg.function = f.function;
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();
  return cfg;
}

void print_gates(const psido::RunReport& rep) {
  const auto& j = rep.json();
  if (!j.contains("gates")) return;
  for (const auto& g : j["gates"]) {
    std::cout << (g["pass"].get<bool>() ? "PASS " : "FAIL ") << g["name"].get<std::string>();
    if (g.contains("error")) std::cout << ": " << g["error"].get<std::string>();
    else if (g.contains("bound"))
      std::cout << ": " << g["value"].dump() << " " << g["relation"].get<std::string>() << " " << g["bound"].dump();
    else std::cout << ": " << g["value"].dump() << " " << g["relation"].get<std::string>();
    std::cout << "\n";
  }
}

int finish(const psido::RunReport& rep, const psido::RunConfig& cfg) {
  rep.write(cfg.output.directory, cfg.output.wants("csv"), cfg.output.wants("json"));
  print_gates(rep);
  std::cout << (rep.ok() ? "ok" : "FAILED") << " (" << cfg.output.directory << ")\n";
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holomorphic functional calculus for pseudo-differential operators on the torus"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "INI or JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--format", flags.format, "comma-separated subset of csv,json");
    sub->add_option("--f", flags.function, "function TAG:params, e.g. power:z=-0.5, exp:t=1, log");
    sub->add_option("--seed", flags.seed, "seed for randomized checks");
  };
  auto* check = app.add_subcommand("check-symbol", "seminorm and parameter-ellipticity certificates");
  auto* sweep = app.add_subcommand("resolvent-sweep", "parametrix residual decay and minimal growth");
  auto* funcalc = app.add_subcommand("funcalc", "f(A) by contour quadrature against the spectral oracle");
  auto* traces = app.add_subcommand("traces", "log-determinant, heat trace or zeta value");
  auto* all = app.add_subcommand("all", "run the acceptance suite");
  for (auto* s : {check, sweep, funcalc, traces, all}) add_common(s);
  traces->add_option("--which", flags.which, "szego, heat or zeta")->check(CLI::IsMember({"szego", "heat", "zeta"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const psido::RunConfig cfg = resolve(flags);
    if (*check) return finish(psido::cmd_check_symbol(cfg), cfg);
    if (*sweep) return finish(psido::cmd_resolvent_sweep(cfg), cfg);
    if (*funcalc) return finish(psido::cmd_funcalc(cfg), cfg);
    if (*traces) return finish(psido::cmd_traces(cfg, flags.which), cfg);
    const auto results = psido::acceptance::run_all();
    for (const auto& r : results) std::cout << psido::acceptance::format_line(r) << "\n";
    psido::RunReport rep = psido::acceptance::to_report(results);
    rep.json()["seed"] = cfg.seed;
    rep.write(cfg.output.directory, false, cfg.output.wants("json"));
    return rep.ok() ? 0 : 1;
  } catch (const psido::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const psido::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
