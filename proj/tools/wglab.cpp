#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "wglab/cli.hpp"

namespace {

const std::pair<const char*, const char*> kFlags[] = {
    {"N", "target integer (X for moments)"},
    {"lo", "first N of a range"},
    {"hi", "last N of a range; m_max for sieve-check"},
    {"r", "bound on Omega(x), or the c_r index"},
    {"p", "prime modulus"},
    {"d", "divisor or squarefree modulus"},
    {"D", "sieve level"},
    {"z", "sifting limit"},
    {"cutoff", "Euler product cutoff"},
    {"method", "grid, mc (jint also: both)"},
    {"step", "grid step, e.g. 1/400"},
    {"samples", "Monte Carlo sample count"},
    {"seed", "random seed, recorded in every record"},
    {"mode", "unrestricted or paper-range"},
    {"format", "jsonl or csv"},
    {"out", "append records to this file"},
    {"kind", "moment equation: i, ii, iii, iv"},
    {"q", "denominator for residuals"},
    {"a", "numerator for residuals"},
    {"beta", "offset from a/q for residuals"}};

const std::pair<const char*, const char*> kCommands[] = {
    {"reps", "list representations of N"},
    {"verify-range", "existence of a representation for each even N in [lo, hi]"},
    {"local", "K, L, omega and the complete-sum identities at p"},
    {"sseries", "singular series with its direct-sum check"},
    {"omega", "sifting density at p or squarefree d"},
    {"crconst", "the constants c_r, 7 <= r <= 36"},
    {"sieve-check", "Rosser sandwich and the lower sieve sum"},
    {"margin", "log 2 minus the sum of c_r"},
    {"moments", "solution counts of the cube equations"},
    {"jint", "singular integral by grid and Monte Carlo"},
    {"arcs", "Farey dissection with exact measures"},
    {"residuals", "major-arc approximations at a/q + beta"}};

}  // namespace

int main(int argc, char** argv) {
  using namespace wglab::cli;

  CLI::App app{"Numerics for one square plus five prime cubes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::map<std::string, std::string> given;
  std::string param_file;
  std::vector<std::string> sets;
  bool paper_constants = false, no_timing = false;

  for (const auto& [name, help] : kFlags) {
    app.add_option_function<std::string>(
           std::string("--") + name, [&given, name](const std::string& v) { given[name] = v; }, help)
        ->type_name("VALUE");
  }
  app.add_flag("--paper-constants", paper_constants, "use the printed c_r bounds");
  app.add_flag("--no-timing", no_timing, "record ms as 0 so reruns are byte-identical");
  app.add_option("--params", param_file, "flat key=value parameter file");
  app.add_option("--set", sets, "scale parameter override KEY=VALUE (repeatable)");

  for (const auto& [name, help] : kCommands) app.add_subcommand(name, help)->fallthrough();

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

  try {
    std::map<std::string, std::string> kv;
    if (!param_file.empty()) kv = read_param_file(param_file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw wglab::ValidationError("--set expects KEY=VALUE");
      kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto& [k, v] : given) kv[k] = v;  // command line wins over the file
    if (paper_constants) kv["paper-constants"] = "true";
    if (no_timing) kv["no-timing"] = "true";

    const RunConfig config = make_config(app.get_subcommands().front()->get_name(), kv);
    std::ofstream file;
    if (!config.out.empty()) {
      file.open(config.out, std::ios::app);
      if (!file) throw wglab::ValidationError("cannot open " + config.out);
    }
    Writer writer(config.out.empty() ? std::cout : file, config.format);
    run(config, [&](const ResultEnvelope& e) { writer.write(e); });
  } catch (const std::exception& e) {
    std::cerr << "wglab: " << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
