#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "fibrehom/io.hpp"

namespace {

using fibrehom::io::ProblemKind;

struct Command {
  const char* name;
  const char* help;
  ProblemKind kind;
  bool properties;
};

constexpr Command kCommands[] = {
    {"ahom", "tabulate a^hom(theta) over the theta grid", ProblemKind::ahom_table, false},
    {"elliptic-sweep", "certify the elliptic resolvent and flux rates", ProblemKind::elliptic, false},
    {"maxwell-sweep", "certify the Maxwell resolvent rate and eps^hom equivalence", ProblemKind::maxwell, false},
    {"abstract-check", "certify random abstract families", ProblemKind::abstract, false},
    {"properties", "tensor bounds, route agreement, Lipschitz and classical-limit checks", ProblemKind::ahom_table,
     true},
};

void print_outcome(const fibrehom::io::RunOutcome& outcome, const std::filesystem::path& out) {
  std::printf("digest %s\n", outcome.digest.c_str());
  for (const auto& s : outcome.sweeps) {
    std::printf("%-18s rows %-5zu slope %-10.4g max err/bound %-10.4g %s\n", s.name.c_str(), s.rows.size(), s.slope,
                s.max_err_ratio(), s.all_pass() ? "PASS" : "FAIL");
    for (const auto& c : s.checks) {
      if (!c.pass) std::printf("  check %s failed (%.6g)\n", c.name.c_str(), c.value);
    }
  }
  for (const auto& r : outcome.reports) {
    std::printf("%-18s %-10.4g %s\n", r.name.c_str(), r.value, r.pass ? "PASS" : "FAIL");
  }
  std::printf("results in %s\n", out.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fibrewise homogenisation certification"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  for (const auto& cmd : kCommands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const Command* chosen = nullptr;
  for (const auto& cmd : kCommands) {
    if (app.got_subcommand(cmd.name)) chosen = &cmd;
  }
  try {
    auto cfg = fibrehom::io::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    fibrehom::io::RunOutcome outcome;
    if (chosen->properties) {
      outcome = fibrehom::io::run_properties(cfg);
    } else {
      if (cfg.kind != chosen->kind) {
        throw fibrehom::InputError(std::string("config declares problem '") + fibrehom::io::to_string(cfg.kind) +
                                   "' but subcommand " + chosen->name + " expects '" +
                                   fibrehom::io::to_string(chosen->kind) + "'");
      }
      outcome = fibrehom::io::run(cfg);
    }
    print_outcome(outcome, cfg.out_dir);
    return outcome.all_pass() ? 0 : 1;
  } catch (const fibrehom::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const fibrehom::HypothesisError& e) {
    std::fprintf(stderr, "hypothesis violated: %s (measured %.6g)\n", e.what(), e.measured());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
