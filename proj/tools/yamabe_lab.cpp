// yamabe_lab: command-line front end for the experiment pipelines.
//
//   yamabe_lab <curvature|yamabe|flow|verify|spectrum|demo> [--config PATH] [--out DIR] [--jobs K]
//
// Output directory precedence: --out, then $YAMABE_LAB_OUT, then [output] dir.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure (including a
// verification that missed its tolerance). The last line printed is always a
// key=value status.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "yamabe/config.hpp"
#include "yamabe/experiment.hpp"

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int report_error(const std::string& command, const std::string& code, const std::string& reason, int exit_code) {
  std::cout << "status=error command=" << command << " code=" << code << " exit=" << exit_code
            << " reason=" << quoted(reason) << std::endl;
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Yamabe-constant laboratory: curvature, conformal solves, Ricci flow, identity checks"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_flag;
  int jobs = 1;

  const char* names[] = {"curvature", "yamabe", "flow", "verify", "spectrum", "demo"};
  const char* help[] = {"curvature fields and summary", "(sub)critical conformal solve",
                        "Ricci flow trajectory and evolution identities", "derivative identity along the flow",
                        "symmetric spectrum and non-degeneracy check", "run the identity scenarios and scoreboard"};
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(names[i], help[i]);
    if (std::string(names[i]) != "demo") sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_flag, "output directory");
    sub->add_option("--jobs", jobs, "parallel sweep entries")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return report_error("none", "Usage", e.what(), 2);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    yamabe::ExperimentConfig cfg;
    if (command != "demo") cfg = yamabe::load_config(config_path);
    yamabe::RunContext ctx;
    const char* env = std::getenv("YAMABE_LAB_OUT");
    ctx.out_dir = !out_flag.empty() ? out_flag : (env && *env ? env : (command == "demo" ? "out/demo" : cfg.out_dir));
    ctx.jobs = jobs;
    ctx.log = &std::cout;

    yamabe::RunOutcome outcome;
    if (command == "curvature") outcome = yamabe::cmd_curvature(cfg, ctx);
    else if (command == "yamabe") outcome = yamabe::cmd_yamabe(cfg, ctx);
    else if (command == "flow") outcome = yamabe::cmd_flow(cfg, ctx);
    else if (command == "verify") outcome = yamabe::cmd_verify(cfg, ctx);
    else if (command == "spectrum") outcome = yamabe::cmd_spectrum(cfg, ctx);
    else outcome = yamabe::cmd_demo(ctx, cfg.seed);

    std::cout << outcome.status << std::endl;
    return outcome.ok ? 0 : 3;
  } catch (const yamabe::Error& e) {
    return report_error(command, std::string(yamabe::to_string(e.code())), e.message(), e.is_numerical() ? 3 : 2);
  } catch (const std::exception& e) {
    return report_error(command, "Internal", e.what(), 3);
  }
}
