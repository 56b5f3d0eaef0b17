// rwre command line: batch experiments over random walks in random
// environments, driven by one JSON config per run. Links the C API only.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "rwre.h"

namespace {

int print_last_error() {
  const char* err = rwre_last_error();
  std::fprintf(stderr, "%s\n", err ? err : "{\"code\":\"Internal\",\"message\":\"unknown\"}");
  return err && std::string(err).find("\"exit_code\":2") != std::string::npos ? 2 : 3;
}

int run_kind(const std::string& kind, const std::string& config_path, const std::string& out_dir,
             int threads, bool has_seed, uint64_t seed, bool quiet) {
  std::ifstream in(config_path);
  if (!in) {
    std::fprintf(stderr,
                 "{\"code\":\"ConfigInvalid\",\"module\":\"cli\",\"message\":\"cannot read %s\","
                 "\"context\":{\"exit_code\":2}}\n",
                 config_path.c_str());
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string config = buf.str();

  char* manifest = nullptr;
  const rwre_status st =
      rwre_run_experiment(config.c_str(), kind.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                          threads, has_seed ? &seed : nullptr, quiet ? 0 : 1, &manifest);
  if (st != RWRE_OK) return print_last_error();
  if (manifest) {
    std::printf("%s\n", manifest);
    rwre_string_free(manifest);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rwre: quenched exit solvers, annealed estimation and ballisticity diagnostics "
               "for random walks in random environments"};
  app.set_version_flag("--version", std::string(rwre_version()));
  app.require_subcommand(1);

  const char* kinds[] = {"exit-exact", "exit-mc",      "pm-check",    "decay-fit",
                         "renorm-verify", "renorm-ladder", "independence"};

  std::string config_path, out_dir, report_dir;
  int threads = 0;
  uint64_t seed = 0;
  bool quiet = false;

  for (const char* kind : kinds) {
    CLI::App* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment");
    sub->add_option("--config", config_path, "JSON config document")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker threads (overrides config)");
    sub->add_option("--seed", seed, "master seed (overrides config)");
    sub->add_flag("--quiet", quiet, "suppress streamed result rows");
  }
  CLI::App* report = app.add_subcommand("report", "emit the report bundle for a finished run");
  report->add_option("dir", report_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (report->parsed()) {
    char* out = nullptr;
    const rwre_status st = rwre_emit_report(report_dir.c_str(), &out);
    if (st != RWRE_OK) return print_last_error();
    if (out) {
      std::printf("%s\n", out);
      rwre_string_free(out);
    }
    return 0;
  }

  for (const char* kind : kinds) {
    CLI::App* sub = app.get_subcommand(kind);
    if (sub->parsed()) {
      const bool has_seed = sub->count("--seed") > 0;
      return run_kind(kind, config_path, out_dir, threads, has_seed, seed, quiet);
    }
  }
  return 2;
}
