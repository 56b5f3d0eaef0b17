#include "doctest.h"

#include <filesystem>

#include "experiment.hpp"
#include "report.hpp"

using namespace rwre;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_law() {
  return {{"d", 2},
          {"kappa", 0.1},
          {"kind", "deterministic_drift"},
          {"params", {{"epsilon", 0.0}}},
          {"seed", 7}};
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("rwre_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("pm-check run: verdict file says fail for the symmetric law") {
  const fs::path dir = fresh_dir("pm");
  nlohmann::json config = {{"kind", "pm-check"},
                           {"law", base_law()},
                           {"geometry", {{"direction", {1.0, 0.0}}, {"L", 20.0}}},
                           {"M", 2.0},
                           {"sampling", {{"n_env", 1}, {"n_walk", 0}}},
                           {"seed", 5}};
  RunManifest manifest = run_experiment(config, dir.string());
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "results.csv"));
  const nlohmann::json verdict = nlohmann::json::parse(read_text_file(dir / "verdict.json"));
  CHECK(verdict.at("verdict") == "fail");
  CHECK(manifest.files.count("verdict.json") == 1);
  CHECK(manifest.files.count("results.csv") == 1);

  // every emitted file is listed with its checksum
  for (const auto& [name, hash] : manifest.files) {
    CHECK(hash == sha256_file(dir / name));
  }
}

TEST_CASE("identical configs produce identical data files") {
  nlohmann::json config = {{"kind", "exit-exact"},
                           {"law", base_law()},
                           {"geometry",
                            {{"direction", {1.0, 0.0}},
                             {"domain", "box"},
                             {"L", 4.0},
                             {"L_tilde", 6.0},
                             {"event", "not_positive"}}},
                           {"sampling", {{"n_env", 3}}},
                           {"seed", 11}};
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  RunManifest ma = run_experiment(config, a.string(), 1);
  RunManifest mb = run_experiment(config, b.string(), 8);
  CHECK(ma.config_hash == mb.config_hash);
  REQUIRE(ma.files.size() == mb.files.size());
  for (const auto& [name, hash] : ma.files) {
    INFO(name);
    CHECK(mb.files.at(name) == hash);
  }
}

TEST_CASE("renorm-ladder config with a short base scale names the rule") {
  nlohmann::json config = {{"kind", "renorm-ladder"},
                           {"law", base_law()},
                           {"ladder", {{"L0", 4.0}, {"Ltilde0", 30.0}, {"nu", 2.0}, {"k_max", 3}}},
                           {"constants", {{"d", 2}, {"kappa", 0.1}}}};
  const fs::path dir = fresh_dir("ladder_bad");
  try {
    run_experiment(config, dir.string());
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    CHECK(std::string(e.what()).find("scalesk0") != std::string::npos);
    CHECK(error_exit_code(e) == 2);
  }
}

TEST_CASE("renorm-ladder run emits the ladder and recursion trace") {
  nlohmann::json config = {{"kind", "renorm-ladder"},
                           {"law", base_law()},
                           {"ladder", {{"L0", 7.0}, {"Ltilde0", 49.0}, {"nu", 8.0}, {"k_max", 3}}},
                           {"constants", {{"d", 2}, {"kappa", 0.1}, {"beta", 0.8}}},
                           {"recursion", {{"k_max", 6}}},
                           {"seed_rhs", {{"E_q0", 1e-4}}}};
  const fs::path dir = fresh_dir("ladder_ok");
  run_experiment(config, dir.string());
  const nlohmann::json out = nlohmann::json::parse(read_text_file(dir / "ladder.json"));
  CHECK(out.at("ladder").at("lengths").size() == 4);
  CHECK(out.at("ladder").at("seed_step_ok") == true);  // nu = 8: 512 >= 384
  CHECK(out.at("recursion").contains("c8"));
  CHECK(out.at("seed_rhs").contains("total"));
}

TEST_CASE("unknown kind and missing law are config errors") {
  CHECK_THROWS_AS(run_experiment({{"kind", "nope"}, {"law", base_law()}}), Error);
  try {
    run_experiment({{"kind", "pm-check"}});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
  }
}

TEST_CASE("decay-fit run emits table, fit and plots") {
  nlohmann::json law = base_law();
  law["params"]["epsilon"] = 0.05;
  nlohmann::json config = {{"kind", "decay-fit"},
                           {"law", law},
                           {"geometry", {{"direction", {1.0, 0.0}}}},
                           {"scales", {6.0, 8.0, 10.0}},
                           {"gammas", {0.5, 1.0}},
                           {"sampling", {{"n_env", 1}}},
                           {"seed", 3}};
  const fs::path dir = fresh_dir("decay");
  RunManifest manifest = run_experiment(config, dir.string());
  CHECK(manifest.files.count("decay.csv"));
  CHECK(manifest.files.count("fit.json"));
  CHECK(manifest.files.count("decay_L.svg"));
  CHECK(manifest.files.count("decay_Lgamma.svg"));
  const std::string csv = read_text_file(dir / "decay.csv");
  CHECK(csv.rfind("L,estimate,ci_lo,ci_hi", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 scales
  const std::string svg = read_text_file(dir / "decay_L.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  const nlohmann::json fit = nlohmann::json::parse(read_text_file(dir / "fit.json"));
  CHECK(fit.at("best_gamma") == 1.0);

  // report bundle over the finished run
  const nlohmann::json rep = emit_report(dir.string());
  CHECK(fs::exists(dir / "report.md"));
  const std::string md = read_text_file(dir / "report.md");
  CHECK(md.find("Decay fit") != std::string::npos);
}

TEST_CASE("report bundle without a manifest is rejected") {
  const fs::path dir = fresh_dir("noreport");
  fs::create_directories(dir);
  CHECK_THROWS_WITH_AS(emit_report(dir.string()), doctest::Contains("MissingManifest"), Error);
}

TEST_CASE("streamed rows carry the declared header") {
  nlohmann::json config = {{"kind", "exit-exact"},
                           {"law", base_law()},
                           {"geometry",
                            {{"direction", {1.0, 0.0}},
                             {"domain", "box"},
                             {"L", 3.0},
                             {"L_tilde", 4.0}}},
                           {"sampling", {{"n_env", 1}}}};
  const fs::path dir = fresh_dir("stream");
  std::ostringstream stream;
  run_experiment(config, dir.string(), 1, nullptr, &stream);
  CHECK(stream.str().rfind(kStreamHeader, 0) == 0);
  CHECK(stream.str().find("box_failure") != std::string::npos);
  // persisted results carry the same row minus the wall time
  const std::string results = read_text_file(dir / "results.csv");
  CHECK(results.find("wall_time") == std::string::npos);
  CHECK(results.find("box_failure") != std::string::npos);
}

TEST_CASE("seed override becomes part of the effective config") {
  nlohmann::json config = {{"kind", "exit-exact"},
                           {"law", base_law()},
                           {"geometry",
                            {{"direction", {1.0, 0.0}},
                             {"domain", "box"},
                             {"L", 3.0},
                             {"L_tilde", 4.0}}},
                           {"sampling", {{"n_env", 1}}},
                           {"seed", 1}};
  const fs::path a = fresh_dir("seed_a");
  const fs::path b = fresh_dir("seed_b");
  const uint64_t seed = 42;
  RunManifest ma = run_experiment(config, a.string(), 1, &seed);
  RunManifest mb = run_experiment(config, b.string(), 1);
  CHECK(ma.config_hash != mb.config_hash);
  const nlohmann::json ca = nlohmann::json::parse(read_text_file(a / "config.json"));
  CHECK(ca.at("seed") == 42);
}

namespace {

// minimal XML tag-balance scan; the emitted SVG uses no attribute quoting
// tricks, so matching raw angle brackets is enough
bool svg_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const size_t end = text.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;  // self-closed
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("emitted SVG plots are well-formed") {
  nlohmann::json law = base_law();
  law["params"]["epsilon"] = 0.05;
  nlohmann::json config = {{"kind", "decay-fit"},
                           {"law", law},
                           {"geometry", {{"direction", {1.0, 0.0}}}},
                           {"scales", {5.0, 6.0, 7.0}},
                           {"gammas", {1.0}},
                           {"sampling", {{"n_env", 1}}},
                           {"seed", 3}};
  const fs::path dir = fresh_dir("svg");
  run_experiment(config, dir.string());
  CHECK(svg_well_formed(read_text_file(dir / "decay_L.svg")));
  CHECK(svg_well_formed(read_text_file(dir / "decay_Lgamma.svg")));
}

TEST_CASE("exit-exact can dump the assembled system in MatrixMarket form") {
  nlohmann::json config = {{"kind", "exit-exact"},
                           {"law", base_law()},
                           {"geometry",
                            {{"direction", {1.0, 0.0}},
                             {"domain", "box"},
                             {"L", 3.0},
                             {"L_tilde", 3.0}}},
                           {"sampling", {{"n_env", 1}}},
                           {"dump_system", true},
                           {"seed", 2}};
  const fs::path dir = fresh_dir("mtx");
  RunManifest manifest = run_experiment(config, dir.string());
  CHECK(manifest.files.count("system.mtx"));
  CHECK(manifest.files.count("system_rhs.mtx"));
  const std::string mtx = read_text_file(dir / "system.mtx");
  CHECK(mtx.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
}
