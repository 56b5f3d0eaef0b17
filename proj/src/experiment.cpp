#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "ballisticity.hpp"
#include "solver.hpp"
#include "renorm.hpp"
#include "report.hpp"
#include "rng.hpp"

namespace rwre {

namespace fs = std::filesystem;

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files_json = nlohmann::json::object();
  for (const auto& [name, hash] : files) files_json[name] = hash;
  return {{"config_sha256", config_hash}, {"tool_version", tool_version},
          {"started_utc", started_utc},   {"ended_utc", ended_utc},
          {"out_dir", out_dir},           {"files", files_json}};
}

nlohmann::json error_to_json(const Error& e) {
  std::string message = e.what();
  const std::string prefix = std::string(error_kind_name(e.kind())) + ": ";
  if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
  return {{"code", error_kind_name(e.kind())},
          {"module", e.module_name()},
          {"message", message},
          {"context", {{"exit_code", error_exit_code(e)}}}};
}

int error_exit_code(const Error& e) { return e.kind() == ErrorKind::ConfigInvalid ? 2 : 3; }

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Error config_error(const std::string& field, const std::string& reason) {
  return Error(ErrorKind::ConfigInvalid, field + ": " + reason, "cli");
}

Eigen::VectorXd parse_direction(const nlohmann::json& g) {
  if (!g.contains("direction")) throw config_error("geometry.direction", "missing");
  std::vector<double> v = g.at("direction").get<std::vector<double>>();
  Eigen::VectorXd dir(v.size());
  for (size_t i = 0; i < v.size(); ++i) dir[i] = v[i];
  const double norm = dir.norm();
  if (norm <= 0) throw config_error("geometry.direction", "zero vector");
  if (std::abs(norm - 1.0) > 1e-9) {
    throw config_error("geometry.direction", "must be a unit vector within 1e-9");
  }
  return dir;
}

struct RunContext {
  nlohmann::json config;  // effective, canonical
  std::string kind;
  EnvironmentLaw law;
  uint64_t seed = 0;
  int threads = 1;
  fs::path dir;
  std::string experiment_id;
  std::ostream* stream = nullptr;
  std::chrono::steady_clock::time_point t0;
  CsvWriter results{std::vector<std::string>{"experiment_id", "estimand", "mode", "n_env", "n_walk",
                                             "estimate", "ci_lo", "ci_hi", "seed"}};

  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  bool header_streamed = false;

  void result_row(const std::string& estimand, const EstimateCI& ci) {
    const std::string mode = estimate_mode_name(ci.mode);
    results.add_row({experiment_id, estimand, mode, std::to_string(ci.n_env),
                     std::to_string(ci.n_walk), format_double(ci.estimate), format_double(ci.lo),
                     format_double(ci.hi), std::to_string(seed)});
    if (stream) {
      if (!header_streamed) {
        *stream << kStreamHeader << '\n';
        header_streamed = true;
      }
      *stream << experiment_id << ',' << estimand << ',' << mode << ',' << ci.n_env << ','
              << ci.n_walk << ',' << format_double(ci.estimate) << ',' << format_double(ci.lo)
              << ',' << format_double(ci.hi) << ',' << seed << ','
              << format_double(elapsed_s()) << '\n';
      stream->flush();
    }
  }
};

EstimateOptions sampling_options(const RunContext& ctx, const nlohmann::json& sampling) {
  EstimateOptions opt;
  opt.confidence = sampling.value("confidence", 0.95);
  if (!(opt.confidence > 0) || !(opt.confidence < 1)) {
    throw config_error("sampling.confidence", "must lie in (0,1)");
  }
  const std::string method = sampling.value("ci_method", "wilson");
  if (method == "wilson") {
    opt.method = CiMethod::Wilson;
  } else if (method == "clopper-pearson") {
    opt.method = CiMethod::ClopperPearson;
  } else {
    throw config_error("sampling.ci_method", "must be wilson or clopper-pearson");
  }
  opt.threads = ctx.threads;
  return opt;
}

LevelGeometry parse_level_geometry(const nlohmann::json& g, const EnvironmentLaw& law) {
  LevelGeometry geo;
  Eigen::VectorXd dir = parse_direction(g);
  if (dir.size() != law.d) throw config_error("geometry.direction", "dimension mismatch with law.d");
  geo.rotation = build_rotation(dir);
  geo.spacing = g.value("L0", 5.0);
  geo.lateral_bound = g.value("L_tilde1", 40.0);
  geo.beta = g.value("beta", 0.8);
  if (!(geo.spacing > 0)) throw config_error("geometry.L0", "must be positive");
  if (!(geo.lateral_bound > 0)) throw config_error("geometry.L_tilde1", "must be positive");
  if (!(geo.beta > 0.5) || !(geo.beta < 1)) throw config_error("geometry.beta", "must lie in (1/2,1)");
  return geo;
}

void run_exit(RunContext& ctx, bool monte_carlo) {
  const nlohmann::json g = ctx.config.value("geometry", nlohmann::json::object());
  const nlohmann::json sampling = ctx.config.value("sampling", nlohmann::json::object());
  EventSpec event;
  event.direction = parse_direction(g);
  if (event.direction.size() != ctx.law.d) {
    throw config_error("geometry.direction", "dimension mismatch with law.d");
  }
  const std::string domain = g.value("domain", "box");
  if (domain == "box") {
    event.domain = EventSpec::Domain::Box;
    event.half_width = g.value("L_tilde", 0.0);
    if (!(event.half_width > 0)) throw config_error("geometry.L_tilde", "box needs L_tilde > 0");
  } else if (domain == "slab") {
    event.domain = EventSpec::Domain::Slab;
  } else {
    throw config_error("geometry.domain", "must be box or slab");
  }
  event.half_length = g.value("L", 0.0);
  if (!(event.half_length > 0)) throw config_error("geometry.L", "must be positive");
  const std::string ev = g.value("event", domain == "box" ? "not_positive" : "negative");
  if (ev == "negative") {
    event.success = EventSpec::Success::Negative;
  } else if (ev == "not_positive") {
    event.success = EventSpec::Success::NotPositive;
  } else {
    throw config_error("geometry.event", "must be negative or not_positive");
  }

  const int64_t n_env = sampling.value("n_env", int64_t{1});
  const int64_t n_walk = monte_carlo ? sampling.value("n_walk", int64_t{1000}) : 0;
  if (n_env < 1) throw config_error("sampling.n_env", "must be >= 1");
  if (monte_carlo && n_walk < 1) throw config_error("sampling.n_walk", "must be >= 1");
  EstimateOptions opt = sampling_options(ctx, sampling);

  const std::string estimand =
      std::string(domain == "box" ? "box" : "slab") + "_" +
      (event.success == EventSpec::Success::Negative ? "back_exit" : "failure");

  EstimateCI ci = estimate_probability(ctx.law, event, n_env, n_walk, ctx.seed, opt);
  ctx.result_row(estimand, ci);

  if (!monte_carlo) {
    CsvWriter per_env({"replica", "value"});
    std::vector<double> values(n_env, 0.0);
    parallel_for(n_env, ctx.threads, [&](int64_t r) {
      Environment env(ctx.law, rng::derive(ctx.seed, rng::kTagReplica, static_cast<uint64_t>(r)));
      values[r] = exact_event_probability(env, event, opt);
    });
    for (int64_t r = 0; r < n_env; ++r) {
      per_env.add_row({std::to_string(r), format_double(values[r])});
    }
    write_text_file(ctx.dir / "per_env.csv", per_env.str());
  }

  // optional dump of the first replica's assembled linear system for external
  // verification (box domains; slabs have no single assembled system)
  if (ctx.config.value("dump_system", false) && event.domain == EventSpec::Domain::Box) {
    Environment env(ctx.law, rng::derive(ctx.seed, rng::kTagReplica, uint64_t{0}));
    BoxTriple box{build_rotation(event.direction), event.half_length, event.half_width};
    std::ostringstream matrix, rhs;
    dump_matrix_market(problem_from_box(env, box), matrix, &rhs);
    write_text_file(ctx.dir / "system.mtx", matrix.str());
    write_text_file(ctx.dir / "system_rhs.mtx", rhs.str());
  }
}

void run_pm_check(RunContext& ctx) {
  const nlohmann::json g = ctx.config.value("geometry", nlohmann::json::object());
  const nlohmann::json sampling = ctx.config.value("sampling", nlohmann::json::object());
  const double m = ctx.config.value("M", 0.0);
  if (!(m > 0)) throw config_error("M", "must be positive");
  const double L = g.value("L", 0.0);
  if (!(L >= 1)) throw config_error("geometry.L", "must be >= 1");
  Eigen::VectorXd dir = parse_direction(g);
  const int64_t n_env = sampling.value("n_env", int64_t{1});
  const int64_t n_walk = sampling.value("n_walk", int64_t{0});
  EstimateOptions opt = sampling_options(ctx, sampling);

  ConditionVerdict v =
      polynomial_condition_check(ctx.law, dir, m, L, n_env, n_walk, ctx.seed, opt);
  ctx.result_row("slab_back_exit", v.estimate);
  write_text_file(ctx.dir / "verdict.json", v.to_json().dump(2) + "\n");
}

void run_decay_fit(RunContext& ctx) {
  const nlohmann::json g = ctx.config.value("geometry", nlohmann::json::object());
  const nlohmann::json sampling = ctx.config.value("sampling", nlohmann::json::object());
  Eigen::VectorXd dir = parse_direction(g);
  std::vector<double> scales = ctx.config.value("scales", std::vector<double>{});
  std::vector<double> gammas =
      ctx.config.value("gammas", std::vector<double>{0.25, 0.5, 0.75, 1.0});
  if (scales.size() < 3) throw config_error("scales", "need at least 3 strictly increasing scales");
  const int64_t n_env = sampling.value("n_env", int64_t{1});
  const int64_t n_walk = sampling.value("n_walk", int64_t{0});
  const double residual_threshold = ctx.config.value("residual_threshold", 0.25);
  EstimateOptions opt = sampling_options(ctx, sampling);

  DecayFit fit =
      decay_fit(ctx.law, dir, scales, gammas, n_env, n_walk, ctx.seed, opt, residual_threshold);

  CsvWriter decay({"L", "estimate", "ci_lo", "ci_hi"});
  std::vector<double> y, ylo, yhi, xg;
  for (size_t i = 0; i < scales.size(); ++i) {
    const EstimateCI& ci = fit.estimates[i];
    decay.add_row({format_double(scales[i]), format_double(ci.estimate), format_double(ci.lo),
                   format_double(ci.hi)});
    ctx.result_row("slab_back_exit_L" + format_double(scales[i]), ci);
    y.push_back(-std::log(std::max(ci.estimate, 1e-300)));
    // whiskers transform with -log: upper probability end is the lower curve end
    ylo.push_back(-std::log(std::max(ci.hi, 1e-300)));
    yhi.push_back(-std::log(std::max(ci.lo, 1e-300)));
  }
  write_text_file(ctx.dir / "decay.csv", decay.str());

  nlohmann::json fits = nlohmann::json::array();
  double rate_gamma1 = 0, rate_best = 0;
  for (const GammaFit& f : fit.fits) {
    fits.push_back({{"gamma", f.gamma}, {"rate", f.rate}, {"residual", f.residual}});
    if (f.gamma == 1.0) rate_gamma1 = f.rate;
    if (f.gamma == fit.best_gamma) rate_best = f.rate;
  }
  nlohmann::json fj = {{"fits", fits},
                       {"best_gamma", fit.best_gamma},
                       {"exponential_rate", fit.exponential_rate},
                       {"t_condition_pass", fit.t_condition_pass},
                       {"residual_threshold", fit.residual_threshold},
                       {"empirical_only", true}};
  write_text_file(ctx.dir / "fit.json", fj.dump(2) + "\n");

  write_text_file(ctx.dir / "decay_L.svg",
                  decay_plot_svg("decay against L", "L", scales, y, ylo, yhi, rate_gamma1));
  for (double L : scales) xg.push_back(std::pow(L, fit.best_gamma));
  write_text_file(ctx.dir / "decay_Lgamma.svg",
                  decay_plot_svg("decay against L^gamma (gamma = " + format_double(fit.best_gamma) +
                                     ")",
                                 "L^gamma", xg, y, ylo, yhi, rate_best));
}

void run_independence(RunContext& ctx) {
  const nlohmann::json g = ctx.config.value("geometry", nlohmann::json::object());
  const nlohmann::json sampling = ctx.config.value("sampling", nlohmann::json::object());
  LevelGeometry geo = parse_level_geometry(g, ctx.law);
  const nlohmann::json levels = ctx.config.value("levels", nlohmann::json::object());
  const int64_t lo = levels.value("lo", int64_t{-2});
  const int64_t hi = levels.value("hi", int64_t{2});
  const int64_t n_env = sampling.value("n_env", int64_t{100});
  EstimateOptions opt = sampling_options(ctx, sampling);

  IndependenceReport rep = independence_diagnostic(ctx.law, geo, lo, hi, n_env, ctx.seed, opt);

  CsvWriter corr({"level_a", "level_b", "r", "flagged"});
  int flagged = 0;
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairCorrelation& pc : rep.pairs) {
    corr.add_row({std::to_string(pc.level_a), std::to_string(pc.level_b), format_double(pc.r),
                  pc.flagged ? "1" : "0"});
    pairs.push_back({{"level_a", pc.level_a},
                     {"level_b", pc.level_b},
                     {"r", pc.r},
                     {"flagged", pc.flagged}});
    flagged += pc.flagged ? 1 : 0;
  }
  write_text_file(ctx.dir / "correlations.csv", corr.str());

  CsvWriter values({"level", "replica", "value"});
  for (size_t k = 0; k < rep.levels.size(); ++k) {
    for (int64_t r = 0; r < rep.n_env; ++r) {
      values.add_row({std::to_string(rep.levels[k]), std::to_string(r),
                      format_double(rep.values[k][r])});
    }
  }
  write_text_file(ctx.dir / "values.csv", values.str());

  nlohmann::json rj = {{"n_env", rep.n_env},
                       {"flag_threshold", rep.flag_threshold},
                       {"pairs", pairs},
                       {"flagged_pairs", flagged}};
  write_text_file(ctx.dir / "independence.json", rj.dump(2) + "\n");

  EstimateCI summary;
  summary.mode = EstimateMode::Exact;
  summary.n_env = rep.n_env;
  double max_abs = 0;
  for (const PairCorrelation& pc : rep.pairs) max_abs = std::max(max_abs, std::abs(pc.r));
  summary.estimate = max_abs;
  summary.lo = 0;
  summary.hi = rep.flag_threshold;
  ctx.result_row("max_abs_pairwise_r", summary);
}

void run_renorm_ladder(RunContext& ctx) {
  const nlohmann::json lj = ctx.config.value("ladder", nlohmann::json::object());
  ConstantsConfig constants =
      ConstantsConfig::from_json(ctx.config.value("constants", nlohmann::json::object()));
  const double L0 = lj.value("L0", 0.0);
  const double Lt0 = lj.value("Ltilde0", 0.0);
  const double nu = lj.value("nu", 0.0);
  const int k_max = lj.value("k_max", 0);
  ScaleLadder ladder = [&] {
    try {
      return build_ladder(L0, Lt0, nu, k_max, constants.d);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConstraintViolation) {
        throw Error(ErrorKind::ConfigInvalid, std::string("ladder: ") + e.what(), "cli");
      }
      throw;
    }
  }();

  nlohmann::json out = {{"ladder", ladder.to_json()}, {"constants", constants.to_json()}};

  const nlohmann::json rj = ctx.config.value("recursion", nlohmann::json::object());
  const int rec_k = rj.value("k_max", 16);
  const double d0 = rj.contains("d0") ? rj.at("d0").get<double>()
                                      : d0_from_constants(constants, L0);
  RecursionTrace trace = dk_sequence(constants, d0, nu, L0, rec_k);
  out["recursion"] = trace.to_json();

  if (ctx.config.contains("seed_rhs")) {
    const nlohmann::json sj = ctx.config.at("seed_rhs");
    const double e_q0 = sj.value("E_q0", 0.0);
    SeedStep step;
    step.base_length = L0;
    step.base_width = Lt0;
    step.next_length = ladder.lengths.size() > 1 ? ladder.lengths[1] : L0 * nu;
    step.next_width = ladder.widths.size() > 1 ? ladder.widths[1] : Lt0 * std::pow(nu, 3);
    step.n = ladder.step_n;
    step.n_tilde = ladder.step_n_tilde;
    out["seed_rhs"] = seed_rhs_eval(constants, step, e_q0).to_json();
  }
  write_text_file(ctx.dir / "ladder.json", out.dump(2) + "\n");
}

void run_renorm_verify(RunContext& ctx) {
  const nlohmann::json g = ctx.config.value("geometry", nlohmann::json::object());
  const nlohmann::json sampling = ctx.config.value("sampling", nlohmann::json::object());
  LevelGeometry geo = parse_level_geometry(g, ctx.law);
  const int n = ctx.config.value("N", 3);
  if (n < 2) throw config_error("N", "must be >= 2");
  const int64_t n_env = sampling.value("n_env", int64_t{10});
  if (n_env < 1) throw config_error("sampling.n_env", "must be >= 1");
  ConstantsConfig constants =
      ConstantsConfig::from_json(ctx.config.value("constants", nlohmann::json::object()));
  constants.kappa = ctx.law.kappa;
  constants.d = ctx.law.d;
  constants.beta = geo.beta;
  VerifyOptions vopt;

  std::vector<VerifyRecord> records(n_env);
  parallel_for(n_env, ctx.threads, [&](int64_t r) {
    Environment env(ctx.law, rng::derive(ctx.seed, rng::kTagReplica, static_cast<uint64_t>(r)));
    records[r] = verify_quenched_chain(env, geo, n, constants, vopt);
  });

  nlohmann::json arr = nlohmann::json::array();
  CsvWriter csv({"replica", "seed", "in_T", "quenine_ok", "quenine_violation", "quenine_margin",
                 "eqcom_ok", "excursion_ok", "potential_ok"});
  int64_t in_t = 0, quenine_ok = 0, quenine_violation = 0, eqcom_ok = 0, potential_ok = 0;
  for (int64_t r = 0; r < n_env; ++r) {
    const VerifyRecord& rec = records[r];
    arr.push_back(rec.to_json());
    const bool pot_ok = !rec.potential_step_worst.violation_certain;
    csv.add_row({std::to_string(r), std::to_string(rec.env_seed), rec.in_typical_event ? "1" : "0",
                 rec.quenched_bound.ok_certain ? "1" : "0",
                 rec.quenched_bound.violation_certain ? "1" : "0",
                 format_double(rec.quenched_bound.margin), rec.decouple_ok() ? "1" : "0",
                 rec.excursion_ok() ? "1" : "0", pot_ok ? "1" : "0"});
    in_t += rec.in_typical_event;
    quenine_ok += rec.quenched_bound.ok_certain;
    quenine_violation += rec.quenched_bound.violation_certain;
    eqcom_ok += rec.decouple_ok();
    potential_ok += pot_ok;
  }
  nlohmann::json out = {{"records", arr},
                        {"summary",
                         {{"n_env", n_env},
                          {"in_T", in_t},
                          {"quenine_ok", quenine_ok},
                          {"quenine_violations", quenine_violation},
                          {"eqcom_ok", eqcom_ok},
                          {"potential_ok", potential_ok}}},
                        {"constants", constants.to_json()}};
  write_text_file(ctx.dir / "verify.json", out.dump(2) + "\n");
  write_text_file(ctx.dir / "verify.csv", csv.str());

  EstimateCI summary;
  summary.mode = EstimateMode::Exact;
  summary.n_env = n_env;
  summary.estimate = static_cast<double>(quenine_violation) / static_cast<double>(n_env);
  summary.lo = summary.estimate;
  summary.hi = summary.estimate;
  ctx.result_row("quenine_certain_violation_rate", summary);
}

}  // namespace

RunManifest run_experiment(const nlohmann::json& config, const std::string& out_dir_override,
                           int threads_override, const uint64_t* seed_override,
                           std::ostream* stream) {
  RunContext ctx;
  ctx.t0 = std::chrono::steady_clock::now();
  ctx.stream = stream;
  if (!config.is_object()) throw config_error("config", "must be a JSON object");
  ctx.config = config;
  if (!ctx.config.contains("kind")) throw config_error("kind", "missing");
  ctx.kind = ctx.config.at("kind").get<std::string>();
  if (!ctx.config.contains("law")) throw config_error("law", "missing");
  ctx.law = EnvironmentLaw::from_json(ctx.config.at("law"));
  if (seed_override) ctx.config["seed"] = *seed_override;
  ctx.seed = ctx.config.value("seed", ctx.law.seed);
  ctx.config["seed"] = ctx.seed;
  if (threads_override > 0) ctx.config["threads"] = threads_override;
  ctx.threads = ctx.config.value("threads", 1);
  if (ctx.threads < 1) throw config_error("threads", "must be >= 1");
  if (!out_dir_override.empty()) ctx.config["out_dir"] = out_dir_override;

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.started_utc = utc_now();

  // the hash covers the effective config; out_dir does not change the data
  nlohmann::json hashed = ctx.config;
  hashed.erase("out_dir");
  hashed.erase("threads");
  manifest.config_hash = sha256_hex(canonical_json(hashed));
  ctx.experiment_id = ctx.kind + "-" + manifest.config_hash.substr(0, 8);

  std::string out_dir = ctx.config.value("out_dir", "run-" + manifest.config_hash.substr(0, 8));
  ctx.dir = fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec) throw Error(ErrorKind::Internal, "cannot create " + ctx.dir.string(), "cli");
  manifest.out_dir = ctx.dir.string();

  if (ctx.kind == "exit-exact") {
    run_exit(ctx, false);
  } else if (ctx.kind == "exit-mc") {
    run_exit(ctx, true);
  } else if (ctx.kind == "pm-check") {
    run_pm_check(ctx);
  } else if (ctx.kind == "decay-fit") {
    run_decay_fit(ctx);
  } else if (ctx.kind == "independence") {
    run_independence(ctx);
  } else if (ctx.kind == "renorm-ladder") {
    run_renorm_ladder(ctx);
  } else if (ctx.kind == "renorm-verify") {
    run_renorm_verify(ctx);
  } else {
    throw config_error("kind", "unknown experiment kind '" + ctx.kind + "'");
  }

  write_text_file(ctx.dir / "results.csv", ctx.results.str());
  // the persisted config is the effective one minus placement/scheduling
  // fields, so reruns at any thread count stay byte-identical
  write_text_file(ctx.dir / "config.json", canonical_json(hashed) + "\n");

  manifest.ended_utc = utc_now();
  for (const auto& entry : fs::directory_iterator(ctx.dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    manifest.files[name] = sha256_file(entry.path());
  }
  write_text_file(ctx.dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

nlohmann::json emit_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "manifest.json")) {
    throw Error(ErrorKind::MissingManifest, "no manifest.json in " + run_dir, "cli");
  }
  const nlohmann::json manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  const nlohmann::json config = fs::exists(dir / "config.json")
                                    ? nlohmann::json::parse(read_text_file(dir / "config.json"))
                                    : nlohmann::json::object();
  const std::string kind = config.value("kind", "?");

  std::vector<std::string> produced;
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "- kind: `" << kind << "`\n";
  md << "- config hash: `" << manifest.value("config_sha256", "?") << "`\n";
  md << "- tool version: " << manifest.value("tool_version", "?") << "\n\n";

  if (fs::exists(dir / "results.csv")) {
    md << "## Results\n\n```\n" << read_text_file(dir / "results.csv") << "```\n\n";
  }
  if (fs::exists(dir / "verdict.json")) {
    const nlohmann::json v = nlohmann::json::parse(read_text_file(dir / "verdict.json"));
    md << "## Verdict\n\ncondition " << v.value("condition", "?") << " at L = "
       << v.value("scale", 0.0) << ": **" << v.value("verdict", "?") << "** (estimate "
       << v.value("estimate", 0.0) << " vs threshold " << v.value("threshold", 0.0)
       << "; empirical diagnostic, not a proof).\n\n";
  }
  if (fs::exists(dir / "fit.json")) {
    const nlohmann::json f = nlohmann::json::parse(read_text_file(dir / "fit.json"));
    md << "## Decay fit\n\nbest gamma " << f.value("best_gamma", 0.0) << ", exponential rate "
       << f.value("exponential_rate", 0.0) << ", exponential-decay verdict "
       << (f.value("t_condition_pass", false) ? "pass" : "fail")
       << " (empirical diagnostic, not a proof).\n\n";
  }
  if (fs::exists(dir / "verify.json")) {
    const nlohmann::json v = nlohmann::json::parse(read_text_file(dir / "verify.json"));
    const nlohmann::json s = v.value("summary", nlohmann::json::object());
    md << "## Verification summary\n\n"
       << "| n_env | in_T | quenine_ok | quenine_violations | eqcom_ok | potential_ok |\n"
       << "|---|---|---|---|---|---|\n"
       << "| " << s.value("n_env", int64_t{0}) << " | " << s.value("in_T", int64_t{0}) << " | "
       << s.value("quenine_ok", int64_t{0}) << " | " << s.value("quenine_violations", int64_t{0})
       << " | " << s.value("eqcom_ok", int64_t{0}) << " | " << s.value("potential_ok", int64_t{0})
       << " |\n\n";
  }
  if (fs::exists(dir / "independence.json")) {
    const nlohmann::json v = nlohmann::json::parse(read_text_file(dir / "independence.json"));
    md << "## Independence diagnostic\n\nflagged pairs: " << v.value("flagged_pairs", 0)
       << " (threshold |r| > " << v.value("flag_threshold", 0.0) << ").\n\n";
  }

  // regenerate decay plots when the table exists but the plots do not
  if (fs::exists(dir / "decay.csv") && !fs::exists(dir / "decay_L.svg")) {
    std::istringstream in(read_text_file(dir / "decay.csv"));
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> x, y, ylo, yhi;
    while (std::getline(in, line)) {
      double L, est, lo, hi;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &L, &est, &lo, &hi) == 4) {
        x.push_back(L);
        y.push_back(-std::log(std::max(est, 1e-300)));
        ylo.push_back(-std::log(std::max(hi, 1e-300)));
        yhi.push_back(-std::log(std::max(lo, 1e-300)));
      }
    }
    if (x.size() >= 2) {
      double sxy = 0, sxx = 0;
      for (size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
      }
      write_text_file(dir / "decay_L.svg",
                      decay_plot_svg("decay against L", "L", x, y, ylo, yhi, sxy / sxx));
      produced.push_back("decay_L.svg");
    }
  }

  write_text_file(dir / "report.md", md.str());
  produced.push_back("report.md");
  nlohmann::json out = {{"run_dir", run_dir}, {"files", produced}};
  return out;
}

}  // namespace rwre
