#include "rwre.h"

#include <cstring>
#include <iostream>
#include <string>

#include "environment.hpp"
#include "experiment.hpp"
#include "report.hpp"
#include "ruin.hpp"
#include "solver.hpp"

namespace {

thread_local std::string g_last_error;

rwre_status fail(const rwre::Error& e) {
  g_last_error = rwre::error_to_json(e).dump();
  return e.kind() == rwre::ErrorKind::ConfigInvalid ? RWRE_ERR_CONFIG : RWRE_ERR_RUNTIME;
}

rwre_status fail_generic(const char* what) {
  g_last_error = nlohmann::json{{"code", "Internal"},
                                {"module", "capi"},
                                {"message", what},
                                {"context", {{"exit_code", 3}}}}
                     .dump();
  return RWRE_ERR_RUNTIME;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
rwre_status guarded(Fn&& fn) {
  try {
    fn();
    return RWRE_OK;
  } catch (const rwre::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail_generic(e.what());
  } catch (...) {
    return fail_generic("unknown error");
  }
}

}  // namespace

struct rwre_env {
  rwre::Environment env;
};

extern "C" {

const char* rwre_version(void) { return rwre::kToolVersion; }

const char* rwre_last_error(void) { return g_last_error.empty() ? nullptr : g_last_error.c_str(); }

void rwre_string_free(char* s) { std::free(s); }

rwre_status rwre_env_create(const char* law_json, rwre_env** out) {
  return guarded([&] {
    if (!law_json || !out) {
      throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null argument", "capi");
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(law_json);
    } catch (const nlohmann::json::exception& e) {
      throw rwre::Error(rwre::ErrorKind::ConfigInvalid, std::string("law json: ") + e.what(),
                        "capi");
    }
    *out = new rwre_env{rwre::Environment(rwre::EnvironmentLaw::from_json(j))};
  });
}

void rwre_env_destroy(rwre_env* env) { delete env; }

rwre_status rwre_env_dimension(const rwre_env* env, int32_t* out_d) {
  return guarded([&] {
    if (!env || !out_d) throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null argument", "capi");
    *out_d = env->env.dimension();
  });
}

rwre_status rwre_env_site_probs(const rwre_env* env, const int64_t* coords, double* out) {
  return guarded([&] {
    if (!env || !coords || !out) {
      throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null argument", "capi");
    }
    rwre::Site x = rwre::Site::origin(env->env.dimension());
    for (int k = 0; k < x.dim; ++k) x.c[k] = coords[k];
    env->env.probs_into(x, out);
  });
}

rwre_status rwre_box_exit_probabilities(const rwre_env* env, const double* direction, int32_t d,
                                        double L, double L_tilde, const int64_t* start,
                                        double out_pos_neg_lat[3]) {
  return guarded([&] {
    if (!env || !direction || !start || !out_pos_neg_lat) {
      throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null argument", "capi");
    }
    if (d != env->env.dimension()) {
      throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "direction dimension mismatch", "capi");
    }
    Eigen::VectorXd dir(d);
    for (int k = 0; k < d; ++k) dir[k] = direction[k];
    rwre::BoxTriple box{rwre::build_rotation(dir), L, L_tilde};
    rwre::Site s = rwre::Site::origin(d);
    for (int k = 0; k < d; ++k) s.c[k] = start[k];
    rwre::ExitDistribution dist =
        rwre::solve_exit_distribution(rwre::problem_from_box(env->env, box));
    const auto probs = dist.probabilities(s);
    out_pos_neg_lat[0] = probs[0];
    out_pos_neg_lat[1] = probs[1];
    out_pos_neg_lat[2] = probs[2];
  });
}

rwre_status rwre_gambler_ruin_left_exit(int32_t n, int32_t start, const double* p_right,
                                        double* out) {
  return guarded([&] {
    if (!p_right || !out) throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null argument", "capi");
    rwre::RuinProblem rp;
    rp.n = n;
    rp.start = start;
    rp.p_right.assign(p_right, p_right + (n > 0 ? n : 0));
    *out = rwre::gambler_ruin_exact(rp).absorb_left;
  });
}

rwre_status rwre_run_experiment(const char* config_json, const char* kind, const char* out_dir,
                                int32_t threads, const uint64_t* seed_override,
                                int32_t stream_stdout, char** manifest_json) {
  return guarded([&] {
    if (!config_json) throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null config", "capi");
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw rwre::Error(rwre::ErrorKind::ConfigInvalid, std::string("config json: ") + e.what(),
                        "capi");
    }
    if (kind && *kind) {
      if (config.is_object() && config.contains("kind") && config.at("kind") != kind) {
        throw rwre::Error(rwre::ErrorKind::ConfigInvalid,
                          "kind: config says '" + config.at("kind").get<std::string>() +
                              "' but '" + kind + "' was requested",
                          "capi");
      }
      if (config.is_object()) config["kind"] = kind;
    }
    rwre::RunManifest manifest =
        rwre::run_experiment(config, out_dir ? out_dir : "", threads, seed_override,
                             stream_stdout ? &std::cout : nullptr);
    if (manifest_json) *manifest_json = dup_string(manifest.to_json().dump(2));
  });
}

rwre_status rwre_emit_report(const char* run_dir, char** report_json) {
  return guarded([&] {
    if (!run_dir) throw rwre::Error(rwre::ErrorKind::ConfigInvalid, "null run_dir", "capi");
    nlohmann::json out = rwre::emit_report(run_dir);
    if (report_json) *report_json = dup_string(out.dump(2));
  });
}

}  // extern "C"
