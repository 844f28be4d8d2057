#include "softpg.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "softpg/config.hpp"
#include "softpg/harness.hpp"

struct softpg_config {
  softpg::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error = "ok";

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1, std::nothrow));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
softpg_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return SOFTPG_ERR_ARG;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return SOFTPG_ERR_NUMERIC;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    return SOFTPG_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SOFTPG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SOFTPG_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* softpg_version(void) { return "softpg 1.0.0"; }

const char* softpg_last_error(void) { return g_last_error.c_str(); }

softpg_config* softpg_config_new(void) {
  return new (std::nothrow) softpg_config();
}

void softpg_config_free(softpg_config* cfg) { delete cfg; }

softpg_status softpg_config_load(softpg_config* cfg, const char* path) {
  if (!cfg || !path) {
    g_last_error = "softpg_config_load: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    softpg::apply_config_file(cfg->cfg, path);
    return SOFTPG_OK;
  });
}

softpg_status softpg_config_set(softpg_config* cfg, const char* key,
                                const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "softpg_config_set: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    softpg::config_set(cfg->cfg, key, value);
    return SOFTPG_OK;
  });
}

softpg_status softpg_config_validate(const softpg_config* cfg) {
  if (!cfg) {
    g_last_error = "softpg_config_validate: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    cfg->cfg.validate();
    return SOFTPG_OK;
  });
}

softpg_status softpg_train(const softpg_config* cfg, const char* out_dir,
                           double* final_eval_mean,
                           double* final_eval_stddev) {
  if (!cfg || !out_dir) {
    g_last_error = "softpg_train: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    softpg::TrainResult res = softpg::run_training(cfg->cfg, out_dir);
    if (final_eval_mean) *final_eval_mean = res.final_eval_mean;
    if (final_eval_stddev) *final_eval_stddev = res.final_eval_stddev;
    return SOFTPG_OK;
  });
}

softpg_status softpg_evaluate(const char* policy_path, const char* env_name,
                              int episodes, uint64_t seed, double* mean,
                              double* stddev) {
  if (!policy_path || !env_name) {
    g_last_error = "softpg_evaluate: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    softpg::Policy policy = softpg::load_policy(policy_path);
    auto env = softpg::make_env(env_name);
    softpg::Rng rng = softpg::Rng::substream(seed, softpg::Stream::Eval);
    softpg::EvalResult res = softpg::evaluate(policy, *env, episodes, rng);
    if (mean) *mean = res.mean;
    if (stddev) *stddev = res.stddev;
    return SOFTPG_OK;
  });
}

softpg_status softpg_compare(const softpg_config* cfg_a,
                             const softpg_config* cfg_b, int n_seeds,
                             const char* out_dir, char** report_json) {
  if (!cfg_a || !cfg_b || !out_dir) {
    g_last_error = "softpg_compare: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    softpg::CompareReport rep =
        softpg::compare_runs(cfg_a->cfg, cfg_b->cfg, n_seeds, out_dir);
    if (report_json) {
      *report_json = dup_string(rep.to_json());
      if (!*report_json) {
        g_last_error = "softpg_compare: allocation failed";
        return SOFTPG_ERR_INTERNAL;
      }
    }
    return SOFTPG_OK;
  });
}

softpg_status softpg_oracle(const char* mdp_path, double alpha, long n_samples,
                            uint64_t seed, char** report_text) {
  if (!mdp_path || !report_text) {
    g_last_error = "softpg_oracle: NULL argument";
    return SOFTPG_ERR_ARG;
  }
  return guarded([&] {
    std::string report =
        softpg::oracle_report(mdp_path, alpha, n_samples, seed);
    *report_text = dup_string(report);
    if (!*report_text) {
      g_last_error = "softpg_oracle: allocation failed";
      return SOFTPG_ERR_INTERNAL;
    }
    return SOFTPG_OK;
  });
}

softpg_status softpg_gradcheck(int points, uint64_t seed,
                               char** report_text) {
  return guarded([&] {
    softpg::GradCheckReport rep = softpg::run_gradcheck_suite(points, seed);
    if (report_text) {
      *report_text = dup_string(rep.to_text());
      if (!*report_text) {
        g_last_error = "softpg_gradcheck: allocation failed";
        return SOFTPG_ERR_INTERNAL;
      }
    }
    if (!rep.all_passed) {
      g_last_error = "gradient check suite failed";
      return SOFTPG_ERR_NUMERIC;
    }
    return SOFTPG_OK;
  });
}

void softpg_string_free(char* s) { ::operator delete(s); }

}  // extern "C"
