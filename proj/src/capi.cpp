// SPDX-License-Identifier: Apache-2.0

#include "ttc/ttc.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "campaign/campaign.hpp"
#include "core/records.hpp"
#include "scaling/scaling.hpp"
#include "stats/stats.hpp"

namespace {

thread_local std::string g_last_error;

ttc_status status_from(const ttc::Error& e) {
  g_last_error = e.what();
  switch (e.code()) {
    case ttc::ErrorCode::config_invalid: return TTC_ERROR_CONFIG;
    case ttc::ErrorCode::backend_unreachable: return TTC_ERROR_BACKEND;
    case ttc::ErrorCode::analysis_invalid: return TTC_ERROR_ANALYSIS;
    case ttc::ErrorCode::io_failure: return TTC_ERROR_IO;
    case ttc::ErrorCode::unknown_task:
    case ttc::ErrorCode::unknown_checkpoint: return TTC_ERROR_BACKEND;
    case ttc::ErrorCode::invalid_argument: return TTC_ERROR;
  }
  return TTC_ERROR;
}

template <typename Fn>
ttc_status guarded(Fn&& fn) {
  try {
    fn();
    return TTC_OK;
  } catch (const ttc::Error& e) {
    return status_from(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TTC_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return TTC_ERROR;
  }
}

std::vector<ttc::SelectionStrategy> parse_strategies(const char* csv) {
  std::vector<ttc::SelectionStrategy> out;
  if (csv == nullptr || *csv == '\0') return out;
  std::istringstream in(csv);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (!name.empty()) out.push_back(ttc::io::strategy_from_name(name));
  }
  return out;
}

}  // namespace

struct ttc_records {
  std::vector<ttc::SampleRecord> records;
};

extern "C" {

const char* ttc_version(void) { return ttc::campaign::kToolVersion; }

const char* ttc_status_name(ttc_status status) {
  switch (status) {
    case TTC_OK: return "ok";
    case TTC_ERROR: return "error";
    case TTC_ERROR_CONFIG: return "config_error";
    case TTC_ERROR_BACKEND: return "backend_error";
    case TTC_ERROR_ANALYSIS: return "analysis_error";
    case TTC_ERROR_IO: return "io_error";
  }
  return "unknown";
}

const char* ttc_last_error(void) { return g_last_error.c_str(); }

void ttc_run_options_init(ttc_run_options* options) {
  if (options == nullptr) return;
  options->endpoint = nullptr;
  options->tail_fraction = 0.0;
}

ttc_status ttc_campaign_run(const char* config_path, const char* out_dir,
                            const ttc_run_options* options) {
  if (config_path == nullptr || out_dir == nullptr) {
    g_last_error = "config_path and out_dir are required";
    return TTC_ERROR;
  }
  return guarded([&] {
    auto config = ttc::io::config_from_file(config_path);
    if (options != nullptr && options->tail_fraction > 0.0) {
      config.scenario["tail_fraction"] = options->tail_fraction;
    }
    const char* endpoint = options != nullptr ? options->endpoint : nullptr;
    ttc::campaign::cmd_run(config, out_dir, endpoint ? endpoint : "");
  });
}

ttc_status ttc_records_open(const char* path, ttc_records** out) {
  if (path == nullptr || out == nullptr) {
    g_last_error = "path and out are required";
    return TTC_ERROR;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<ttc_records>();
    handle->records = ttc::io::read_records_file(path);
    ttc::io::check_record_set(handle->records);
    *out = handle.release();
  });
}

void ttc_records_free(ttc_records* records) { delete records; }

size_t ttc_records_count(const ttc_records* records) {
  return records == nullptr ? 0 : records->records.size();
}

ttc_status ttc_records_fast1_rate(const ttc_records* records, double* out) {
  if (records == nullptr || out == nullptr) {
    g_last_error = "records and out are required";
    return TTC_ERROR;
  }
  return guarded([&] { *out = ttc::scaling::fast1_rate(records->records); });
}

ttc_status ttc_select_report(const ttc_records* records, const char* strategies,
                             int64_t rng_seed, const char* out_csv) {
  if (records == nullptr) {
    g_last_error = "records handle is required";
    return TTC_ERROR;
  }
  return guarded([&] {
    const auto report =
        ttc::campaign::cmd_select(records->records, parse_strategies(strategies), rng_seed);
    if (out_csv != nullptr && *out_csv != '\0') {
      std::ofstream outfile(out_csv, std::ios::binary);
      if (!outfile) ttc::fail(ttc::ErrorCode::io_failure, std::string("cannot write ") + out_csv);
      outfile << report.csv;
    }
  });
}

void ttc_analyze_options_init(ttc_analyze_options* options) {
  if (options == nullptr) return;
  options->target = -1.0;
  options->ci_method = "auto";
  options->select_seed = 0;
}

ttc_status ttc_analyze(const char* input_path, const char* kind, const char* out_dir,
                       const ttc_analyze_options* options) {
  if (input_path == nullptr || kind == nullptr || out_dir == nullptr) {
    g_last_error = "input_path, kind, and out_dir are required";
    return TTC_ERROR;
  }
  return guarded([&] {
    ttc::campaign::AnalyzeOptions opts;
    if (options != nullptr) {
      opts.target = options->target;
      if (options->ci_method != nullptr) opts.ci_method = options->ci_method;
      opts.select_seed = options->select_seed;
    }
    ttc::campaign::cmd_analyze(input_path, kind, out_dir, opts);
  });
}

ttc_status ttc_report_render(const char* manifest_path, char* buf, size_t cap,
                             size_t* needed) {
  if (manifest_path == nullptr) {
    g_last_error = "manifest_path is required";
    return TTC_ERROR;
  }
  return guarded([&] {
    const std::string text = ttc::campaign::cmd_report(manifest_path);
    if (needed != nullptr) *needed = text.size();
    if (buf != nullptr && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

ttc_status ttc_success_at_k(int n, int c, int k, double* out) {
  if (out == nullptr) {
    g_last_error = "out is required";
    return TTC_ERROR;
  }
  return guarded([&] { *out = ttc::scaling::success_at_k(n, c, k); });
}

ttc_status ttc_spearman(const double* x, const double* y, size_t n, double* rho,
                        double* p_two_sided) {
  if (x == nullptr || y == nullptr) {
    g_last_error = "x and y are required";
    return TTC_ERROR;
  }
  return guarded([&] {
    const auto c = ttc::stats::spearman(std::vector<double>(x, x + n),
                                        std::vector<double>(y, y + n));
    if (rho != nullptr) *rho = c.rho;
    if (p_two_sided != nullptr) *p_two_sided = c.p_two_sided;
  });
}

double ttc_cohens_h(double p1, double p2) { return ttc::stats::cohens_h(p1, p2); }

ttc_status ttc_exact_sign_test(int wins, int discordant, double* p_one_sided) {
  if (p_one_sided == nullptr) {
    g_last_error = "p_one_sided is required";
    return TTC_ERROR;
  }
  return guarded([&] { *p_one_sided = ttc::stats::exact_sign_test(wins, discordant); });
}

ttc_status ttc_wilcoxon(const double* a, const double* b, size_t n, int log_ratio,
                        double* statistic, double* p_one_sided, double* p_two_sided) {
  if (a == nullptr || b == nullptr) {
    g_last_error = "a and b are required";
    return TTC_ERROR;
  }
  return guarded([&] {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(n);
    for (size_t i = 0; i < n; ++i) pairs.emplace_back(a[i], b[i]);
    const auto res = ttc::stats::wilcoxon_signed_rank(
        pairs, log_ratio ? ttc::stats::PairTransform::log_ratio
                         : ttc::stats::PairTransform::identity);
    if (statistic != nullptr) *statistic = res.statistic;
    if (p_one_sided != nullptr) *p_one_sided = res.p_one_sided;
    if (p_two_sided != nullptr) *p_two_sided = res.p_two_sided;
  });
}

}  // extern "C"
