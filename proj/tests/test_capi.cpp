// SPDX-License-Identifier: Apache-2.0
//
// Exercises the public C surface end to end: campaign run, record handles,
// selection report, analyses, and the scalar statistics entry points.

#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <ttc/ttc.h>

#include "core/records.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("ttc_capi_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path.string() : (path / child).string();
  }
};

const char* kBonConfig = R"json({
  "tasks": [
    {"task_id": 4, "split": "eval", "subset_tag": "subset1", "baseline_time": 4.0},
    {"task_id": 5, "split": "eval", "subset_tag": "subset1", "baseline_time": 4.0}
  ],
  "mode": "best_of_n",
  "K": 16,
  "steps": 0,
  "temperature": 0.25,
  "max_tokens": 1024,
  "learning_rate": 1e-5,
  "patience": null,
  "beta": 1.0,
  "seeds": [42],
  "strategy_list": ["oracle_best_correct", "surprisal_guided"],
  "rollout_budget": 32
})json";

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(ttc_version()) > 0);
  CHECK(std::string(ttc_status_name(TTC_OK)) == "ok");
  CHECK(std::string(ttc_status_name(TTC_ERROR_CONFIG)) == "config_error");
  CHECK(std::string(ttc_status_name(TTC_ERROR_BACKEND)) == "backend_error");
  CHECK(std::string(ttc_status_name(TTC_ERROR_ANALYSIS)) == "analysis_error");
}

TEST_CASE("campaign run through the C API") {
  TempDir dir("run");
  const auto config_path = dir.str("config.json");
  {
    std::ofstream out(config_path);
    out << kBonConfig;
  }
  REQUIRE(ttc_campaign_run(config_path.c_str(), dir.str("out").c_str(), nullptr) == TTC_OK);

  ttc_records* records = nullptr;
  REQUIRE(ttc_records_open(dir.str("out/records.jsonl").c_str(), &records) == TTC_OK);
  CHECK(ttc_records_count(records) == 32);
  double rate = -1.0;
  CHECK(ttc_records_fast1_rate(records, &rate) == TTC_OK);
  CHECK(rate >= 0.0);
  CHECK(rate <= 1.0);

  const auto csv_path = dir.str("selection.csv");
  CHECK(ttc_select_report(records, "surprisal_guided,oracle_best_correct", 7,
                          csv_path.c_str()) == TTC_OK);
  CHECK(fs::exists(csv_path));
  ttc_records_free(records);

  // Report rendering with the two-call sizing pattern.
  size_t needed = 0;
  REQUIRE(ttc_report_render(dir.str("out/manifest.json").c_str(), nullptr, 0, &needed) == TTC_OK);
  REQUIRE(needed > 0);
  std::string buf(needed + 1, '\0');
  REQUIRE(ttc_report_render(dir.str("out/manifest.json").c_str(), buf.data(), buf.size(),
                            nullptr) == TTC_OK);
  CHECK(buf.find("best_of_n") != std::string::npos);
}

TEST_CASE("status codes map failures") {
  TempDir dir("fail");
  // Unparsable config.
  const auto bad = dir.str("bad.json");
  {
    std::ofstream out(bad);
    out << "{broken";
  }
  CHECK(ttc_campaign_run(bad.c_str(), dir.str("out").c_str(), nullptr) == TTC_ERROR_CONFIG);
  CHECK(std::strlen(ttc_last_error()) > 0);

  // Missing records file.
  ttc_records* records = nullptr;
  CHECK(ttc_records_open(dir.str("missing.jsonl").c_str(), &records) == TTC_ERROR_IO);
  CHECK(records == nullptr);

  // Unknown analysis kind.
  const auto records_path = dir.str("records.jsonl");
  {
    std::ofstream out(records_path);
    ttc::io::write_records(out, ttc::testing::scaling_fixture_records());
  }
  ttc_analyze_options options;
  ttc_analyze_options_init(&options);
  CHECK(ttc_analyze(records_path.c_str(), "nonsense", dir.str("out").c_str(), &options) ==
        TTC_ERROR_ANALYSIS);
  CHECK(ttc_analyze(records_path.c_str(), "scaling", dir.str("out").c_str(), &options) == TTC_OK);
  CHECK(fs::exists(dir.str("out/scaling_curve.csv")));

  // NULL arguments.
  CHECK(ttc_campaign_run(nullptr, "x", nullptr) == TTC_ERROR);
  CHECK(ttc_records_open(nullptr, nullptr) == TTC_ERROR);
}

TEST_CASE("scalar statistics surface") {
  double out = 0.0;
  REQUIRE(ttc_success_at_k(4, 2, 2, &out) == TTC_OK);
  CHECK(out == doctest::Approx(5.0 / 6.0));
  CHECK(ttc_success_at_k(4, 9, 2, &out) == TTC_ERROR);

  const double x[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const double y[] = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24};
  double rho = 0.0, p = 1.0;
  REQUIRE(ttc_spearman(x, y, 12, &rho, &p) == TTC_OK);
  CHECK(rho == doctest::Approx(1.0));

  CHECK(ttc_cohens_h(0.8, 0.5) == doctest::Approx(0.6435).epsilon(1e-3));

  double sign_p = 0.0;
  REQUIRE(ttc_exact_sign_test(3, 3, &sign_p) == TTC_OK);
  CHECK(sign_p == doctest::Approx(0.125));
  CHECK(ttc_exact_sign_test(5, 3, &sign_p) == TTC_ERROR);

  const double a[] = {2.0, 3.0, 1.5, 2.5, 4.0, 1.2};
  const double b[] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  double w = -1.0, p1 = -1.0, p2 = -1.0;
  REQUIRE(ttc_wilcoxon(a, b, 6, 1, &w, &p1, &p2) == TTC_OK);
  CHECK(w == doctest::Approx(0.0));
  CHECK(p1 == doctest::Approx(1.0 / 64.0));
}
