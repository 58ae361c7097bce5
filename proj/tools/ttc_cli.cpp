// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Links the C API only; exit codes mirror
// ttc_status: 0 ok, 2 config error, 3 backend error, 4 analysis error.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ttc/ttc.h>

namespace {

int finish(ttc_status status) {
  if (status != TTC_OK) {
    std::fprintf(stderr, "error (%s): %s\n", ttc_status_name(status), ttc_last_error());
  }
  return static_cast<int>(status);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ",";
    out += p;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"test-time compute toolkit"};
  app.set_version_flag("--version", std::string("ttc ") + ttc_version());
  app.require_subcommand(1);

  std::string config_path, records_path, out_dir = "out", seed_str = "0";
  std::string analysis = "scaling", ci_method = "auto", manifest_path;
  std::vector<std::string> strategies;
  double tail_fraction = 0.25;
  double target = -1.0;

  auto* run = app.add_subcommand("run", "execute a campaign config end to end");
  run->add_option("--config", config_path, "campaign config (JSON)")->required();
  run->add_option("--out-dir", out_dir, "artifact directory");

  auto* probe = app.add_subcommand("probe", "run a probe-mode campaign");
  probe->add_option("--config", config_path, "probe campaign config (JSON)")->required();
  probe->add_option("--out-dir", out_dir, "artifact directory");
  probe->add_option("--tail-fraction", tail_fraction,
                    "override the high-surprisal tail fraction");

  auto* sel = app.add_subcommand("select", "apply selection strategies to records");
  sel->add_option("--records", records_path, "records.jsonl path")->required();
  sel->add_option("--strategies", strategies, "subset of strategies (default: all)");
  sel->add_option("--seed", seed_str, "rng seed for random_correct");
  sel->add_option("--out-dir", out_dir, "where to write selection.csv");

  auto* ana = app.add_subcommand("analyze", "emit figure-data CSV exports");
  ana->add_option("--records", records_path, "input records/trajectory/probe/ledger path")
      ->required();
  ana->add_option("--analysis", analysis,
                  "scaling|equivalent_k|selection|trajectory|regime|quartile|probe|ledger");
  ana->add_option("--out-dir", out_dir, "output directory");
  ana->add_option("--seed", seed_str, "rng seed for selection analysis");
  ana->add_option("--ci-method", ci_method, "auto|seed_range|bootstrap");
  ana->add_option("--target", target, "equivalent_k target rate in [0,1]");

  auto* rep = app.add_subcommand("report", "summarize a campaign manifest");
  rep->add_option("--manifest", manifest_path, "manifest.json path")->required();

  CLI11_PARSE(app, argc, argv);

  const char* endpoint = std::getenv("TTC_BACKEND_URL");

  if (run->parsed() || probe->parsed()) {
    ttc_run_options options;
    ttc_run_options_init(&options);
    options.endpoint = endpoint;
    if (probe->parsed() && probe->count("--tail-fraction") > 0) {
      options.tail_fraction = tail_fraction;
    }
    return finish(ttc_campaign_run(config_path.c_str(), out_dir.c_str(), &options));
  }

  if (sel->parsed()) {
    ttc_records* records = nullptr;
    ttc_status status = ttc_records_open(records_path.c_str(), &records);
    if (status != TTC_OK) return finish(status);
    const std::string out_csv = out_dir + "/selection.csv";
    status = ttc_select_report(records, join(strategies).c_str(),
                               std::strtoll(seed_str.c_str(), nullptr, 10), out_csv.c_str());
    ttc_records_free(records);
    if (status == TTC_OK) std::printf("wrote %s\n", out_csv.c_str());
    return finish(status);
  }

  if (ana->parsed()) {
    ttc_analyze_options options;
    ttc_analyze_options_init(&options);
    options.target = target;
    options.ci_method = ci_method.c_str();
    options.select_seed = std::strtoll(seed_str.c_str(), nullptr, 10);
    const ttc_status status =
        ttc_analyze(records_path.c_str(), analysis.c_str(), out_dir.c_str(), &options);
    if (status == TTC_OK) std::printf("wrote %s exports to %s\n", analysis.c_str(), out_dir.c_str());
    return finish(status);
  }

  if (rep->parsed()) {
    size_t needed = 0;
    ttc_status status = ttc_report_render(manifest_path.c_str(), nullptr, 0, &needed);
    if (status != TTC_OK) return finish(status);
    std::string buf(needed + 1, '\0');
    status = ttc_report_render(manifest_path.c_str(), buf.data(), buf.size(), nullptr);
    if (status == TTC_OK) std::fputs(buf.c_str(), stdout);
    return finish(status);
  }

  return finish(TTC_ERROR);
}
