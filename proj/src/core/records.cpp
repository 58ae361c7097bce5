// SPDX-License-Identifier: Apache-2.0

#include "core/records.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace ttc::io {

using nlohmann::json;

const char* split_name(Split s) { return s == Split::train ? "train" : "eval"; }

static Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "eval") return Split::eval;
  fail(ErrorCode::config_invalid, "unknown split: " + name);
}

const char* subset_tag_name(SubsetTag t) {
  switch (t) {
    case SubsetTag::subset1: return "subset1";
    case SubsetTag::subset2: return "subset2";
    case SubsetTag::extended: return "extended";
  }
  return "unknown";
}

static SubsetTag subset_tag_from_name(const std::string& name) {
  if (name == "subset1") return SubsetTag::subset1;
  if (name == "subset2") return SubsetTag::subset2;
  if (name == "extended") return SubsetTag::extended;
  fail(ErrorCode::config_invalid, "unknown subset_tag: " + name);
}

const char* mode_name(CampaignMode m) {
  switch (m) {
    case CampaignMode::best_of_n: return "best_of_n";
    case CampaignMode::batch_ttt: return "batch_ttt";
    case CampaignMode::per_task_ttt: return "per_task_ttt";
    case CampaignMode::sdpo_feedback: return "sdpo_feedback";
    case CampaignMode::sdpo_prompt_only: return "sdpo_prompt_only";
    case CampaignMode::probe: return "probe";
  }
  return "unknown";
}

CampaignMode mode_from_name(const std::string& name) {
  if (name == "best_of_n") return CampaignMode::best_of_n;
  if (name == "batch_ttt") return CampaignMode::batch_ttt;
  if (name == "per_task_ttt") return CampaignMode::per_task_ttt;
  if (name == "sdpo_feedback") return CampaignMode::sdpo_feedback;
  if (name == "sdpo_prompt_only") return CampaignMode::sdpo_prompt_only;
  if (name == "probe") return CampaignMode::probe;
  fail(ErrorCode::config_invalid, "unknown mode: " + name);
}

SelectionStrategy strategy_from_name(const std::string& name) {
  for (SelectionStrategy s : all_strategies()) {
    if (name == strategy_name(s)) return s;
  }
  fail(ErrorCode::config_invalid, "unknown selection strategy: " + name);
}

std::string record_to_line(const SampleRecord& r) {
  const EvalOutcome& o = r.eval();
  json j;
  j["task_id"] = r.task_id;
  j["seed"] = r.seed;
  j["sample_index"] = r.sample_index;
  j["code"] = r.code;
  j["token_count"] = r.token_count;
  j["total_logprob"] = r.total_logprob;
  j["compiled"] = o.compiled;
  j["correct"] = o.correct;
  j["speedup"] = o.speedup;
  j["runtime"] = o.runtime;
  if (o.error_trace) {
    j["error_trace"] = *o.error_trace;
  } else {
    j["error_trace"] = nullptr;
  }
  j["trials"] = o.trials;
  return j.dump();
}

SampleRecord record_from_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorCode::io_failure, std::string("record parse error: ") + e.what());
  }
  SampleRecord r;
  try {
    r.task_id = j.at("task_id").get<int>();
    r.seed = j.at("seed").get<std::int64_t>();
    r.sample_index = j.at("sample_index").get<int>();
    r.code = j.at("code").get<std::string>();
    r.token_count = j.at("token_count").get<int>();
    r.total_logprob = j.at("total_logprob").get<double>();
    EvalOutcome o;
    o.compiled = j.at("compiled").get<bool>();
    o.correct = j.at("correct").get<bool>();
    o.speedup = j.at("speedup").get<double>();
    o.runtime = j.at("runtime").get<double>();
    if (!j.at("error_trace").is_null()) o.error_trace = j.at("error_trace").get<std::string>();
    o.trials = j.at("trials").get<int>();
    r.outcome = o;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_failure, std::string("record field error: ") + e.what());
  }
  if (r.token_count < 1) fail(ErrorCode::io_failure, "record token_count must be >= 1");
  if (r.total_logprob > 0.0) fail(ErrorCode::io_failure, "record total_logprob must be <= 0");
  if (!outcome_valid(*r.outcome)) fail(ErrorCode::io_failure, "record violates outcome invariants");
  return r;
}

void write_records(std::ostream& out, const std::vector<SampleRecord>& records) {
  for (const auto& r : records) out << record_to_line(r) << '\n';
}

std::vector<SampleRecord> read_records(std::istream& in) {
  std::vector<SampleRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_line(line));
  }
  return out;
}

std::vector<SampleRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open records file: " + path);
  return read_records(in);
}

void check_record_set(const std::vector<SampleRecord>& records) {
  std::set<std::tuple<int, std::int64_t, int>> seen;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.task_id, r.seed, r.sample_index);
    if (!seen.insert(key).second) {
      std::ostringstream msg;
      msg << "duplicate record key (task_id=" << r.task_id << ", seed=" << r.seed
          << ", sample_index=" << r.sample_index << ")";
      fail(ErrorCode::config_invalid, msg.str());
    }
    if (r.outcome && !outcome_valid(*r.outcome)) {
      fail(ErrorCode::config_invalid, "record violates outcome invariant chain");
    }
  }
}

static json task_to_json(const TaskSpec& t) {
  json j;
  j["task_id"] = t.task_id;
  j["split"] = split_name(t.split);
  if (t.subset_tag) {
    j["subset_tag"] = subset_tag_name(*t.subset_tag);
  } else {
    j["subset_tag"] = nullptr;
  }
  j["baseline_time"] = t.baseline_time;
  return j;
}

static TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  t.task_id = j.at("task_id").get<int>();
  if (j.contains("split")) t.split = split_from_name(j.at("split").get<std::string>());
  if (j.contains("subset_tag") && !j.at("subset_tag").is_null()) {
    t.subset_tag = subset_tag_from_name(j.at("subset_tag").get<std::string>());
  }
  t.baseline_time = j.at("baseline_time").get<double>();
  return t;
}

std::string config_to_json(const CampaignConfig& c) {
  json j;
  json tasks = json::array();
  for (const auto& t : c.tasks) tasks.push_back(task_to_json(t));
  j["tasks"] = std::move(tasks);
  j["mode"] = mode_name(c.mode);
  j["K"] = c.K;
  j["steps"] = c.steps;
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["learning_rate"] = c.learning_rate;
  if (c.patience) {
    j["patience"] = *c.patience;
  } else {
    j["patience"] = nullptr;
  }
  j["beta"] = c.beta;
  j["seeds"] = c.seeds;
  json strategies = json::array();
  for (auto s : c.strategy_list) strategies.push_back(strategy_name(s));
  j["strategy_list"] = std::move(strategies);
  j["rollout_budget"] = c.rollout_budget;
  j["checkpoint_id"] = c.checkpoint_id;
  j["backend"] = {{"policy", c.backend.policy},
                  {"evaluator", c.backend.evaluator},
                  {"endpoint", c.backend.endpoint}};
  j["trials"] = c.trials;
  j["workers"] = c.workers;
  if (!c.scenario.empty()) j["scenario"] = c.scenario;
  return j.dump(2);
}

CampaignConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::config_invalid, std::string("config parse error: ") + e.what());
  }
  CampaignConfig c;
  try {
    for (const auto& t : j.at("tasks")) c.tasks.push_back(task_from_json(t));
    c.mode = mode_from_name(j.at("mode").get<std::string>());
    c.K = j.at("K").get<int>();
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) c.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("patience") && !j.at("patience").is_null()) {
      c.patience = j.at("patience").get<int>();
    }
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    c.seeds = j.at("seeds").get<std::vector<std::int64_t>>();
    if (j.contains("strategy_list")) {
      for (const auto& s : j.at("strategy_list")) {
        c.strategy_list.push_back(strategy_from_name(s.get<std::string>()));
      }
    }
    c.rollout_budget = j.at("rollout_budget").get<std::int64_t>();
    if (j.contains("checkpoint_id")) c.checkpoint_id = j.at("checkpoint_id").get<std::string>();
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      if (b.contains("policy")) c.backend.policy = b.at("policy").get<std::string>();
      if (b.contains("evaluator")) c.backend.evaluator = b.at("evaluator").get<std::string>();
      if (b.contains("endpoint")) c.backend.endpoint = b.at("endpoint").get<std::string>();
    }
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("scenario")) {
      c.scenario = j.at("scenario").get<std::map<std::string, double>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::config_invalid, std::string("config field error: ") + e.what());
  }
  return c;
}

CampaignConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config_invalid, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace ttc::io

namespace ttc {

std::vector<std::string> validate_config(const CampaignConfig& c) {
  std::vector<std::string> violations;
  auto flag = [&](const std::string& msg) { violations.push_back(msg); };

  if (c.tasks.empty()) flag("tasks must be non-empty");
  std::set<int> ids;
  for (const auto& t : c.tasks) {
    if (!ids.insert(t.task_id).second) {
      flag("duplicate task_id " + std::to_string(t.task_id));
    }
    if (!(t.baseline_time > 0.0)) {
      flag("task " + std::to_string(t.task_id) + ": baseline_time must be > 0");
    }
  }
  if (c.K < 1) flag("K must be >= 1");
  if (c.steps < 0) flag("steps must be >= 0");
  if (mode_adapts(c.mode) && c.steps < 1) flag("steps must be >= 1 for adaptation modes");
  if (!mode_adapts(c.mode) && c.steps != 0) flag("steps must be 0 for best_of_n");
  if (c.temperature < 0.0) flag("temperature must be >= 0");
  if (c.max_tokens < 1) flag("max_tokens must be >= 1");
  if (!(c.learning_rate > 0.0)) flag("learning_rate must be > 0");
  if (c.patience && *c.patience < 1) flag("patience must be >= 1 when present");
  if (c.seeds.empty()) flag("seeds must be non-empty");
  if (c.trials != 5 && c.trials != 50) {
    flag("trials must be 5 (fast proxy) or 50 (full protocol)");
  }
  if (c.workers < 1) flag("workers must be >= 1");

  if (!c.tasks.empty() && c.K >= 1) {
    const std::int64_t expected = planned_rollouts(c);
    if (c.rollout_budget != expected) {
      flag("rollout budget mismatch: configured " + std::to_string(c.rollout_budget) +
           ", plan requires " + std::to_string(expected));
    }
  }
  return violations;
}

}  // namespace ttc
