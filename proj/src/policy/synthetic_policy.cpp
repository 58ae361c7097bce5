// SPDX-License-Identifier: Apache-2.0

#include "policy/synthetic_policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/rng.hpp"

namespace ttc::policy {

using eval::ArchetypeClass;

namespace {

constexpr std::uint64_t kArchSalt = 0x646d696e61726368ull;
constexpr std::uint64_t kZSalt = 0x7a6f666673657473ull;
constexpr std::uint64_t kTokSalt = 0x746f6b656e637473ull;
constexpr std::uint64_t kTokLpSalt = 0x746f6b6c6f677073ull;
constexpr std::uint64_t kTeacherSalt = 0x7465616368657273ull;
constexpr double kWeightFloor = 1e-12;
constexpr double kReferenceTemperature = 0.25;

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

std::string synth_body(ArchetypeClass klass, int task_id, std::int64_t seed, int index) {
  char buf[512];
  switch (klass) {
    case ArchetypeClass::naive_mode:
      std::snprintf(buf, sizeof(buf),
                    "__global__ void kernel_t%d_s%lld_i%d(float* out, const float* in, int n) {\n"
                    "  int i = blockIdx.x * blockDim.x + threadIdx.x;\n"
                    "  if (i < n) out[i] = in[i] * in[i];\n"
                    "}\n",
                    task_id, static_cast<long long>(seed), index);
      break;
    case ArchetypeClass::expert_tail:
      std::snprintf(buf, sizeof(buf),
                    "__global__ void kernel_t%d_s%lld_i%d(float4* out, const float4* in, int n) {\n"
                    "  extern __shared__ float tile[];\n"
                    "  // vectorized loads, warp-shuffle reduction, fused epilogue\n"
                    "  int i = (blockIdx.x * blockDim.x + threadIdx.x) << 2;\n"
                    "  if (i < n) out[i >> 2] = in[i >> 2];\n"
                    "}\n",
                    task_id, static_cast<long long>(seed), index);
      break;
    case ArchetypeClass::broken:
      std::snprintf(buf, sizeof(buf),
                    "__global__ void kernel_t%d_s%lld_i%d(float* out, const float* in, int n) {\n"
                    "  out[threadIdx.x + 1] = in[n];\n"
                    "}\n",
                    task_id, static_cast<long long>(seed), index);
      break;
  }
  return buf;
}

}  // namespace

ScenarioSpec stock_scenario(const std::vector<TaskSpec>& tasks,
                            const std::map<std::string, double>& overrides) {
  ScenarioSpec spec;
  auto get = [&](const char* key, double fallback) {
    auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
  };
  spec.sharpening_factor = get("sharpening_factor", 0.9);
  spec.eta_scale = get("eta_scale", 3.0e5);
  spec.support_floor = get("support_floor", 0.25);
  spec.collapse_exponent = get("collapse_exponent", 0.8);

  ArchetypeSpec naive;
  naive.klass = ArchetypeClass::naive_mode;
  naive.weight = 0.80;
  naive.mean_logprob = -45.0;
  naive.logprob_spread = 3.0;
  naive.correct_rate = 0.90;
  naive.compile_rate = 0.98;
  naive.speedup_median = 1.2;
  naive.speedup_dispersion = get("naive_dispersion", 0.10);
  naive.token_base = 140.0;

  ArchetypeSpec expert;
  expert.klass = ArchetypeClass::expert_tail;
  expert.weight = 0.05;
  expert.mean_logprob = -80.0;
  expert.logprob_spread = 5.0;
  expert.correct_rate = 0.50;
  expert.compile_rate = 0.92;
  expert.speedup_median = 20.0;
  expert.speedup_dispersion = get("expert_dispersion", 0.40);
  expert.token_base = 260.0;

  ArchetypeSpec broken;
  broken.klass = ArchetypeClass::broken;
  broken.weight = 0.15;
  broken.mean_logprob = -60.0;
  broken.logprob_spread = 6.0;
  broken.correct_rate = 0.0;
  broken.compile_rate = 0.35;
  broken.speedup_median = 0.5;
  broken.speedup_dispersion = 0.30;
  broken.token_base = 90.0;

  for (const auto& t : tasks) {
    spec.tasks[t.task_id] = {naive, expert, broken};
  }
  return spec;
}

SyntheticPolicy::SyntheticPolicy(ScenarioSpec scenario) : scenario_(std::move(scenario)) {
  CheckpointState root;
  for (const auto& [task_id, mixture] : scenario_.tasks) {
    double total = 0.0;
    for (const auto& a : mixture) total += a.weight;
    if (!(total > 0.0)) fail(ErrorCode::invalid_argument, "scenario weights must sum > 0");
    std::vector<ArchetypeState> states;
    for (const auto& a : mixture) {
      ArchetypeState s;
      s.spec = a;
      s.weight = a.weight / total;
      s.spread = a.logprob_spread;
      s.intra_logprob = a.mean_logprob - std::log(s.weight);
      states.push_back(s);
    }
    root.tasks.emplace(task_id, std::move(states));
  }
  char idbuf[64];
  std::snprintf(idbuf, sizeof(idbuf), "syn-s0-%012llx",
                static_cast<unsigned long long>(fingerprint(root) & 0xffffffffffffull));
  root_.id = idbuf;
  root_.backend_kind = BackendKind::synthetic;
  registry_.emplace(root_.id, std::move(root));
}

std::uint64_t SyntheticPolicy::fingerprint(const CheckpointState& state) {
  std::uint64_t h = 0x73796e746870ull;
  for (const auto& [task_id, mixture] : state.tasks) {
    h = rng::mix(h, static_cast<std::uint64_t>(task_id));
    for (const auto& a : mixture) {
      h = rng::mix(h, bits(a.weight), bits(a.spread), bits(a.intra_logprob));
    }
  }
  return rng::mix(h, static_cast<std::uint64_t>(state.step));
}

const SyntheticPolicy::CheckpointState& SyntheticPolicy::state_for(
    const CheckpointRef& checkpoint) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = registry_.find(checkpoint.id);
  if (it == registry_.end()) {
    fail(ErrorCode::unknown_checkpoint, "unknown checkpoint: " + checkpoint.id);
  }
  return it->second;  // map nodes are stable; states are never mutated in place
}

double SyntheticPolicy::effective_correct_rate(const ArchetypeState& a) const {
  if (a.spec.correct_rate <= 0.0) return 0.0;
  const double ratio = a.spec.logprob_spread > 0.0 ? a.spread / a.spec.logprob_spread : 1.0;
  const double eroded = a.spec.correct_rate * std::pow(ratio, scenario_.collapse_exponent);
  return std::clamp(eroded, 0.0, a.spec.compile_rate);
}

std::vector<SampleRecord> SyntheticPolicy::draw_samples(const SampleBatchRequest& request) {
  if (request.K < 1) fail(ErrorCode::invalid_argument, "K must be >= 1");
  if (request.temperature < 0.0) fail(ErrorCode::invalid_argument, "temperature must be >= 0");
  const CheckpointState& state = state_for(request.checkpoint);
  auto task_it = state.tasks.find(request.task_id);
  if (task_it == state.tasks.end()) {
    fail(ErrorCode::unknown_task, "task not in scenario: " + std::to_string(request.task_id));
  }
  const auto& mixture = task_it->second;
  const std::uint64_t fp = fingerprint(state);

  // Temperature reshapes the archetype pick distribution only; recorded
  // logprobs are untempered model scores, as sampling backends report them.
  std::vector<double> pick(mixture.size());
  if (request.temperature < 1e-9) {
    size_t best = 0;
    for (size_t a = 1; a < mixture.size(); ++a) {
      if (mixture[a].weight > mixture[best].weight) best = a;
    }
    pick[best] = 1.0;
  } else {
    const double sharpen = kReferenceTemperature / request.temperature;
    double total = 0.0;
    for (size_t a = 0; a < mixture.size(); ++a) {
      pick[a] = std::pow(std::max(mixture[a].weight, kWeightFloor), sharpen);
      total += pick[a];
    }
    for (auto& p : pick) p /= total;
  }

  std::vector<SampleRecord> out;
  out.reserve(request.K);
  const auto task_u = static_cast<std::uint64_t>(request.task_id);
  const auto seed_u = static_cast<std::uint64_t>(request.seed);
  for (int i = 0; i < request.K; ++i) {
    const auto idx_u = static_cast<std::uint64_t>(i);
    const double u = rng::uniform01(rng::mix(kArchSalt, fp, task_u, seed_u, idx_u));
    size_t arch = 0;
    double cum = 0.0;
    for (size_t a = 0; a < pick.size(); ++a) {
      cum += pick[a];
      if (u < cum) {
        arch = a;
        break;
      }
      arch = a;
    }
    const ArchetypeState& st = mixture[arch];

    // z is keyed on (task, seed, index) only, so every checkpoint can replay
    // the same per-sample offset when re-scoring this sample.
    const double z = rng::gaussian(rng::mix(kZSalt, task_u, seed_u, idx_u));
    const double logprob =
        std::min(0.0, st.intra_logprob + std::log(st.weight) + st.spread * z);

    const double tg = rng::gaussian(rng::mix(kTokSalt, task_u, seed_u, idx_u));
    int tokens = static_cast<int>(std::llround(st.spec.token_base * std::exp(0.25 * tg)));
    tokens = std::clamp(tokens, 1, std::max(1, request.max_tokens));

    eval::BehaviorTag tag;
    tag.archetype_index = static_cast<int>(arch);
    tag.archetype_class = st.spec.klass;
    tag.compile_rate = st.spec.compile_rate;
    tag.correct_rate = effective_correct_rate(st);
    tag.speedup_median = st.spec.speedup_median;
    tag.speedup_dispersion = st.spec.speedup_dispersion;
    tag.z = z;
    tag.task_id = request.task_id;
    tag.seed = request.seed;
    tag.sample_index = i;

    SampleRecord record;
    record.task_id = request.task_id;
    record.seed = request.seed;
    record.sample_index = i;
    record.code = eval::encode_tag(tag) + "\n" +
                  synth_body(st.spec.klass, request.task_id, request.seed, i);
    record.token_count = tokens;
    record.total_logprob = logprob;
    out.push_back(std::move(record));
  }
  return out;
}

double SyntheticPolicy::score_nll(const CheckpointRef& checkpoint,
                                  const SampleRecord& sample) const {
  const CheckpointState& state = state_for(checkpoint);
  const auto tag = eval::parse_tag(sample.code);
  if (!tag) fail(ErrorCode::invalid_argument, "sample has no behavior tag; cannot score");
  auto task_it = state.tasks.find(sample.task_id);
  if (task_it == state.tasks.end()) {
    fail(ErrorCode::unknown_task, "task not in scenario: " + std::to_string(sample.task_id));
  }
  const auto& mixture = task_it->second;
  if (tag->archetype_index < 0 || tag->archetype_index >= static_cast<int>(mixture.size())) {
    fail(ErrorCode::invalid_argument, "tag archetype index out of range");
  }
  const ArchetypeState& st = mixture[tag->archetype_index];
  const double logprob =
      std::min(0.0, st.intra_logprob + std::log(st.weight) + st.spread * tag->z);
  return -logprob;
}

AdaptOutcome SyntheticPolicy::adapt_scored(const CheckpointRef& checkpoint,
                                           const std::vector<SampleRecord>& rollouts,
                                           const std::vector<double>& scores,
                                           double learning_rate) {
  if (rollouts.empty()) fail(ErrorCode::invalid_argument, "adapt requires non-empty rollouts");
  if (rollouts.size() != scores.size()) {
    fail(ErrorCode::invalid_argument, "rollouts/scores length mismatch");
  }
  const CheckpointState& parent = state_for(checkpoint);

  CheckpointState child = parent;
  child.step = parent.step + 1;

  std::int64_t student_tokens = 0;
  if (learning_rate != 0.0) {
    // Batch-empirical archetype statistics.
    struct Cell {
      std::int64_t n = 0;
      double sum = 0.0;
    };
    std::map<int, std::vector<Cell>> per_task;
    std::map<int, std::int64_t> task_counts;
    double batch_sum = 0.0;
    for (size_t i = 0; i < rollouts.size(); ++i) {
      const auto& r = rollouts[i];
      const auto tag = eval::parse_tag(r.code);
      if (!tag) fail(ErrorCode::invalid_argument, "rollout has no behavior tag");
      auto task_it = child.tasks.find(r.task_id);
      if (task_it == child.tasks.end()) {
        fail(ErrorCode::unknown_task, "task not in scenario: " + std::to_string(r.task_id));
      }
      auto& cells = per_task[r.task_id];
      cells.resize(task_it->second.size());
      if (tag->archetype_index < 0 || tag->archetype_index >= static_cast<int>(cells.size())) {
        fail(ErrorCode::invalid_argument, "tag archetype index out of range");
      }
      cells[tag->archetype_index].n += 1;
      cells[tag->archetype_index].sum += scores[i];
      task_counts[r.task_id] += 1;
      batch_sum += scores[i];
      student_tokens += r.token_count;
    }
    const double batch_mean = batch_sum / static_cast<double>(rollouts.size());
    const double eta = learning_rate * scenario_.eta_scale;

    for (auto& [task_id, cells] : per_task) {
      auto& mixture = child.tasks.at(task_id);
      const double k_task = static_cast<double>(task_counts.at(task_id));

      // Exponentiated-weights on batch advantages. Archetypes below the
      // support floor carry too little sample signal to be reinforced: they
      // hold or decay, and whatever mass they shed flows to the supported
      // block, which shares it in proportion to its own multipliers.
      std::vector<bool> supported(mixture.size(), false);
      bool any_supported = false;
      for (size_t a = 0; a < mixture.size(); ++a) {
        supported[a] = cells[a].n > 0 &&
                       static_cast<double>(cells[a].n) / k_task >= scenario_.support_floor;
        any_supported = any_supported || supported[a];
      }
      if (!any_supported) continue;  // nothing has enough signal to learn from

      double freed = 0.0;
      double supported_mass = 0.0;
      double supported_norm = 0.0;
      std::vector<double> multiplier(mixture.size(), 1.0);
      for (size_t a = 0; a < mixture.size(); ++a) {
        const double mean_a =
            cells[a].n > 0 ? cells[a].sum / static_cast<double>(cells[a].n) : 0.0;
        const double advantage = mean_a - batch_mean;
        if (supported[a]) {
          multiplier[a] = std::exp(eta * advantage);
          supported_mass += mixture[a].weight;
          supported_norm += mixture[a].weight * multiplier[a];
        } else {
          multiplier[a] = std::exp(eta * std::min(advantage, 0.0));
          freed += mixture[a].weight * (1.0 - multiplier[a]);
        }
      }
      for (size_t a = 0; a < mixture.size(); ++a) {
        if (supported[a]) {
          mixture[a].weight =
              (mixture[a].weight * multiplier[a] / supported_norm) * (supported_mass + freed);
        } else {
          mixture[a].weight *= multiplier[a];
        }
        mixture[a].weight = std::max(mixture[a].weight, kWeightFloor);
      }
      double total = 0.0;
      for (const auto& a : mixture) total += a.weight;
      for (auto& a : mixture) a.weight /= total;
    }

    // Sharpening contracts sequence diversity globally, not just on the
    // batch tasks: the update moves shared weights.
    for (auto& [task_id, mixture] : child.tasks) {
      for (auto& a : mixture) a.spread *= scenario_.sharpening_factor;
    }
    for (const auto& [task_id, n] : task_counts) child.adapted_tasks.insert(task_id);
  } else {
    for (const auto& r : rollouts) student_tokens += r.token_count;
  }

  char idbuf[64];
  std::snprintf(idbuf, sizeof(idbuf), "syn-s%d-%012llx", child.step,
                static_cast<unsigned long long>(fingerprint(child) & 0xffffffffffffull));
  CheckpointRef ref;
  ref.id = idbuf;
  ref.backend_kind = BackendKind::synthetic;
  ref.lineage = checkpoint.lineage;
  ref.lineage.emplace_back(child.step, checkpoint.id);

  {
    std::lock_guard<std::mutex> lock(mutex_);
    registry_.emplace(ref.id, std::move(child));
  }

  AdaptOutcome outcome;
  outcome.new_checkpoint = ref;
  outcome.rollouts_consumed = static_cast<std::int64_t>(rollouts.size());
  outcome.student_tokens = student_tokens;
  return outcome;
}

std::vector<double> SyntheticPolicy::token_logprobs(const CheckpointRef& checkpoint,
                                                    const SampleRecord& sample) const {
  state_for(checkpoint);  // validates the handle
  const int n = std::max(1, sample.token_count);
  const double base = sample.total_logprob / n;
  const auto task_u = static_cast<std::uint64_t>(sample.task_id);
  const auto seed_u = static_cast<std::uint64_t>(sample.seed);
  const auto idx_u = static_cast<std::uint64_t>(sample.sample_index);

  std::vector<double> wiggle(n);
  double mean = 0.0;
  for (int t = 0; t < n; ++t) {
    double g = rng::gaussian(rng::mix(kTokLpSalt, task_u, seed_u, idx_u,
                                      static_cast<std::uint64_t>(t)));
    wiggle[t] = std::clamp(g, -4.0, 4.0);
    mean += wiggle[t];
  }
  mean /= n;
  std::vector<double> out(n);
  for (int t = 0; t < n; ++t) out[t] = base * (1.0 + 0.1 * (wiggle[t] - mean));
  return out;
}

std::vector<double> SyntheticPolicy::teacher_token_logprobs(const CheckpointRef& checkpoint,
                                                            const SampleRecord& sample,
                                                            const std::string& context) const {
  std::vector<double> out = token_logprobs(checkpoint, sample);
  const std::uint64_t ch = rng::hash_bytes(context);
  const auto task_u = static_cast<std::uint64_t>(sample.task_id);
  const auto seed_u = static_cast<std::uint64_t>(sample.seed);
  const auto idx_u = static_cast<std::uint64_t>(sample.sample_index);
  for (size_t t = 0; t < out.size(); ++t) {
    const double u = rng::uniform01(
        rng::mix(kTeacherSalt, ch, task_u, seed_u, idx_u, static_cast<std::uint64_t>(t)));
    out[t] = std::min(0.0, out[t] + 0.10 + 0.05 * u);
  }
  return out;
}

std::int64_t SyntheticPolicy::context_token_count(const std::string& context) const {
  return static_cast<std::int64_t>((context.size() + 3) / 4);
}

std::set<int> SyntheticPolicy::adapted_task_ids(const CheckpointRef& checkpoint) const {
  return state_for(checkpoint).adapted_tasks;
}

double SyntheticPolicy::archetype_weight(const CheckpointRef& checkpoint, int task_id,
                                         eval::ArchetypeClass klass) const {
  const CheckpointState& state = state_for(checkpoint);
  auto it = state.tasks.find(task_id);
  if (it == state.tasks.end()) fail(ErrorCode::unknown_task, "task not in scenario");
  double total = 0.0;
  for (const auto& a : it->second) {
    if (a.spec.klass == klass) total += a.weight;
  }
  return total;
}

double SyntheticPolicy::archetype_spread(const CheckpointRef& checkpoint, int task_id,
                                         int index) const {
  const CheckpointState& state = state_for(checkpoint);
  auto it = state.tasks.find(task_id);
  if (it == state.tasks.end()) fail(ErrorCode::unknown_task, "task not in scenario");
  if (index < 0 || index >= static_cast<int>(it->second.size())) {
    fail(ErrorCode::invalid_argument, "archetype index out of range");
  }
  return it->second[index].spread;
}

}  // namespace ttc::policy
