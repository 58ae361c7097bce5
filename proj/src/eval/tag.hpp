// SPDX-License-Identifier: Apache-2.0
//
// Behavior tag: a one-line structured header the synthetic policy writes at
// the top of every generated candidate. It carries everything the synthetic
// evaluator needs to score the candidate as a pure function of
// (task_id, code, trials), which closes the generate -> evaluate loop
// deterministically without a model or hardware.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ttc::eval {

enum class ArchetypeClass { naive_mode, expert_tail, broken };

const char* archetype_class_name(ArchetypeClass c);
ArchetypeClass archetype_class_from_name(const std::string& name);

struct BehaviorTag {
  int archetype_index = 0;
  ArchetypeClass archetype_class = ArchetypeClass::naive_mode;
  double compile_rate = 1.0;       // pc
  double correct_rate = 1.0;       // cr, effective at draw time
  double speedup_median = 1.0;     // med
  double speedup_dispersion = 0.0; // disp, lognormal sigma
  double z = 0.0;                  // the sample's standard logprob offset
  int task_id = 0;
  std::int64_t seed = 0;
  int sample_index = 0;
};

// Renders the header line (no trailing newline).
std::string encode_tag(const BehaviorTag& tag);

// Parses the header from candidate code; nullopt when the code does not
// start with a recognizable tag line.
std::optional<BehaviorTag> parse_tag(const std::string& code);

}  // namespace ttc::eval
