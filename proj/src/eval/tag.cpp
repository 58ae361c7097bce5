// SPDX-License-Identifier: Apache-2.0

#include "eval/tag.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

#include "core/error.hpp"

namespace ttc::eval {

static constexpr const char* kTagPrefix = "//@kernelsim v1 ";

const char* archetype_class_name(ArchetypeClass c) {
  switch (c) {
    case ArchetypeClass::naive_mode: return "naive_mode";
    case ArchetypeClass::expert_tail: return "expert_tail";
    case ArchetypeClass::broken: return "broken";
  }
  return "unknown";
}

ArchetypeClass archetype_class_from_name(const std::string& name) {
  if (name == "naive_mode") return ArchetypeClass::naive_mode;
  if (name == "expert_tail") return ArchetypeClass::expert_tail;
  if (name == "broken") return ArchetypeClass::broken;
  fail(ErrorCode::invalid_argument, "unknown archetype class: " + name);
}

static std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string encode_tag(const BehaviorTag& t) {
  std::ostringstream out;
  out << kTagPrefix << "arch=" << t.archetype_index
      << " class=" << archetype_class_name(t.archetype_class)
      << " pc=" << fmt_double(t.compile_rate) << " cr=" << fmt_double(t.correct_rate)
      << " med=" << fmt_double(t.speedup_median) << " disp=" << fmt_double(t.speedup_dispersion)
      << " z=" << fmt_double(t.z) << " uid=" << t.task_id << ':' << t.seed << ':'
      << t.sample_index;
  return out.str();
}

std::optional<BehaviorTag> parse_tag(const std::string& code) {
  if (code.rfind(kTagPrefix, 0) != 0) return std::nullopt;
  const auto line_end = code.find('\n');
  const std::string line =
      line_end == std::string::npos ? code : code.substr(0, line_end);

  BehaviorTag tag;
  std::istringstream in(line.substr(std::strlen(kTagPrefix)));
  std::string field;
  int parsed = 0;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) return std::nullopt;
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    try {
      if (key == "arch") {
        tag.archetype_index = std::stoi(value);
      } else if (key == "class") {
        tag.archetype_class = archetype_class_from_name(value);
      } else if (key == "pc") {
        tag.compile_rate = std::stod(value);
      } else if (key == "cr") {
        tag.correct_rate = std::stod(value);
      } else if (key == "med") {
        tag.speedup_median = std::stod(value);
      } else if (key == "disp") {
        tag.speedup_dispersion = std::stod(value);
      } else if (key == "z") {
        tag.z = std::stod(value);
      } else if (key == "uid") {
        if (std::sscanf(value.c_str(), "%d:%lld:%d", &tag.task_id,
                        reinterpret_cast<long long*>(&tag.seed),
                        &tag.sample_index) != 3) {
          return std::nullopt;
        }
      } else {
        continue;  // forward compatibility: ignore unknown keys
      }
    } catch (const std::exception&) {
      return std::nullopt;
    }
    ++parsed;
  }
  if (parsed < 8) return std::nullopt;
  return tag;
}

}  // namespace ttc::eval
