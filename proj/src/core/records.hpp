// SPDX-License-Identifier: Apache-2.0
//
// Run-record and config persistence. Record files are line-delimited JSON
// with fixed field names:
//   task_id, seed, sample_index, code, token_count, total_logprob,
//   compiled, correct, speedup, runtime, error_trace, trials
// Campaign configs are a single JSON document (see README for the schema).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace ttc::io {

std::string record_to_line(const SampleRecord& record);
SampleRecord record_from_line(const std::string& line);

void write_records(std::ostream& out, const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_records(std::istream& in);
std::vector<SampleRecord> read_records_file(const std::string& path);

// Raises config_invalid on duplicate (task_id, seed, sample_index) triples
// or outcome invariant violations.
void check_record_set(const std::vector<SampleRecord>& records);

std::string config_to_json(const CampaignConfig& config);
CampaignConfig config_from_json(const std::string& text);
CampaignConfig config_from_file(const std::string& path);

const char* split_name(Split s);
const char* subset_tag_name(SubsetTag t);
const char* mode_name(CampaignMode m);
CampaignMode mode_from_name(const std::string& name);
SelectionStrategy strategy_from_name(const std::string& name);

}  // namespace ttc::io
