// Copyright 2026 The perpolicy Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PERPOLICY_RUN_LOG_H_
#define PERPOLICY_RUN_LOG_H_

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace perpolicy {

enum class Phase { kEsc1, kEsc2, kExplore, kExploit, kFixed };

std::string_view PhaseName(Phase phase);

struct TaskRecord {
  long long task = 0;  // 1-based position in the run
  Phase phase = Phase::kFixed;
  int policy = 0;  // 0 for the standalone all-reject baseline
  int samples = 0;
  bool decision = false;
  double mu = 0.0;
  double reward = 0.0;
  double cum_reward = 0.0;
  double cum_cost = 0.0;
  int candidates = -1;  // |C_n| during exploration, -1 elsewhere
};

// Per-task trace of one run. Totals are always maintained; the record list
// only when `keep_records` is set, so long sweeps stay in constant memory.
class RunLog {
 public:
  explicit RunLog(bool keep_records = true) : keep_records_(keep_records) {}

  const TaskRecord& Append(Phase phase, int policy, int samples, bool decision,
                           double mu, int candidates = -1);

  long long tasks() const { return tasks_; }
  double total_reward() const { return last_.cum_reward; }
  double total_cost() const { return last_.cum_cost; }
  long long samples_in(Phase phase) const;
  long long tasks_in(Phase phase) const;
  bool keeps_records() const { return keep_records_; }
  const std::vector<TaskRecord>& records() const { return records_; }
  // Releases the record list; totals and markers stay.
  void DropRecords() { std::vector<TaskRecord>().swap(records_); }

  std::optional<int> selected_k;
  // Task at which the candidate set first became a singleton.
  std::optional<long long> singleton_task;
  // policy index -> task at whose end it was eliminated.
  std::map<int, long long> eliminated_at;

 private:
  bool keep_records_;
  long long tasks_ = 0;
  TaskRecord last_;
  std::map<Phase, std::pair<long long, long long>> phase_totals_;
  std::vector<TaskRecord> records_;
};

}  // namespace perpolicy

#endif  // PERPOLICY_RUN_LOG_H_
