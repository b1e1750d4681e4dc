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

#include "perpolicy/run_log.h"

#include "perpolicy/errors.h"

namespace perpolicy {

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kEsc1:
      return "esc1";
    case Phase::kEsc2:
      return "esc2";
    case Phase::kExplore:
      return "explore";
    case Phase::kExploit:
      return "exploit";
    case Phase::kFixed:
      return "fixed";
  }
  return "unknown";
}

const TaskRecord& RunLog::Append(Phase phase, int policy, int samples,
                                 bool decision, double mu, int candidates) {
  if (samples < 1) throw PreconditionError("a task draws at least one sample");
  TaskRecord rec;
  rec.task = ++tasks_;
  rec.phase = phase;
  rec.policy = policy;
  rec.samples = samples;
  rec.decision = decision;
  rec.mu = mu;
  rec.reward = decision ? mu : 0.0;
  rec.cum_reward = last_.cum_reward + rec.reward;
  rec.cum_cost = last_.cum_cost + samples;
  rec.candidates = candidates;
  last_ = rec;
  auto& totals = phase_totals_[phase];
  totals.first += 1;
  totals.second += samples;
  if (keep_records_) records_.push_back(rec);
  return last_;
}

long long RunLog::samples_in(Phase phase) const {
  auto it = phase_totals_.find(phase);
  return it == phase_totals_.end() ? 0 : it->second.second;
}

long long RunLog::tasks_in(Phase phase) const {
  auto it = phase_totals_.find(phase);
  return it == phase_totals_.end() ? 0 : it->second.first;
}

}  // namespace perpolicy
