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

#include "perpolicy/policy.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "perpolicy/errors.h"

namespace perpolicy {
namespace {

double Sum(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0);
}

}  // namespace

Policy::Policy(int cap) : cap_(cap) {
  if (cap < 1) throw PreconditionError("policy cap must be >= 1");
}

int Policy::Duration(std::span<const double> x) const {
  for (int n = 1; n < cap_; ++n) {
    if (static_cast<std::size_t>(n) > x.size()) {
      throw PreconditionError("sample vector exhausted before stopping");
    }
    if (ShouldStop(x.first(n))) return n;
  }
  if (static_cast<std::size_t>(cap_) > x.size()) {
    throw PreconditionError("sample vector shorter than the cap");
  }
  return cap_;
}

bool Policy::Decide(std::span<const double> x) const {
  const int d = Duration(x);
  return Accept(x.first(d));
}

bool Policy::ShouldStopSum(int, double) const {
  throw PreconditionError(Describe() + " is not a sum-statistic policy");
}

bool Policy::AcceptSum(int, double) const {
  throw PreconditionError(Describe() + " is not a sum-statistic policy");
}

bool StopRule::Holds(int n, double sum) const {
  const double mean = sum / n;
  switch (kind) {
    case Kind::kNever:
      return false;
    case Kind::kAbsMeanAtLeast:
      return std::abs(mean) >= level;
    case Kind::kHoeffding:
      return std::abs(mean) >= level / std::sqrt(static_cast<double>(n));
  }
  return false;
}

bool AcceptRule::Holds(int n, double sum) const {
  const double mean = sum / n;
  switch (kind) {
    case Kind::kNever:
      return false;
    case Kind::kAlways:
      return true;
    case Kind::kMeanAtLeast:
      return mean >= level;
    case Kind::kHoeffding:
      return mean >= level / std::sqrt(static_cast<double>(n));
  }
  return false;
}

SumRulePolicy::SumRulePolicy(int cap, StopRule stop, AcceptRule accept)
    : Policy(cap), stop_(stop), accept_(accept) {}

bool SumRulePolicy::ShouldStop(std::span<const double> prefix) const {
  return stop_.Holds(static_cast<int>(prefix.size()), Sum(prefix));
}

bool SumRulePolicy::Accept(std::span<const double> prefix) const {
  if (prefix.empty()) return false;
  return accept_.Holds(static_cast<int>(prefix.size()), Sum(prefix));
}

int SumRulePolicy::Duration(std::span<const double> x) const {
  double sum = 0.0;
  for (int n = 1; n <= cap(); ++n) {
    if (static_cast<std::size_t>(n) > x.size()) {
      throw PreconditionError("sample vector exhausted before stopping");
    }
    sum += x[n - 1];
    if (n < cap() && stop_.Holds(n, sum)) return n;
  }
  return cap();
}

bool SumRulePolicy::ShouldStopSum(int n, double sum) const {
  return stop_.Holds(n, sum);
}

bool SumRulePolicy::AcceptSum(int n, double sum) const {
  return accept_.Holds(n, sum);
}

std::string SumRulePolicy::Describe() const {
  std::ostringstream out;
  out << "sum_rule(cap=" << cap() << ", stop=";
  switch (stop_.kind) {
    case StopRule::Kind::kNever:
      out << "never";
      break;
    case StopRule::Kind::kAbsMeanAtLeast:
      out << "|mean|>=" << stop_.level;
      break;
    case StopRule::Kind::kHoeffding:
      out << "|mean|>=" << stop_.level << "/sqrt(n)";
      break;
  }
  out << ", accept=";
  switch (accept_.kind) {
    case AcceptRule::Kind::kNever:
      out << "never";
      break;
    case AcceptRule::Kind::kAlways:
      out << "always";
      break;
    case AcceptRule::Kind::kMeanAtLeast:
      out << "mean>=" << accept_.level;
      break;
    case AcceptRule::Kind::kHoeffding:
      out << "mean>=" << accept_.level << "/sqrt(n)";
      break;
  }
  out << ")";
  return out.str();
}

FunctionPolicy::FunctionPolicy(int cap, Hook stop, Hook accept,
                               std::string name)
    : Policy(cap),
      stop_(std::move(stop)),
      accept_(std::move(accept)),
      name_(std::move(name)) {}

bool FunctionPolicy::ShouldStop(std::span<const double> prefix) const {
  return stop_ ? stop_(prefix) : false;
}

bool FunctionPolicy::Accept(std::span<const double> prefix) const {
  return accept_ ? accept_(prefix) : false;
}

RejectingPolicy::RejectingPolicy(PolicyPtr base)
    : Policy(base->cap()), base_(std::move(base)) {}

bool RejectingPolicy::ShouldStop(std::span<const double> prefix) const {
  return base_->ShouldStop(prefix);
}

int RejectingPolicy::Duration(std::span<const double> x) const {
  return base_->Duration(x);
}

bool RejectingPolicy::ShouldStopSum(int n, double sum) const {
  return base_->ShouldStopSum(n, sum);
}

std::string RejectingPolicy::Describe() const {
  return "reject(" + base_->Describe() + ")";
}

PolicyPtr MakeConstantPolicy(int duration, AcceptRule accept) {
  return std::make_shared<SumRulePolicy>(duration, StopRule{}, accept);
}

PolicyPtr MakeAllReject(int duration) {
  return MakeConstantPolicy(duration, AcceptRule{});
}

PolicyClass::PolicyClass(std::vector<PolicyPtr> policies)
    : policies_(std::move(policies)) {
  if (policies_.empty()) throw PreconditionError("empty policy class");
  for (std::size_t i = 1; i < policies_.size(); ++i) {
    if (policies_[i]->cap() < policies_[i - 1]->cap()) {
      throw PreconditionError("policy caps must be nondecreasing in index");
    }
  }
}

const Policy& PolicyClass::at(int k) const { return *ptr(k); }

PolicyPtr PolicyClass::ptr(int k) const {
  if (k < 1 || k > size()) {
    throw PreconditionError("policy index " + std::to_string(k) +
                            " out of range");
  }
  return policies_[static_cast<std::size_t>(k - 1)];
}

PolicyGenerator::PolicyGenerator(Factory factory, long long size_hint)
    : factory_(std::move(factory)),
      size_hint_(size_hint),
      cache_(std::make_shared<Cache>()) {}

PolicyPtr PolicyGenerator::At(long long k) const {
  if (k < 1) throw PreconditionError("policy index must be >= 1");
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->policies.find(k);
  if (it != cache_->policies.end()) return it->second;
  PolicyPtr p = factory_(k);
  if (!p) throw PreconditionError("generator returned no policy");
  if (k > 1) {
    auto prev = cache_->policies.find(k - 1);
    if (prev != cache_->policies.end() && prev->second->cap() > p->cap()) {
      throw PreconditionError("generator caps must be nondecreasing");
    }
  }
  cache_->policies.emplace(k, p);
  return p;
}

PolicyClass PolicyGenerator::Prefix(long long count) const {
  std::vector<PolicyPtr> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long k = 1; k <= count; ++k) out.push_back(At(k));
  return PolicyClass(std::move(out));
}

CappedHoeffdingFamily::CappedHoeffdingFamily(double c, long long K,
                                             long long N, double delta,
                                             std::vector<int> caps)
    : c_(c), K_(K), N_(N), delta_(delta), caps_(std::move(caps)) {
  if (!(c > 0.0)) throw PreconditionError("c must be positive");
  if (K < 1 || N < 1) throw PreconditionError("K and N must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("delta must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < caps_.size(); ++i) {
    if (caps_[i] < 1 || (i > 0 && caps_[i] < caps_[i - 1])) {
      throw PreconditionError("caps must be positive and nondecreasing");
    }
  }
  scale_ = c_ * std::sqrt(std::log(static_cast<double>(K_) *
                                   static_cast<double>(N_) / delta_));
}

double CappedHoeffdingFamily::Threshold(int n) const {
  return scale_ / std::sqrt(static_cast<double>(n));
}

int CappedHoeffdingFamily::CapOf(long long k) const {
  if (caps_.empty()) return static_cast<int>(k);
  if (k > static_cast<long long>(caps_.size())) {
    throw PreconditionError("no cap configured for index " + std::to_string(k));
  }
  return caps_[static_cast<std::size_t>(k - 1)];
}

PolicyPtr CappedHoeffdingFamily::Make(long long k) const {
  return std::make_shared<SumRulePolicy>(
      CapOf(k), StopRule{StopRule::Kind::kHoeffding, scale_},
      AcceptRule{AcceptRule::Kind::kHoeffding, scale_});
}

PolicyClass CappedHoeffdingFamily::Class() const {
  std::vector<PolicyPtr> out;
  for (long long k = 1; k <= K_; ++k) out.push_back(Make(k));
  return PolicyClass(std::move(out));
}

PolicyGenerator CappedHoeffdingFamily::Generator() const {
  CappedHoeffdingFamily copy = *this;
  return PolicyGenerator([copy](long long k) { return copy.Make(k); },
                         caps_.empty() ? K_ : static_cast<long long>(
                                                  caps_.size()));
}

int HoeffdingDuration(int cap, double c, long long K, long long N,
                      double delta, SampleStream& stream) {
  const CappedHoeffdingFamily family(c, K, N, delta);
  double sum = 0.0;
  for (int n = 1; n <= cap; ++n) {
    sum += stream.Draw();
    if (std::abs(sum / n) >= family.Threshold(n)) return n;
  }
  return cap;
}

bool HoeffdingDecision(int n, double c, long long K, long long N, double delta,
                       std::span<const double> prefix) {
  if (n < 1 || static_cast<std::size_t>(n) > prefix.size()) {
    throw PreconditionError("prefix shorter than n");
  }
  const CappedHoeffdingFamily family(c, K, N, delta);
  return Sum(prefix.first(static_cast<std::size_t>(n))) / n >=
         family.Threshold(n);
}

TaskOutcome RunPolicy(const Policy& policy, Task& task) {
  if (task.sample_cursor() != 0) {
    throw PreconditionError("RunPolicy needs a fresh task");
  }
  SampleStream& stream = task.stream();
  int d = 0;
  if (policy.DependsOnlyOnSum()) {
    double sum = 0.0;
    for (d = 1; d <= policy.cap(); ++d) {
      sum += stream.Draw();
      if (d == policy.cap() || policy.ShouldStopSum(d, sum)) break;
    }
  } else {
    for (d = 1; d <= policy.cap(); ++d) {
      stream.Draw();
      if (d == policy.cap() || policy.ShouldStop(stream.drawn())) break;
    }
  }
  TaskOutcome out;
  out.duration = d;
  out.decision = policy.Accept(stream.drawn().first(d));
  out.reward = out.decision ? task.mu() : 0.0;
  out.cost = d;
  return out;
}

OversampledOutcome RunPolicyOversampled(const Policy& policy, int block,
                                        Task& task) {
  if (block < policy.cap()) {
    throw PreconditionError("oversampling block smaller than the policy cap");
  }
  if (task.sample_cursor() != 0) {
    throw PreconditionError("RunPolicyOversampled needs a fresh task");
  }
  task.stream().DrawUntil(2 * static_cast<std::size_t>(block));
  OversampledOutcome out;
  out.block = block;
  out.samples.assign(task.stream().drawn().begin(),
                     task.stream().drawn().end());
  const auto first = out.first_block();
  out.duration = policy.Duration(first);
  out.decision = policy.Accept(first.first(out.duration));
  out.reward = out.decision ? task.mu() : 0.0;
  out.cost = 2.0 * block;
  return out;
}

}  // namespace perpolicy
