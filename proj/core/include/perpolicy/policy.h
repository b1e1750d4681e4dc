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

#ifndef PERPOLICY_POLICY_H_
#define PERPOLICY_POLICY_H_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perpolicy/environment.h"

namespace perpolicy {

// A (duration, decision) pair. Duration is a stopping rule capped at `cap()`;
// decision looks only at the samples observed up to the stopping time.
//
// Both hooks receive nothing but the observed prefix, which makes
// prefix-measurability hold by construction for every subclass.
class Policy {
 public:
  explicit Policy(int cap);
  virtual ~Policy() = default;

  int cap() const { return cap_; }

  // Whether to stop after observing `prefix` (1 <= prefix.size() < cap).
  virtual bool ShouldStop(std::span<const double> prefix) const = 0;
  // accept(n, x) with n = prefix.size().
  virtual bool Accept(std::span<const double> prefix) const = 0;

  // tau(x): the first n with ShouldStop(x[0..n)) or n == cap. Throws
  // PreconditionError if `x` is exhausted before the policy stops.
  virtual int Duration(std::span<const double> x) const;
  // accept(tau(x), x).
  bool Decide(std::span<const double> x) const;

  // Policies whose hooks depend on the prefix only through (length, sum)
  // implement the two methods below; the exact oracle then runs a dynamic
  // program over partial sums instead of enumerating paths.
  virtual bool DependsOnlyOnSum() const { return false; }
  virtual bool ShouldStopSum(int n, double sum) const;
  virtual bool AcceptSum(int n, double sum) const;

  virtual std::string Describe() const = 0;

 private:
  int cap_;
};

using PolicyPtr = std::shared_ptr<const Policy>;

// Mean-threshold rules evaluated on (n, sum).
struct StopRule {
  enum class Kind { kNever, kAbsMeanAtLeast, kHoeffding };
  Kind kind = Kind::kNever;
  // kAbsMeanAtLeast: |mean| >= level. kHoeffding: |mean| >= level / sqrt(n).
  double level = 0.0;

  bool Holds(int n, double sum) const;
};

struct AcceptRule {
  enum class Kind { kNever, kAlways, kMeanAtLeast, kHoeffding };
  Kind kind = Kind::kNever;
  // kMeanAtLeast: mean >= level. kHoeffding: mean >= level / sqrt(n).
  double level = 0.0;

  bool Holds(int n, double sum) const;
};

class SumRulePolicy final : public Policy {
 public:
  SumRulePolicy(int cap, StopRule stop, AcceptRule accept);

  bool ShouldStop(std::span<const double> prefix) const override;
  bool Accept(std::span<const double> prefix) const override;
  int Duration(std::span<const double> x) const override;
  bool DependsOnlyOnSum() const override { return true; }
  bool ShouldStopSum(int n, double sum) const override;
  bool AcceptSum(int n, double sum) const override;
  std::string Describe() const override;

  const StopRule& stop_rule() const { return stop_; }
  const AcceptRule& accept_rule() const { return accept_; }

 private:
  StopRule stop_;
  AcceptRule accept_;
};

// User-defined policy from two prefix callbacks.
class FunctionPolicy final : public Policy {
 public:
  using Hook = std::function<bool(std::span<const double>)>;

  FunctionPolicy(int cap, Hook stop, Hook accept, std::string name = "custom");

  bool ShouldStop(std::span<const double> prefix) const override;
  bool Accept(std::span<const double> prefix) const override;
  std::string Describe() const override { return name_; }

 private:
  Hook stop_;
  Hook accept_;
  std::string name_;
};

// (tau, 0): same duration as the wrapped policy, always rejects.
class RejectingPolicy final : public Policy {
 public:
  explicit RejectingPolicy(PolicyPtr base);

  bool ShouldStop(std::span<const double> prefix) const override;
  bool Accept(std::span<const double>) const override { return false; }
  int Duration(std::span<const double> x) const override;
  bool DependsOnlyOnSum() const override { return base_->DependsOnlyOnSum(); }
  bool ShouldStopSum(int n, double sum) const override;
  bool AcceptSum(int, double) const override { return false; }
  std::string Describe() const override;

 private:
  PolicyPtr base_;
};

PolicyPtr MakeConstantPolicy(int duration, AcceptRule accept);
// (d, 0): draws exactly d samples and rejects.
PolicyPtr MakeAllReject(int duration);

// Finite class pi_1..pi_K, indexed from 1, caps nondecreasing.
class PolicyClass {
 public:
  PolicyClass() = default;
  // Throws PreconditionError if caps decrease or the list is empty.
  explicit PolicyClass(std::vector<PolicyPtr> policies);

  int size() const { return static_cast<int>(policies_.size()); }
  const Policy& at(int k) const;
  PolicyPtr ptr(int k) const;
  int cap(int k) const { return at(k).cap(); }
  int max_cap() const { return policies_.back()->cap(); }

 private:
  std::vector<PolicyPtr> policies_;
};

// Countable class k -> pi_k with nondecreasing caps. Copies share one
// thread-safe memo table.
class PolicyGenerator {
 public:
  using Factory = std::function<PolicyPtr(long long k)>;

  // `size_hint` bounds the indices used for benchmark evaluation; 0 means
  // the class is genuinely unbounded.
  explicit PolicyGenerator(Factory factory, long long size_hint = 0);

  PolicyPtr At(long long k) const;
  int Cap(long long k) const { return At(k)->cap(); }
  long long size_hint() const { return size_hint_; }
  // pi_1..pi_K as a finite class.
  PolicyClass Prefix(long long count) const;

 private:
  struct Cache {
    std::mutex mu;
    std::map<long long, PolicyPtr> policies;
  };

  Factory factory_;
  long long size_hint_;
  std::shared_ptr<Cache> cache_;
};

// The capped-Hoeffding class
//   tau_k(x) = min(D_k, inf{n : |mean_n| >= c sqrt(ln(K N / delta) / n)})
//   accept(n, x) = 1{mean_n >= c sqrt(ln(K N / delta) / n)}
// with D_k = k unless explicit caps are given.
class CappedHoeffdingFamily {
 public:
  CappedHoeffdingFamily(double c, long long K, long long N, double delta,
                        std::vector<int> caps = {});

  // c * sqrt(ln(K N / delta)); the threshold at n is scale() / sqrt(n).
  double scale() const { return scale_; }
  double Threshold(int n) const;
  int CapOf(long long k) const;

  PolicyPtr Make(long long k) const;
  PolicyClass Class() const;  // pi_1..pi_K
  PolicyGenerator Generator() const;

  long long K() const { return K_; }

 private:
  double c_;
  long long K_;
  long long N_;
  double delta_;
  std::vector<int> caps_;
  double scale_;
};

// Free-function forms of the two Hoeffding rules.
int HoeffdingDuration(int cap, double c, long long K, long long N,
                      double delta, SampleStream& stream);
bool HoeffdingDecision(int n, double c, long long K, long long N, double delta,
                       std::span<const double> prefix);

struct TaskOutcome {
  int duration = 0;
  bool decision = false;
  double reward = 0.0;  // mu * decision; evaluation only
  double cost = 0.0;    // duration
};

struct OversampledOutcome {
  int block = 0;
  std::vector<double> samples;  // 2 * block entries
  int duration = 0;             // computed on the first block only
  bool decision = false;
  double reward = 0.0;
  double cost = 0.0;  // 2 * block

  std::span<const double> first_block() const {
    return std::span<const double>(samples).first(block);
  }
  std::span<const double> second_block() const {
    return std::span<const double>(samples).subspan(block, block);
  }
};

// Runs the policy on a fresh task, drawing samples one at a time.
TaskOutcome RunPolicy(const Policy& policy, Task& task);

// Draws 2 * block samples; duration and decision see only the first block.
// Throws PreconditionError if block < policy.cap().
OversampledOutcome RunPolicyOversampled(const Policy& policy, int block,
                                        Task& task);

}  // namespace perpolicy

#endif  // PERPOLICY_POLICY_H_
