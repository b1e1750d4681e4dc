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

#ifndef PERPOLICY_ERRORS_H_
#define PERPOLICY_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace perpolicy {

// Invalid user-supplied configuration. `fields` names every offending entry
// using dotted paths ("algorithm.delta").
class ConfigError : public std::invalid_argument {
 public:
  struct Issue {
    std::string field;
    std::string message;
  };

  explicit ConfigError(std::vector<Issue> issues);
  ConfigError(std::string field, std::string message);

  const std::vector<Issue>& issues() const { return issues_; }

 private:
  static std::string Format(const std::vector<Issue>& issues);
  std::vector<Issue> issues_;
};

// A caller broke an operation's documented precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A computation refused to run because it would exceed a resource guard
// (path enumeration limit, sweep size, ...).
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ratio requested while a cost lower bound is not positive.
class NonPositiveCostBound : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace perpolicy

#endif  // PERPOLICY_ERRORS_H_
