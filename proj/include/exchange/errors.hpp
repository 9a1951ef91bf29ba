// Copyright 2026 The exchange-clear Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exchange {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string message;
  std::vector<std::string> agents;
  std::vector<std::string> items;

  std::string to_string() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

class InvalidMarket : public Error {
 public:
  explicit InvalidMarket(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class UnknownAgent : public Error {
 public:
  explicit UnknownAgent(const std::string& id)
      : Error("unknown agent '" + id + "'") {}
};

class UnknownItem : public Error {
 public:
  explicit UnknownItem(const std::string& id)
      : Error("unknown item '" + id + "'") {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when an exhaustive search would exceed its configured size guard.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Malformed or schema-violating document. `where` names the offending
// line or field path.
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace exchange
