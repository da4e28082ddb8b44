#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace msmax {

enum class Status { pass, fail, evidence };

std::string to_string(Status s);

/// One asserted or reported outcome inside a check.
struct Finding {
  std::string name;
  Status status = Status::evidence;
  std::string detail;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
};

/// A named numeric constant with the object that attains it.
struct ConstantEntry {
  std::string name;
  double value = 0.0;
  std::string witness;
  std::string family;
  int level = -1;
};

struct VerificationReport {
  std::string check;
  nlohmann::ordered_json scenario = nlohmann::ordered_json::object();
  unsigned long long seed = 0;
  double runtime_seconds = 0.0;
  std::vector<Finding> findings;
  std::vector<ConstantEntry> constants;

  Finding& add(std::string name, Status status, std::string detail = {});
  /// Adds a pass/fail finding from a boolean.
  Finding& expect(std::string name, bool ok, std::string detail = {});
  void add_constant(ConstantEntry c) { constants.push_back(std::move(c)); }
  /// Appends another report's findings and constants, prefixing names.
  void merge(const VerificationReport& other, const std::string& prefix);

  bool passed() const;
  std::size_t failures() const;

  nlohmann::ordered_json to_json(bool with_runtime = true) const;
  /// name,value,family,level,witness
  std::string constants_csv() const;
};

}  // namespace msmax
