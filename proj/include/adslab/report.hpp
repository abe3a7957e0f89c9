#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adslab/errors.hpp"

namespace adslab {

inline constexpr const char* kVersion = "0.1.0";

// How the expected value of a row is known: closed forms and error paths
// ("trivial"), an independent computation ("derived"), or a quantitative
// statement of the theory being checked ("theory").
enum class Basis { kTrivial, kDerived, kTheory };

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::kTrivial: return "trivial";
    case Basis::kDerived: return "derived";
    case Basis::kTheory: return "theory";
  }
  return "unknown";
}

struct Check {
  std::string name;
  double value = 0;
  nlohmann::ordered_json expected;  // {"near": x} | {"min": a, "max": b} | {"holds": true}
  double tolerance = 0;
  Basis basis = Basis::kTrivial;
  bool pass = false;
};

struct StageError {
  ErrorKind kind;
  std::string message;
};

class RunReport {
 public:
  explicit RunReport(std::string command) : command_(std::move(command)) {}

  const std::string& command() const { return command_; }
  const std::vector<Check>& checks() const { return checks_; }
  const std::optional<StageError>& error() const { return error_; }
  nlohmann::ordered_json& data() { return data_; }

  bool near(const std::string& name, double value, double expected, double tol, Basis basis) {
    return add({name, value, {{"near", expected}}, tol, basis, std::abs(value - expected) <= tol});
  }
  bool at_most(const std::string& name, double value, double bound, Basis basis, double tol = 0) {
    return add({name, value, {{"max", bound}}, tol, basis, value <= bound + tol});
  }
  bool at_least(const std::string& name, double value, double bound, Basis basis, double tol = 0) {
    return add({name, value, {{"min", bound}}, tol, basis, value >= bound - tol});
  }
  bool within(const std::string& name, double value, double lo, double hi, Basis basis, double tol = 0) {
    return add({name, value, {{"min", lo}, {"max", hi}}, tol, basis, value >= lo - tol && value <= hi + tol});
  }
  // Boolean property; value is 1 when it holds.
  bool holds(const std::string& name, bool ok, Basis basis) {
    return add({name, ok ? 1.0 : 0.0, {{"holds", true}}, 0.0, basis, ok});
  }

  void record(Check c) { add(std::move(c)); }
  void fail_with(const Error& e) { error_ = StageError{e.kind(), e.what()}; }
  void skip(const std::string& stage, const std::string& reason) { skipped_.push_back({stage, reason}); }
  void artifact(const std::string& path) { artifacts_.push_back(path); }
  // Appends a stage's rows under the prefix "<prefix>.".
  void merge(const RunReport& stage, const std::string& prefix);

  bool passed() const {
    if (error_) return false;
    for (const auto& c : checks_)
      if (!c.pass) return false;
    return true;
  }

  // 0 when every check passes; the error's code when a stage threw; 1 for a
  // failed check.
  int exit_code() const {
    if (error_) return adslab::exit_code(error_->kind);
    return passed() ? 0 : 1;
  }

  nlohmann::ordered_json to_json(const nlohmann::ordered_json& config) const;

 private:
  bool add(Check c) {
    checks_.push_back(std::move(c));
    return checks_.back().pass;
  }

  std::string command_;
  std::vector<Check> checks_;
  std::optional<StageError> error_;
  std::vector<std::pair<std::string, std::string>> skipped_;
  std::vector<std::string> artifacts_;
  nlohmann::ordered_json data_ = nlohmann::ordered_json::object();
};

inline void RunReport::merge(const RunReport& stage, const std::string& prefix) {
  for (const auto& c : stage.checks_) {
    Check copy = c;
    copy.name = prefix + "." + c.name;
    checks_.push_back(std::move(copy));
  }
  for (const auto& a : stage.artifacts_) artifacts_.push_back(prefix + "/" + a);
  for (const auto& s : stage.skipped_) skipped_.push_back(s);
  if (!stage.data_.empty()) data_[prefix] = stage.data_;
  if (stage.error_ && !error_) error_ = StageError{stage.error_->kind, prefix + ": " + stage.error_->message};
}

// Build and runtime facts that can change numeric output. Nothing here varies
// between two runs on the same machine.
inline nlohmann::ordered_json environment_fingerprint() {
  nlohmann::ordered_json j;
  j["adslab"] = kVersion;
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  j["cplusplus"] = static_cast<long>(__cplusplus);
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  const char* cap = std::getenv("ADSLAB_THREADS");
  j["threads_cap"] = cap ? cap : "";
  return j;
}

inline nlohmann::ordered_json RunReport::to_json(const nlohmann::ordered_json& config) const {
  nlohmann::ordered_json j;
  j["command"] = command_;
  j["config"] = config;
  j["environment"] = environment_fingerprint();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& c : checks_) {
    nlohmann::ordered_json r;
    r["name"] = c.name;
    r["value"] = c.value;
    r["expected"] = c.expected;
    r["tolerance"] = c.tolerance;
    r["provenance"] = to_string(c.basis);
    r["pass"] = c.pass;
    rows.push_back(std::move(r));
  }
  j["checks"] = std::move(rows);
  j["data"] = data_;
  j["artifacts"] = artifacts_;
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (const auto& [stage, reason] : skipped_) skipped.push_back({{"stage", stage}, {"reason", reason}});
  j["skipped"] = std::move(skipped);
  if (error_)
    j["error"] = {{"kind", std::string(to_string(error_->kind))}, {"message", error_->message}};
  else
    j["error"] = nullptr;
  j["pass"] = passed();
  j["exit_code"] = exit_code();
  return j;
}

// Rejects keys outside the allowed set, so typos fail loudly.
inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::kInvalidInput, where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail(ErrorKind::kInvalidInput, where + ": unknown key '" + key + "'");
}

template <class T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, "key '" + key + "': " + e.what());
  }
}

}  // namespace adslab
