#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace abba {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record source could not be parsed. line() is 1-based; 0 when unknown.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input parsed but violates a documented invariant (duplicate id, bounds, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Simulation or planner configuration is inconsistent. field() names the culprit.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A ratio estimator hit a zero denominator. term() names the zero quantity.
class UndefinedRatioError : public Error {
 public:
  UndefinedRatioError(std::string estimator, std::string term)
      : Error(estimator + " is undefined: " + term + " is zero"),
        estimator_(std::move(estimator)),
        term_(std::move(term)) {}
  const std::string& estimator() const noexcept { return estimator_; }
  const std::string& term() const noexcept { return term_; }

 private:
  std::string estimator_;
  std::string term_;
};

// Too many bootstrap replicates were undefined to form an interval.
class DegenerateBootstrapError : public Error {
 public:
  using Error::Error;
};

// Semi-supervised estimation was asked for records lacking soft_tp_prob.
class MissingSoftLabelsError : public Error {
 public:
  explicit MissingSoftLabelsError(std::vector<std::string> ids)
      : Error(describe(ids)), ids_(std::move(ids)) {}
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  static std::string describe(const std::vector<std::string>& ids) {
    std::string msg = std::to_string(ids.size()) + " record(s) lack soft_tp_prob:";
    const std::size_t shown = ids.size() < 10 ? ids.size() : 10;
    for (std::size_t i = 0; i < shown; ++i) msg += " " + ids[i];
    if (ids.size() > shown) msg += " ...";
    return msg;
  }
  std::vector<std::string> ids_;
};

}  // namespace abba
