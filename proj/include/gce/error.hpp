#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gce {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class MissingColumn : public Error {
public:
  explicit MissingColumn(std::string column)
      : Error("missing column '" + column + "'"), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

private:
  std::string column_;
};

class UnknownCategory : public Error {
public:
  UnknownCategory(std::size_t row, std::string feature, const std::string& label)
      : Error("row " + std::to_string(row) + ", feature '" + feature +
              "': unknown category '" + label + "'"),
        row_(row), feature_(std::move(feature)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& feature() const noexcept { return feature_; }

private:
  std::size_t row_;
  std::string feature_;
};

class UnparsableNumber : public Error {
public:
  UnparsableNumber(std::size_t row, std::string feature, const std::string& text)
      : Error("row " + std::to_string(row) + ", feature '" + feature +
              "': cannot parse '" + text + "' as a finite number"),
        row_(row), feature_(std::move(feature)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& feature() const noexcept { return feature_; }

private:
  std::size_t row_;
  std::string feature_;
};

class DegenerateFeature : public Error {
public:
  explicit DegenerateFeature(std::string feature)
      : Error("feature '" + feature + "' has a single distinct value; cannot bin"),
        feature_(std::move(feature)) {}
  const std::string& feature() const noexcept { return feature_; }

private:
  std::string feature_;
};

class ThresholdBelowFloor : public Error {
public:
  ThresholdBelowFloor(double threshold, std::size_t rows)
      : Error("support threshold " + std::to_string(threshold) + " is below 1/" +
              std::to_string(rows)),
        threshold_(threshold), rows_(rows) {}
  double threshold() const noexcept { return threshold_; }
  std::size_t rows() const noexcept { return rows_; }

private:
  double threshold_;
  std::size_t rows_;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class EncodingMismatch : public Error {
public:
  EncodingMismatch(std::string feature, const std::string& why)
      : Error("input encoding for feature '" + feature + "': " + why),
        feature_(std::move(feature)) {}
  const std::string& feature() const noexcept { return feature_; }

private:
  std::string feature_;
};

// apply_then called on a row the triple does not cover.
class NotCovered : public Error {
public:
  NotCovered() : Error("row does not satisfy the triple's If conditions") {}
};

class NormalizerViolation : public Error {
public:
  using Error::Error;
};

class IncompatibleRuns : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& why)
      : Error(field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace gce
