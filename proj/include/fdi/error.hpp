#pragma once

#include <stdexcept>
#include <string>

namespace fdi {

// Base for every domain failure. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string source, int line)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }

 private:
  std::string source_;
  int line_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iterations, double final_mismatch)
      : Error(what), iterations_(iterations), final_mismatch_(final_mismatch) {}

  int iterations() const noexcept { return iterations_; }
  double final_mismatch() const noexcept { return final_mismatch_; }

 private:
  int iterations_;
  double final_mismatch_;
};

class UnobservableError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class InfeasibleDesignError : public Error {
 public:
  using Error::Error;
};

class AttackInfeasibleError : public Error {
 public:
  AttackInfeasibleError(const std::string& what, int iterations, double final_residual)
      : Error(what), iterations_(iterations), final_residual_(final_residual) {}

  int iterations() const noexcept { return iterations_; }
  double final_residual() const noexcept { return final_residual_; }

 private:
  int iterations_;
  double final_residual_;
};

class DegenerateAreaError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, int row)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  int row() const noexcept { return row_; }

 private:
  int row_;
};

class PairingError : public Error {
 public:
  using Error::Error;
};

}  // namespace fdi
