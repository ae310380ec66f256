#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace liberata {

/* Every library error carries a stable machine-readable kind slug so the CLI
   can emit structured reports without string-matching what() text. */
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

class ParseError : public Error {
public:
  ParseError(std::string file, long line, const std::string& message)
      : Error("parse_error", file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)), line_(line) {}
  const std::string& file() const { return file_; }
  long line() const { return line_; }

private:
  std::string file_;
  long line_;
};

class ValidationError : public Error {
public:
  ValidationError(std::string invariant, std::string entity, const std::string& message)
      : Error("validation_error", message),
        invariant_(std::move(invariant)), entity_(std::move(entity)) {}
  const std::string& invariant() const { return invariant_; }
  const std::string& entity() const { return entity_; }

private:
  std::string invariant_;
  std::string entity_;
};

struct UnknownEntity : Error {
  explicit UnknownEntity(const std::string& id)
      : Error("unknown_entity", "unknown entity: " + id) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

struct EmptyDistribution : Error {
  EmptyDistribution() : Error("empty_distribution", "distribution has no values") {}
};

struct ExpansionRefused : Error {
  explicit ExpansionRefused(long side)
      : Error("expansion_refused",
              "refusing dense expansion at side " + std::to_string(side)) {}
};

struct MissingData : Error {
  explicit MissingData(const std::string& message) : Error("missing_data", message) {}
};

struct InvalidPipeline : Error {
  explicit InvalidPipeline(const std::string& message)
      : Error("invalid_pipeline", message) {}
};

struct ConvergenceFailure : Error {
  explicit ConvergenceFailure(const std::string& message)
      : Error("convergence_failure", message) {}
};

struct DisconnectedGraph : Error {
  explicit DisconnectedGraph(const std::string& message)
      : Error("disconnected_graph", message) {}
};

struct NotSymmetric : Error {
  NotSymmetric() : Error("not_symmetric", "matrix is not symmetric") {}
};

struct ZeroTotal : Error {
  explicit ZeroTotal(const std::string& message) : Error("zero_total", message) {}
};

struct EmptyPortfolio : Error {
  EmptyPortfolio() : Error("empty_portfolio", "selector matched no holdings") {}
};

struct NoTransactions : Error {
  explicit NoTransactions(const std::string& message)
      : Error("no_transactions", message) {}
};

struct EmptyCollection : Error {
  explicit EmptyCollection(const std::string& name)
      : Error("empty_collection", "collection matches no manuscripts: " + name) {}
};

struct ZeroAuthors : Error {
  explicit ZeroAuthors(const std::string& name)
      : Error("zero_authors", "collection has no authors: " + name) {}
};

struct InsufficientHistory : Error {
  explicit InsufficientHistory(const std::string& message)
      : Error("insufficient_history", message) {}
};

struct MissingRegionData : Error {
  explicit MissingRegionData(const std::string& region)
      : Error("missing_region_data", "no region record for: " + region) {}
};

struct InvalidParams : Error {
  explicit InvalidParams(const std::string& message)
      : Error("invalid_params", message) {}
};

struct UsageError : Error {
  explicit UsageError(const std::string& message) : Error("usage_error", message) {}
};

}  // namespace liberata
