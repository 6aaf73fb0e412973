#pragma once

#include <stdexcept>
#include <string>

namespace metaphor {

// Bad caller input: empty lists, mismatched dimensions, unknown names.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misconfiguration detected before or during a run (missing API key,
// provider-id mismatch, unknown provider name).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file content that cannot be collected row-wise.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistic that is mathematically undefined for the given input
// (single-class AUC, constant Spearman input, alpha without pairable units).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical failure of a model fit (rank deficiency, degenerate transform).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_io(const std::string& what, const std::string& path);

}  // namespace metaphor
