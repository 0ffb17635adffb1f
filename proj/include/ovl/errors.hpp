#pragma once

#include <stdexcept>

namespace ovl {

// Error kinds thrown by the library. Each names the violated precondition so
// callers (and tests) can catch the specific failure rather than a generic
// exception.

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SupportViolation : std::domain_error {
  using std::domain_error::domain_error;
};
struct ZeroVector : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NonPositiveSigma : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptyBatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptySample : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IndexOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct InvalidDistribution : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConstraintViolated : std::domain_error {
  using std::domain_error::domain_error;
};

struct DuplicateClass : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UnknownSuperclass : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NameCollision : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct MissingEmbedding : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientSamples : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownClass : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DegenerateSum : std::domain_error {
  using std::domain_error::domain_error;
};
struct LabelOutsideClassSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidLearningRate : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyList : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DisjointnessViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptyGenerated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyTestSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UnknownVariant : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
// A file's JSON did not match the expected schema (unknown key, wrong type,
// missing field, or inconsistent dimensions).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A referenced input file could not be opened.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ovl
