#pragma once

// JSON (de)serialization for datasets, checkpoints, metrics, and reports.
//
// All writers are deterministic: given identical in-memory values they emit
// identical bytes, which is what makes CLI reruns byte-identical. Object keys
// keep insertion order (nlohmann ordered_json) so the layout is stable.

#include <cstdint>
#include <string>
#include <vector>

#include "ovl/alignment.hpp"
#include "ovl/bounds.hpp"
#include "ovl/core_math.hpp"
#include "ovl/evalbench.hpp"
#include "ovl/model.hpp"

namespace ovl {

/// One class entry of a dataset file: identity, taxonomy parent, text
/// embedding, and whether the class is a training ("base") or held-out
/// ("new") class.
struct DatasetClass {
  std::string name;
  std::string superclass;
  FeatureVector embedding;  // normalized on load
  std::string role;         // "base" or "new"
};

/// In-memory form of a dataset file. Class ids are assigned by file order
/// (the order of the "classes" array), so a round trip preserves ids.
struct Dataset {
  int d = 0;
  std::vector<DatasetClass> classes;
  SampleSet samples;  // class ids index into `classes`

  int class_id(const std::string& name) const;  // UnknownClass if absent
};

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);  // SchemaError

/// Parse a dataset from JSON text. Validates the schema fail-closed: unknown
/// keys, missing fields, wrong types, inconsistent dimensions, duplicate
/// class names, unknown sample classes, and invalid roles all raise
/// SchemaError. Class embeddings are normalized (ZeroVector if a norm is
/// below 1e-12).
Dataset parse_dataset(const std::string& text);

/// Serialize a dataset. parse_dataset(serialize_dataset(ds)) == ds.
std::string serialize_dataset(const Dataset& ds);

std::string serialize_checkpoint(const PromptParams& params);
PromptParams parse_checkpoint(const std::string& text);  // SchemaError

/// Metrics serialize as JSON lines: one object per iteration
/// {iter, l_ce, l_kl, l_mmd, l_total, aligned}.
std::string serialize_metrics(const EpochMetrics& metrics);

/// BoundCheckReport serializes with exactly the seven public fields:
/// trials, violations, violation_rate, delta, mean_lhs, mean_bound, seed.
std::string serialize_bound_report(const BoundCheckReport& report);

std::string serialize_reports(const std::vector<EvalReport>& reports);

/// Benchmark config files are fail-closed like datasets: every key must be a
/// known BenchmarkConfig field and all fields must be present, so a config
/// file pins the complete fixture. The parsed config is validate()d.
BenchmarkConfig parse_benchmark_config(const std::string& text);
std::string serialize_benchmark_config(const BenchmarkConfig& cfg);

/// File helpers. read_text_file raises FileError when the file cannot be
/// opened; write_text_file raises FileError when the file cannot be written.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ovl
