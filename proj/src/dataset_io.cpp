#include "ovl/dataset_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ovl/errors.hpp"

namespace ovl {

using json = nlohmann::ordered_json;

namespace {

// Fail-closed key check: every present key must be expected.
void require_keys(const json& obj, const std::set<std::string>& expected,
                  const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (expected.find(key) == expected.end()) {
      throw SchemaError("unknown key '" + key + "' in " + where);
    }
  }
  for (const std::string& key : expected) {
    if (!obj.contains(key)) {
      throw SchemaError("missing key '" + key + "' in " + where);
    }
  }
}

FeatureVector parse_vector(const json& arr, int expected_d,
                           const std::string& where) {
  if (!arr.is_array() || arr.empty()) {
    throw SchemaError(where + " must be a nonempty array of numbers");
  }
  if (expected_d > 0 && static_cast<int>(arr.size()) != expected_d) {
    throw SchemaError(where + " has length " + std::to_string(arr.size()) +
                      ", expected " + std::to_string(expected_d));
  }
  FeatureVector v(static_cast<int>(arr.size()));
  for (int i = 0; i < static_cast<int>(arr.size()); ++i) {
    const json& x = arr[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw SchemaError(where + " holds a non-number");
    v[i] = x.get<double>();
  }
  return v;
}

json vector_to_json(const FeatureVector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& where) {
  if (!obj[key].is_string()) {
    throw SchemaError(std::string("key '") + key + "' in " + where +
                      " must be a string");
  }
  return obj[key].get<std::string>();
}

json parse_text(const std::string& text, const std::string& what) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) throw SchemaError(what + " is not valid JSON");
  return root;
}

}  // namespace

int Dataset::class_id(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(classes.size()); ++i) {
    if (classes[static_cast<std::size_t>(i)].name == name) return i;
  }
  throw UnknownClass("no class named '" + name + "' in dataset");
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Seen:
      return "Seen";
    case Provenance::GeneratedUnseen:
      return "GeneratedUnseen";
    case Provenance::GeneratedSeen:
      return "GeneratedSeen";
  }
  throw InvalidParams("unhandled provenance value");
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "Seen") return Provenance::Seen;
  if (name == "GeneratedUnseen") return Provenance::GeneratedUnseen;
  if (name == "GeneratedSeen") return Provenance::GeneratedSeen;
  throw SchemaError("unknown provenance '" + name + "'");
}

Dataset parse_dataset(const std::string& text) {
  const json root = parse_text(text, "dataset");
  require_keys(root, {"meta", "classes", "samples"}, "dataset");
  require_keys(root["meta"], {"d"}, "dataset.meta");
  if (!root["meta"]["d"].is_number_integer()) {
    throw SchemaError("dataset.meta.d must be an integer");
  }

  Dataset ds;
  ds.d = root["meta"]["d"].get<int>();
  if (ds.d < 1) throw SchemaError("dataset.meta.d must be positive");

  if (!root["classes"].is_array() || root["classes"].empty()) {
    throw SchemaError("dataset.classes must be a nonempty array");
  }
  std::map<std::string, int> ids;
  for (const json& entry : root["classes"]) {
    require_keys(entry, {"name", "superclass", "embedding", "role"},
                 "dataset class entry");
    DatasetClass cls;
    cls.name = require_string(entry, "name", "class entry");
    cls.superclass = require_string(entry, "superclass", "class entry");
    cls.role = require_string(entry, "role", "class entry");
    if (cls.role != "base" && cls.role != "new") {
      throw SchemaError("class role must be 'base' or 'new', got '" + cls.role +
                        "'");
    }
    cls.embedding =
        parse_vector(entry["embedding"], ds.d, "embedding of '" + cls.name + "'");
    const double norm = cls.embedding.norm();
    if (norm < 1e-12) {
      throw ZeroVector("embedding of '" + cls.name + "' has zero norm");
    }
    cls.embedding /= norm;
    if (ids.count(cls.name) != 0) {
      throw SchemaError("duplicate class name '" + cls.name + "'");
    }
    ids[cls.name] = static_cast<int>(ds.classes.size());
    ds.classes.push_back(std::move(cls));
  }

  if (!root["samples"].is_array()) {
    throw SchemaError("dataset.samples must be an array");
  }
  for (const json& entry : root["samples"]) {
    require_keys(entry, {"class", "feature", "provenance"}, "dataset sample");
    const std::string cls = require_string(entry, "class", "sample");
    const auto it = ids.find(cls);
    if (it == ids.end()) {
      throw SchemaError("sample references unknown class '" + cls + "'");
    }
    Sample s;
    s.class_id = it->second;
    s.feature = parse_vector(entry["feature"], ds.d, "feature of a sample");
    s.provenance =
        provenance_from_name(require_string(entry, "provenance", "sample"));
    ds.samples.add(std::move(s));
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  json root;
  root["meta"] = {{"d", ds.d}};
  json classes = json::array();
  for (const DatasetClass& cls : ds.classes) {
    json entry;
    entry["name"] = cls.name;
    entry["superclass"] = cls.superclass;
    entry["embedding"] = vector_to_json(cls.embedding);
    entry["role"] = cls.role;
    classes.push_back(std::move(entry));
  }
  root["classes"] = std::move(classes);
  json samples = json::array();
  for (const Sample& s : ds.samples.samples()) {
    json entry;
    entry["class"] = ds.classes[static_cast<std::size_t>(s.class_id)].name;
    entry["feature"] = vector_to_json(s.feature);
    entry["provenance"] = provenance_name(s.provenance);
    samples.push_back(std::move(entry));
  }
  root["samples"] = std::move(samples);
  return root.dump(2) + "\n";
}

std::string serialize_checkpoint(const PromptParams& params) {
  json root;
  root["v1"] = vector_to_json(params.v1);
  root["v2"] = vector_to_json(params.v2);
  return root.dump(2) + "\n";
}

PromptParams parse_checkpoint(const std::string& text) {
  const json root = parse_text(text, "checkpoint");
  require_keys(root, {"v1", "v2"}, "checkpoint");
  PromptParams params;
  params.v1 = parse_vector(root["v1"], 0, "checkpoint v1");
  params.v2 = parse_vector(root["v2"], 0, "checkpoint v2");
  if (params.v1.size() != params.v2.size()) {
    throw SchemaError("checkpoint v1 and v2 have different lengths");
  }
  return params;
}

std::string serialize_metrics(const EpochMetrics& metrics) {
  std::string out;
  for (const EpochMetricsRow& row : metrics) {
    json line;
    line["iter"] = row.iter;
    line["l_ce"] = row.l_ce;
    line["l_kl"] = row.l_kl;
    line["l_mmd"] = row.l_mmd;
    line["l_total"] = row.l_total;
    line["aligned"] = row.aligned;
    out += line.dump();
    out += "\n";
  }
  return out;
}

std::string serialize_bound_report(const BoundCheckReport& report) {
  json root;
  root["trials"] = report.trials;
  root["violations"] = report.violations;
  root["violation_rate"] = report.violation_rate;
  root["delta"] = report.delta;
  root["mean_lhs"] = report.mean_lhs;
  root["mean_bound"] = report.mean_bound;
  root["seed"] = report.seed;
  return root.dump(2) + "\n";
}

std::string serialize_reports(const std::vector<EvalReport>& reports) {
  json arr = json::array();
  for (const EvalReport& r : reports) {
    json entry;
    entry["variant"] = r.variant;
    entry["seed"] = r.seed;
    entry["acc_base"] = r.acc_base;
    entry["acc_new"] = r.acc_new;
    entry["h"] = r.h;
    entry["dis"] = r.dis;
    arr.push_back(std::move(entry));
  }
  return arr.dump(2) + "\n";
}

namespace {

double require_number(const json& obj, const char* key) {
  if (!obj[key].is_number()) {
    throw SchemaError(std::string("benchmark config key '") + key +
                      "' must be a number");
  }
  return obj[key].get<double>();
}

int require_int(const json& obj, const char* key) {
  if (!obj[key].is_number_integer()) {
    throw SchemaError(std::string("benchmark config key '") + key +
                      "' must be an integer");
  }
  return obj[key].get<int>();
}

}  // namespace

BenchmarkConfig parse_benchmark_config(const std::string& text) {
  const json root = parse_text(text, "benchmark config");
  require_keys(root,
               {"version",          "d",
                "n_base",           "n_new",
                "n_superclasses",   "embedding_seed",
                "domain_residual_scale", "train_per_class",
                "test_per_class",   "sample_noise_sigma",
                "tau",              "alpha",
                "beta",             "k0",
                "k1",               "k2",
                "k3",               "period",
                "lr",               "batch_size",
                "epochs",           "mmd_sigma",
                "gen_noise_sigma",  "gen_unseen_per_class",
                "gen_seen_per_class"},
               "benchmark config");
  BenchmarkConfig cfg;
  cfg.version = require_int(root, "version");
  cfg.d = require_int(root, "d");
  cfg.n_base = require_int(root, "n_base");
  cfg.n_new = require_int(root, "n_new");
  cfg.n_superclasses = require_int(root, "n_superclasses");
  if (!root["embedding_seed"].is_number_unsigned() &&
      !root["embedding_seed"].is_number_integer()) {
    throw SchemaError("benchmark config key 'embedding_seed' must be an integer");
  }
  cfg.embedding_seed = root["embedding_seed"].get<std::uint64_t>();
  cfg.domain_residual_scale = require_number(root, "domain_residual_scale");
  cfg.train_per_class = require_int(root, "train_per_class");
  cfg.test_per_class = require_int(root, "test_per_class");
  cfg.sample_noise_sigma = require_number(root, "sample_noise_sigma");
  cfg.tau = require_number(root, "tau");
  cfg.alpha = require_number(root, "alpha");
  cfg.beta = require_number(root, "beta");
  cfg.k0 = require_int(root, "k0");
  cfg.k1 = require_int(root, "k1");
  cfg.k2 = require_int(root, "k2");
  cfg.k3 = require_int(root, "k3");
  cfg.period = require_int(root, "period");
  cfg.lr = require_number(root, "lr");
  cfg.batch_size = require_int(root, "batch_size");
  cfg.epochs = require_int(root, "epochs");
  cfg.mmd_sigma = require_number(root, "mmd_sigma");
  cfg.gen_noise_sigma = require_number(root, "gen_noise_sigma");
  cfg.gen_unseen_per_class = require_int(root, "gen_unseen_per_class");
  cfg.gen_seen_per_class = require_int(root, "gen_seen_per_class");
  cfg.validate();
  return cfg;
}

std::string serialize_benchmark_config(const BenchmarkConfig& cfg) {
  json root;
  root["version"] = cfg.version;
  root["d"] = cfg.d;
  root["n_base"] = cfg.n_base;
  root["n_new"] = cfg.n_new;
  root["n_superclasses"] = cfg.n_superclasses;
  root["embedding_seed"] = cfg.embedding_seed;
  root["domain_residual_scale"] = cfg.domain_residual_scale;
  root["train_per_class"] = cfg.train_per_class;
  root["test_per_class"] = cfg.test_per_class;
  root["sample_noise_sigma"] = cfg.sample_noise_sigma;
  root["tau"] = cfg.tau;
  root["alpha"] = cfg.alpha;
  root["beta"] = cfg.beta;
  root["k0"] = cfg.k0;
  root["k1"] = cfg.k1;
  root["k2"] = cfg.k2;
  root["k3"] = cfg.k3;
  root["period"] = cfg.period;
  root["lr"] = cfg.lr;
  root["batch_size"] = cfg.batch_size;
  root["epochs"] = cfg.epochs;
  root["mmd_sigma"] = cfg.mmd_sigma;
  root["gen_noise_sigma"] = cfg.gen_noise_sigma;
  root["gen_unseen_per_class"] = cfg.gen_unseen_per_class;
  root["gen_seen_per_class"] = cfg.gen_seen_per_class;
  return root.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw FileError("failed writing '" + path + "'");
}

}  // namespace ovl
