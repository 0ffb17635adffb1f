// ovl — command-line driver for the open-vocabulary alignment toolkit.
//
// Subcommands:
//   bounds verify-joint      Monte Carlo check of the additive joint bound
//   bounds verify-posterior  Monte Carlo check of the posterior bound
//   generate                 taxonomy-guided surrogate feature generation
//   train                    sparse-alignment prompt training
//   eval                     checkpoint evaluation (accuracy table + JSON)
//   ablate                   multi-variant, multi-seed benchmark table
//
// Every command is a pure function of (input files, flags, seed), so a rerun
// with identical inputs produces byte-identical outputs. All randomness flows
// from the single run seed through named substreams ("bounds", "generate",
// "generate-seen", "train", plus per-class / per-epoch indices), so no
// component can perturb another's stream.
//
// Configuration precedence, lowest to highest: built-in defaults, --config
// JSON file, the OVL_SEED environment variable (seed only), explicit flags.
// Config files are fail-closed: an unknown key is a usage error.
//
// Exit codes: 0 success; 1 bound-rate gate failure (verify commands only);
// 2 usage, schema, or file errors.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovl/alignment.hpp"
#include "ovl/bounds.hpp"
#include "ovl/core_math.hpp"
#include "ovl/dataset_io.hpp"
#include "ovl/errors.hpp"
#include "ovl/evalbench.hpp"
#include "ovl/model.hpp"
#include "ovl/rng.hpp"
#include "ovl/synthgen.hpp"
#include "ovl/taxonomy.hpp"

namespace {

using nlohmann::ordered_json;

/// Run-level configuration shared by the data-pipeline commands. Field
/// defaults are the library defaults; config files and flags override them.
struct RunConfig {
  std::uint64_t seed = 0;
  int d = 16;
  double tau = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  int k0 = 1;
  int k1 = 8;
  int k2 = 3;
  int k3 = 1;
  int period = 8;
  double lr = 0.0025;
  int batch_size = 16;
  int epochs = 10;
  double mmd_sigma = 1.0;
  double noise_sigma = 0.1;
  std::string taxonomy;
  std::string dataset;
  std::string output;
};

/// Load a config file over the defaults. Fail-closed: every key must be one
/// of the known RunConfig fields, with the matching JSON type.
RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  ordered_json root;
  try {
    root = ordered_json::parse(ovl::read_text_file(path));
  } catch (const ordered_json::parse_error& e) {
    throw ovl::SchemaError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ovl::SchemaError("config file must hold a JSON object");

  auto num = [&](const ordered_json& v, const char* key) -> double {
    if (!v.is_number()) {
      throw ovl::SchemaError(std::string("config key '") + key + "' must be a number");
    }
    return v.get<double>();
  };
  auto integer = [&](const ordered_json& v, const char* key) -> int {
    if (!v.is_number_integer()) {
      throw ovl::SchemaError(std::string("config key '") + key + "' must be an integer");
    }
    return v.get<int>();
  };
  auto str = [&](const ordered_json& v, const char* key) -> std::string {
    if (!v.is_string()) {
      throw ovl::SchemaError(std::string("config key '") + key + "' must be a string");
    }
    return v.get<std::string>();
  };

  for (const auto& [key, value] : root.items()) {
    if (key == "seed") {
      if (!value.is_number_integer()) {
        throw ovl::SchemaError("config key 'seed' must be an integer");
      }
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "d") {
      cfg.d = integer(value, "d");
    } else if (key == "tau") {
      cfg.tau = num(value, "tau");
    } else if (key == "alpha") {
      cfg.alpha = num(value, "alpha");
    } else if (key == "beta") {
      cfg.beta = num(value, "beta");
    } else if (key == "k0") {
      cfg.k0 = integer(value, "k0");
    } else if (key == "k1") {
      cfg.k1 = integer(value, "k1");
    } else if (key == "k2") {
      cfg.k2 = integer(value, "k2");
    } else if (key == "k3") {
      cfg.k3 = integer(value, "k3");
    } else if (key == "period") {
      cfg.period = integer(value, "period");
    } else if (key == "lr") {
      cfg.lr = num(value, "lr");
    } else if (key == "batch_size") {
      cfg.batch_size = integer(value, "batch_size");
    } else if (key == "epochs") {
      cfg.epochs = integer(value, "epochs");
    } else if (key == "mmd_sigma") {
      cfg.mmd_sigma = num(value, "mmd_sigma");
    } else if (key == "noise_sigma") {
      cfg.noise_sigma = num(value, "noise_sigma");
    } else if (key == "taxonomy") {
      cfg.taxonomy = str(value, "taxonomy");
    } else if (key == "dataset") {
      cfg.dataset = str(value, "dataset");
    } else if (key == "output") {
      cfg.output = str(value, "output");
    } else {
      throw ovl::SchemaError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

/// The OVL_SEED environment variable overrides the config seed (but not an
/// explicit --seed flag). Must be a plain decimal 64-bit unsigned integer.
void apply_seed_env(RunConfig& cfg) {
  const char* raw = std::getenv("OVL_SEED");
  if (raw == nullptr) return;
  const std::string text(raw);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ovl::SchemaError("OVL_SEED must be a decimal unsigned 64-bit integer, got '" +
                           text + "'");
  }
  cfg.seed = value;
}

/// Print to stdout and, when a path is given, write the same bytes to a file.
void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) ovl::write_text_file(out_path, text);
}

// ---------------------------------------------------------------------------
// bounds

int cmd_verify_joint(std::uint64_t seed, int alphabet, long m, double delta,
                     long trials, double epsilon, const std::string& out_path) {
  ovl::BoundCheckReport rep = ovl::verify_joint_bound(
      alphabet, m, delta, trials, epsilon, ovl::rng::derive(seed, "bounds"));
  rep.seed = seed;  // echo the invocation seed, not the derived substream
  emit(ovl::serialize_bound_report(rep), out_path);
  return rep.violation_rate <= delta ? 0 : 1;
}

int cmd_verify_posterior(std::uint64_t seed, int n_yu, int n_ye, long m, double delta,
                         long trials, const std::string& out_path) {
  ovl::BoundCheckReport rep = ovl::verify_posterior_bound(
      n_yu, n_ye, m, delta, trials, ovl::rng::derive(seed, "bounds"));
  rep.seed = seed;
  emit(ovl::serialize_bound_report(rep), out_path);
  return rep.violation_rate <= delta ? 0 : 1;
}

// ---------------------------------------------------------------------------
// shared dataset plumbing

/// Map every class name of `ds` to its id (file order).
std::map<std::string, int> name_to_id(const ovl::Dataset& ds) {
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < ds.classes.size(); ++i) {
    ids[ds.classes[i].name] = static_cast<int>(i);
  }
  return ids;
}

/// The fixture classes of a benchmark instance as dataset classes, so all
/// three benchmark files (generated/train/test) share one class table.
std::vector<ovl::DatasetClass> fixture_classes(const ovl::BenchmarkFixture& fx) {
  std::vector<ovl::DatasetClass> classes;
  const int n_total = fx.n_base + fx.n_new;
  classes.reserve(static_cast<std::size_t>(n_total));
  for (int c = 0; c < n_total; ++c) {
    ovl::DatasetClass dc;
    dc.name = fx.names[static_cast<std::size_t>(c)];
    dc.superclass = fx.superclass_names[static_cast<std::size_t>(c)];
    dc.embedding = fx.embeddings[static_cast<std::size_t>(c)];
    dc.role = c < fx.n_base ? "base" : "new";
    classes.push_back(std::move(dc));
  }
  return classes;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateFlags {
  int n_unseen = 32;
  int n_seen = 16;
  std::string benchmark;
  std::string variant = "ours";
  std::string out_train;
  std::string out_test;
};

int cmd_generate_benchmark(const RunConfig& cfg, const GenerateFlags& gf) {
  if (cfg.output.empty()) {
    throw ovl::SchemaError("generate --benchmark requires --output for the generated set");
  }
  const ovl::BenchmarkConfig bc =
      ovl::parse_benchmark_config(ovl::read_text_file(gf.benchmark));
  const ovl::VariantSpec variant = ovl::variant_by_name(gf.variant);
  const ovl::BenchmarkInstance inst = ovl::materialize_benchmark(bc, variant, cfg.seed);

  ovl::Dataset out;
  out.d = bc.d;
  out.classes = fixture_classes(inst.fixture);
  for (const ovl::Sample& s : inst.gen_unseen.samples()) out.samples.add(s);
  for (const ovl::Sample& s : inst.gen_seen.samples()) out.samples.add(s);
  ovl::write_text_file(cfg.output, ovl::serialize_dataset(out));

  if (!gf.out_train.empty()) {
    ovl::Dataset train;
    train.d = bc.d;
    train.classes = out.classes;
    for (const ovl::Sample& s : inst.data.train_base.samples()) train.samples.add(s);
    ovl::write_text_file(gf.out_train, ovl::serialize_dataset(train));
  }
  if (!gf.out_test.empty()) {
    ovl::Dataset test;
    test.d = bc.d;
    test.classes = out.classes;
    for (const ovl::Sample& s : inst.data.test_base.samples()) test.samples.add(s);
    for (const ovl::Sample& s : inst.data.test_new.samples()) test.samples.add(s);
    ovl::write_text_file(gf.out_test, ovl::serialize_dataset(test));
  }
  return 0;
}

int cmd_generate(const RunConfig& cfg, const GenerateFlags& gf) {
  if (!gf.benchmark.empty()) return cmd_generate_benchmark(cfg, gf);
  if (cfg.taxonomy.empty()) {
    throw ovl::SchemaError("generate requires --taxonomy (or config key 'taxonomy')");
  }
  if (cfg.output.empty()) {
    throw ovl::SchemaError("generate requires --output (or config key 'output')");
  }
  if (gf.n_unseen < 1 || gf.n_seen < 0) {
    throw ovl::InvalidParams("generate: --n-unseen must be >= 1 and --n-seen >= 0");
  }

  const ovl::Dataset tax = ovl::parse_dataset(ovl::read_text_file(cfg.taxonomy));
  const ovl::Dataset data = (cfg.dataset.empty() || cfg.dataset == cfg.taxonomy)
                                ? tax
                                : ovl::parse_dataset(ovl::read_text_file(cfg.dataset));
  if (data.d != tax.d) {
    throw ovl::SchemaError("generate: taxonomy and data dimensions differ");
  }
  const std::map<std::string, int> tax_ids = name_to_id(tax);

  // Seen training shots of the base classes, remapped onto taxonomy ids.
  ovl::SampleSet seen_train;
  for (const ovl::Sample& s : data.samples.samples()) {
    if (s.provenance != ovl::Provenance::Seen) continue;
    const ovl::DatasetClass& dc = data.classes[static_cast<std::size_t>(s.class_id)];
    if (dc.role != "base") continue;
    const auto it = tax_ids.find(dc.name);
    if (it == tax_ids.end()) {
      throw ovl::SchemaError("generate: data class '" + dc.name + "' missing from taxonomy");
    }
    ovl::Sample t = s;
    t.class_id = it->second;
    seen_train.add(std::move(t));
  }

  // Tree over the base classes with the new classes attached as candidates.
  std::vector<std::pair<std::string, std::string>> seen_pairs;
  std::vector<std::pair<std::string, std::string>> cand_pairs;
  std::map<std::string, ovl::EmbeddedClass> emb_by_name;
  std::map<int, ovl::FeatureVector> base_embeddings;
  for (std::size_t i = 0; i < tax.classes.size(); ++i) {
    const ovl::DatasetClass& dc = tax.classes[i];
    emb_by_name[dc.name] = {dc.name, dc.embedding};
    if (dc.role == "base") {
      seen_pairs.emplace_back(dc.name, dc.superclass);
      base_embeddings[static_cast<int>(i)] = dc.embedding;
    } else {
      cand_pairs.emplace_back(dc.name, dc.superclass);
    }
  }
  const ovl::SemanticTree tree =
      ovl::expand_candidates(ovl::build_tree(seen_pairs), cand_pairs);
  const std::vector<std::string> predicted =
      ovl::predict_unseen(tree, emb_by_name, cfg.k0, ovl::SimMode::HighSim);

  const auto domains =
      ovl::extract_domain_info(seen_train, base_embeddings, cfg.k1, cfg.k2);

  // Surrogates for the predicted classes inherit the descriptors of the
  // nearest base class; extra seen-class data reuses each class's own.
  const std::uint64_t gen_seed = ovl::rng::derive(cfg.seed, "generate");
  ovl::SampleSet gen_unseen;
  for (const std::string& name : predicted) {
    const int id = tax_ids.at(name);
    ovl::GeneratorSpec spec;
    spec.class_name = name;
    spec.class_id = id;
    spec.base = tax.classes[static_cast<std::size_t>(id)].embedding;
    spec.noise_sigma = cfg.noise_sigma;
    spec.provenance = ovl::Provenance::GeneratedUnseen;
    spec.descriptors = domains.at(ovl::nearest_seen_class(spec.base, base_embeddings));
    const ovl::SampleSet chunk =
        ovl::synthesize(spec, gf.n_unseen,
                        ovl::rng::derive(gen_seed, static_cast<std::uint64_t>(id)));
    for (const ovl::Sample& s : chunk.samples()) gen_unseen.add(s);
  }

  ovl::SampleSet gen_seen;
  if (gf.n_seen > 0) {
    std::vector<ovl::GeneratorSpec> seen_specs;
    for (const auto& [id, emb] : base_embeddings) {
      ovl::GeneratorSpec spec;
      spec.class_name = tax.classes[static_cast<std::size_t>(id)].name;
      spec.class_id = id;
      spec.base = emb;
      spec.noise_sigma = cfg.noise_sigma;
      spec.descriptors = domains.at(id);
      seen_specs.push_back(std::move(spec));
    }
    gen_seen = ovl::synthesize_seen_extra(seen_specs, gf.n_seen,
                                          ovl::rng::derive(cfg.seed, "generate-seen"));
  }

  ovl::Dataset out;
  out.d = tax.d;
  out.classes = tax.classes;
  for (const ovl::Sample& s : gen_unseen.samples()) out.samples.add(s);
  for (const ovl::Sample& s : gen_seen.samples()) out.samples.add(s);
  ovl::write_text_file(cfg.output, ovl::serialize_dataset(out));
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainFlags {
  std::string generated;
  std::string checkpoint;
  std::string metrics;
  std::string benchmark;
  std::string variant = "ours";
};

/// Checkpoint path falls back to the config output path; the metrics file
/// defaults to sitting next to the checkpoint.
std::pair<std::string, std::string> train_output_paths(const RunConfig& cfg,
                                                       const TrainFlags& tf) {
  const std::string ckpt = !tf.checkpoint.empty() ? tf.checkpoint : cfg.output;
  if (ckpt.empty()) {
    throw ovl::SchemaError("train requires --checkpoint (or config key 'output')");
  }
  const std::string metrics = !tf.metrics.empty() ? tf.metrics : ckpt + ".metrics.jsonl";
  return {ckpt, metrics};
}

int cmd_train_benchmark(const RunConfig& cfg, const TrainFlags& tf) {
  const auto [ckpt_path, metrics_path] = train_output_paths(cfg, tf);
  const ovl::BenchmarkConfig bc =
      ovl::parse_benchmark_config(ovl::read_text_file(tf.benchmark));
  const ovl::VariantSpec variant = ovl::variant_by_name(tf.variant);
  const ovl::BenchmarkInstance inst = ovl::materialize_benchmark(bc, variant, cfg.seed);
  const ovl::BenchmarkTraining result = ovl::train_benchmark(inst, bc, variant, cfg.seed);
  ovl::write_text_file(ckpt_path, ovl::serialize_checkpoint(result.params));
  ovl::write_text_file(metrics_path, ovl::serialize_metrics(result.metrics));
  return 0;
}

int cmd_train(const RunConfig& cfg, const TrainFlags& tf) {
  if (!tf.benchmark.empty()) return cmd_train_benchmark(cfg, tf);
  const auto [ckpt_path, metrics_path] = train_output_paths(cfg, tf);
  if (cfg.dataset.empty()) {
    throw ovl::SchemaError("train requires --data (or config key 'dataset')");
  }
  if (tf.generated.empty()) throw ovl::SchemaError("train requires --generated");

  const ovl::Dataset dat = ovl::parse_dataset(ovl::read_text_file(cfg.dataset));
  const ovl::Dataset gen = ovl::parse_dataset(ovl::read_text_file(tf.generated));
  if (gen.d != dat.d) throw ovl::SchemaError("train: data and generated dimensions differ");

  ovl::SampleSet seen;
  for (const ovl::Sample& s : dat.samples.samples()) {
    if (s.provenance != ovl::Provenance::Seen) continue;
    if (dat.classes[static_cast<std::size_t>(s.class_id)].role != "base") continue;
    seen.add(s);
  }
  if (seen.empty()) {
    throw ovl::SchemaError("train: data file holds no Seen samples of base classes");
  }

  // Generated samples arrive with the generated file's ids; remap them onto
  // the data file's class table by name.
  ovl::SampleSet gen_unseen;
  ovl::SampleSet gen_seen;
  std::set<int> unseen_ids;
  for (const ovl::Sample& s : gen.samples.samples()) {
    const std::string& name = gen.classes[static_cast<std::size_t>(s.class_id)].name;
    ovl::Sample t = s;
    t.class_id = dat.class_id(name);  // UnknownClass on a missing name
    if (t.provenance == ovl::Provenance::GeneratedUnseen) {
      unseen_ids.insert(t.class_id);
      gen_unseen.add(std::move(t));
    } else if (t.provenance == ovl::Provenance::GeneratedSeen) {
      gen_seen.add(std::move(t));
    } else {
      throw ovl::SchemaError("train: generated file must hold only generated samples");
    }
  }

  // The training vocabulary: every base class plus every class that received
  // generated unseen data.
  std::map<int, ovl::FeatureVector> embeddings;
  for (std::size_t i = 0; i < dat.classes.size(); ++i) {
    const int id = static_cast<int>(i);
    if (dat.classes[i].role == "base" || unseen_ids.count(id) > 0) {
      embeddings[id] = dat.classes[i].embedding;
    }
  }
  const ovl::ClassBank bank(std::move(embeddings), cfg.tau);

  ovl::AlignConfig align;
  align.alpha = cfg.alpha;
  align.beta = cfg.beta;
  align.period = cfg.period;
  align.k3 = cfg.k3;
  align.mmd_sigma = cfg.mmd_sigma;
  align.lr = cfg.lr;

  ovl::PromptParams params = ovl::zero_prompts(dat.d);
  ovl::EpochMetrics metrics;
  const std::uint64_t train_seed = ovl::rng::derive(cfg.seed, "train");
  int iter_offset = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    ovl::EpochResult res = ovl::sparse_train_epoch(
        seen, gen_unseen, gen_seen, std::move(params), bank, align, cfg.batch_size,
        ovl::rng::derive(train_seed, static_cast<std::uint64_t>(e)));
    params = std::move(res.params);
    for (ovl::EpochMetricsRow row : res.metrics) {
      row.iter += iter_offset;
      metrics.push_back(row);
    }
    iter_offset += static_cast<int>(res.metrics.size());
  }

  ovl::write_text_file(ckpt_path, ovl::serialize_checkpoint(params));
  ovl::write_text_file(metrics_path, ovl::serialize_metrics(metrics));
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  std::string checkpoint;
  std::string train_data;
  std::string generated;
  std::string out;
  std::string benchmark;
  std::string variant = "ours";
};

int cmd_eval(const RunConfig& cfg, const EvalFlags& ef) {
  ovl::EvalReport rep;
  if (!ef.benchmark.empty()) {
    const ovl::BenchmarkConfig bc =
        ovl::parse_benchmark_config(ovl::read_text_file(ef.benchmark));
    rep = ovl::run_benchmark_variant(bc, ovl::variant_by_name(ef.variant), cfg.seed);
  } else {
    if (cfg.dataset.empty()) {
      throw ovl::SchemaError("eval requires --data (or config key 'dataset')");
    }
    if (ef.checkpoint.empty()) throw ovl::SchemaError("eval requires --checkpoint");

    const ovl::Dataset dat = ovl::parse_dataset(ovl::read_text_file(cfg.dataset));
    const ovl::PromptParams params =
        ovl::parse_checkpoint(ovl::read_text_file(ef.checkpoint));
    if (params.v1.size() != dat.d) {
      throw ovl::SchemaError("eval: checkpoint dimension does not match the data");
    }

    std::map<int, ovl::FeatureVector> embeddings;
    std::vector<int> open_set;
    for (std::size_t i = 0; i < dat.classes.size(); ++i) {
      embeddings[static_cast<int>(i)] = dat.classes[i].embedding;
      open_set.push_back(static_cast<int>(i));
    }
    const ovl::ClassBank bank(std::move(embeddings), cfg.tau);

    ovl::SampleSet test_base;
    ovl::SampleSet test_new;
    for (const ovl::Sample& s : dat.samples.samples()) {
      if (dat.classes[static_cast<std::size_t>(s.class_id)].role == "base") {
        test_base.add(s);
      } else {
        test_new.add(s);
      }
    }
    rep = ovl::evaluate(params, bank, test_base, test_new, open_set);

    // Discrepancy between generated-unseen features and the training shots,
    // when both files are supplied; otherwise reported as 0.
    if (!ef.train_data.empty() && !ef.generated.empty()) {
      const ovl::Dataset tr = ovl::parse_dataset(ovl::read_text_file(ef.train_data));
      const ovl::Dataset gen = ovl::parse_dataset(ovl::read_text_file(ef.generated));
      std::vector<ovl::FeatureVector> seen_feats;
      for (const ovl::Sample& s : tr.samples.samples()) {
        if (s.provenance == ovl::Provenance::Seen &&
            tr.classes[static_cast<std::size_t>(s.class_id)].role == "base") {
          seen_feats.push_back(s.feature);
        }
      }
      std::vector<ovl::FeatureVector> gen_feats;
      for (const ovl::Sample& s : gen.samples.samples()) {
        if (s.provenance == ovl::Provenance::GeneratedUnseen) {
          gen_feats.push_back(s.feature);
        }
      }
      const std::size_t n = std::min(gen_feats.size(), seen_feats.size());
      gen_feats.resize(n);
      seen_feats.resize(n);
      rep.dis = ovl::mmd(gen_feats, seen_feats, cfg.mmd_sigma);
    }
    rep.seed = cfg.seed;
    rep.variant = "eval";
  }

  const std::vector<ovl::EvalReport> reports{rep};
  const std::string json_text = ovl::serialize_reports(reports);
  std::cout << json_text << "\n" << ovl::eval_table(reports);
  if (!ef.out.empty()) ovl::write_text_file(ef.out, json_text);
  return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateFlags {
  std::string benchmark;
  std::vector<std::string> variants{"ours", "wo-da", "no-domain", "lowsim", "wo-tree"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out;
};

int cmd_ablate(const AblateFlags& af) {
  const ovl::BenchmarkConfig bc =
      ovl::parse_benchmark_config(ovl::read_text_file(af.benchmark));
  std::vector<ovl::VariantSpec> variants;
  variants.reserve(af.variants.size());
  for (const std::string& name : af.variants) {
    variants.push_back(ovl::variant_by_name(name));
  }
  const std::vector<ovl::EvalReport> reports = ovl::run_ablation(bc, variants, af.seeds);
  const std::string json_text = ovl::serialize_reports(reports);
  std::cout << json_text << "\n" << ovl::eval_table(reports);
  if (!af.out.empty()) ovl::write_text_file(af.out, json_text);
  return 0;
}

// ---------------------------------------------------------------------------

/// Find the last --config PATH / --config=PATH before CLI11 runs, so config
/// values are in place as defaults when flags are parsed over them.
std::string prescan_config_path(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string tok = argv[i];
    if (tok == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (tok.rfind("--config=", 0) == 0) {
      path = tok.substr(9);
    }
  }
  return path;
}

int run(int argc, char** argv) {
  const std::string config_path = prescan_config_path(argc, argv);
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  apply_seed_env(cfg);

  CLI::App app{"ovl — taxonomy-guided generation, alignment training, and bound checks"};
  app.require_subcommand(1);
  std::string config_dummy;

  // ---- bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Monte Carlo bound verification");
  bounds_cmd->require_subcommand(1);

  int vj_alphabet = 8;
  long vj_m = 0;
  double vj_delta = 0.0;
  long vj_trials = 0;
  double vj_epsilon = 0.05;
  std::string vj_out;
  auto* vj = bounds_cmd->add_subcommand("verify-joint",
                                        "check the additive joint-distribution bound");
  vj->add_option("--alphabet", vj_alphabet, "alphabet size of the sampled sources")
      ->required();
  vj->add_option("--m", vj_m, "seen-sample count per trial")->required();
  vj->add_option("--delta", vj_delta, "failure probability of the bound")->required();
  vj->add_option("--trials", vj_trials, "Monte Carlo trials")->required();
  vj->add_option("--epsilon", vj_epsilon, "perturbation mixed into the evaluated model");
  vj->add_option("--seed", cfg.seed, "run seed");
  vj->add_option("--out", vj_out, "also write the JSON report to this file");
  vj->add_option("--config", config_dummy, "JSON config file");

  int vp_n_yu = 0;
  int vp_n_ye = 0;
  long vp_m = 0;
  double vp_delta = 0.0;
  long vp_trials = 0;
  std::string vp_out;
  auto* vp = bounds_cmd->add_subcommand("verify-posterior",
                                        "check the predicted-class posterior bound");
  vp->add_option("--n-yu", vp_n_yu, "unseen class count")->required();
  vp->add_option("--n-ye", vp_n_ye, "predicted class count")->required();
  vp->add_option("--m", vp_m, "generated-sample count per trial")->required();
  vp->add_option("--delta", vp_delta, "failure probability of the bound")->required();
  vp->add_option("--trials", vp_trials, "Monte Carlo trials")->required();
  vp->add_option("--seed", cfg.seed, "run seed");
  vp->add_option("--out", vp_out, "also write the JSON report to this file");
  vp->add_option("--config", config_dummy, "JSON config file");

  // ---- shared hyperparameter flags, attached per subcommand
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_dummy, "JSON config file");
    sub->add_option("--seed", cfg.seed, "run seed");
  };

  // ---- generate
  GenerateFlags gf;
  auto* gen_cmd =
      app.add_subcommand("generate", "synthesize surrogate features from a taxonomy");
  add_common(gen_cmd);
  gen_cmd->add_option("--taxonomy", cfg.taxonomy, "dataset file defining classes/roles");
  gen_cmd->add_option("--data", cfg.dataset,
                      "dataset file holding Seen training samples (default: taxonomy)");
  gen_cmd->add_option("--output,-o", cfg.output, "output dataset file");
  gen_cmd->add_option("--n-unseen", gf.n_unseen, "samples per predicted unseen class");
  gen_cmd->add_option("--n-seen", gf.n_seen, "extra samples per seen class");
  gen_cmd->add_option("--k0", cfg.k0, "predicted unseen classes to keep");
  gen_cmd->add_option("--k1", cfg.k1, "top shots per class for domain extraction");
  gen_cmd->add_option("--k2", cfg.k2, "domain descriptors per class");
  gen_cmd->add_option("--noise-sigma", cfg.noise_sigma, "generator noise level");
  gen_cmd->add_option("--benchmark", gf.benchmark,
                      "materialize a synthetic benchmark config instead");
  gen_cmd->add_option("--variant", gf.variant, "benchmark variant (with --benchmark)");
  gen_cmd->add_option("--out-train", gf.out_train,
                      "also write the benchmark training split here");
  gen_cmd->add_option("--out-test", gf.out_test,
                      "also write the benchmark test split here");

  // ---- train
  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "sparse-alignment prompt training");
  add_common(train_cmd);
  train_cmd->add_option("--data", cfg.dataset, "dataset file with Seen training samples");
  train_cmd->add_option("--generated", tf.generated, "generated-sample dataset file");
  train_cmd->add_option("--checkpoint", tf.checkpoint, "output checkpoint file");
  train_cmd->add_option("--metrics", tf.metrics,
                        "output metrics file (default: <checkpoint>.metrics.jsonl)");
  train_cmd->add_option("--tau", cfg.tau, "softmax temperature");
  train_cmd->add_option("--alpha", cfg.alpha, "posterior-alignment weight");
  train_cmd->add_option("--beta", cfg.beta, "embedding-alignment weight");
  train_cmd->add_option("--k3", cfg.k3, "top-k selection size at alignment triggers");
  train_cmd->add_option("--period", cfg.period, "alignment trigger period");
  train_cmd->add_option("--lr", cfg.lr, "learning rate");
  train_cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size");
  train_cmd->add_option("--epochs", cfg.epochs, "training epochs");
  train_cmd->add_option("--mmd-sigma", cfg.mmd_sigma, "kernel bandwidth");
  train_cmd->add_option("--benchmark", tf.benchmark,
                        "train on a synthetic benchmark config instead");
  train_cmd->add_option("--variant", tf.variant, "benchmark variant (with --benchmark)");

  // ---- eval
  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a test dataset");
  add_common(eval_cmd);
  eval_cmd->add_option("--data", cfg.dataset, "test dataset file");
  eval_cmd->add_option("--checkpoint", ef.checkpoint, "checkpoint file to evaluate");
  eval_cmd->add_option("--train-data", ef.train_data,
                       "training dataset file (enables the Dis column)");
  eval_cmd->add_option("--generated", ef.generated,
                       "generated dataset file (enables the Dis column)");
  eval_cmd->add_option("--tau", cfg.tau, "softmax temperature");
  eval_cmd->add_option("--mmd-sigma", cfg.mmd_sigma, "kernel bandwidth for Dis");
  eval_cmd->add_option("--out", ef.out, "also write the JSON report to this file");
  eval_cmd->add_option("--benchmark", ef.benchmark,
                       "run a benchmark variant end-to-end instead");
  eval_cmd->add_option("--variant", ef.variant, "benchmark variant (with --benchmark)");

  // ---- ablate
  AblateFlags af;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "run benchmark variants across seeds");
  ablate_cmd->add_option("--config", config_dummy, "JSON config file");
  ablate_cmd->add_option("--benchmark", af.benchmark, "benchmark config file")->required();
  ablate_cmd->add_option("--variants", af.variants, "comma-separated variant names")
      ->delimiter(',');
  ablate_cmd->add_option("--seeds", af.seeds, "comma-separated run seeds")->delimiter(',');
  ablate_cmd->add_option("--out", af.out, "also write the JSON reports to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (bounds_cmd->parsed()) {
    if (vj->parsed()) {
      return cmd_verify_joint(cfg.seed, vj_alphabet, vj_m, vj_delta, vj_trials,
                              vj_epsilon, vj_out);
    }
    return cmd_verify_posterior(cfg.seed, vp_n_yu, vp_n_ye, vp_m, vp_delta, vp_trials,
                                vp_out);
  }
  if (gen_cmd->parsed()) return cmd_generate(cfg, gf);
  if (train_cmd->parsed()) return cmd_train(cfg, tf);
  if (eval_cmd->parsed()) return cmd_eval(cfg, ef);
  return cmd_ablate(af);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
