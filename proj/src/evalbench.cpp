#include "ovl/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "ovl/errors.hpp"
#include "ovl/rng.hpp"
#include "ovl/synthgen.hpp"
#include "ovl/taxonomy.hpp"

namespace ovl {

double harmonic_mean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return 0.0;
  return 2.0 * a * b / (a + b);
}

namespace {

double accuracy(const SampleSet& test, const PromptParams& params,
                const ClassBank& bank, const std::vector<int>& open_class_set) {
  int correct = 0;
  for (const Sample& s : test.samples()) {
    const DiscreteDistribution p = posterior(s.feature, params, bank, open_class_set);
    int arg = 0;
    for (int c = 1; c < static_cast<int>(p.size()); ++c) {
      if (p[c] > p[arg]) arg = c;
    }
    if (open_class_set[static_cast<std::size_t>(arg)] == s.class_id) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

EvalReport evaluate(const PromptParams& params, const ClassBank& bank,
                    const SampleSet& test_base, const SampleSet& test_new,
                    const std::vector<int>& open_class_set) {
  if (test_base.empty() || test_new.empty()) {
    throw EmptyTestSet("evaluation requires nonempty base and new test sets");
  }
  EvalReport rep;
  rep.acc_base = accuracy(test_base, params, bank, open_class_set);
  rep.acc_new = accuracy(test_new, params, bank, open_class_set);
  rep.h = harmonic_mean(rep.acc_base, rep.acc_new);
  return rep;
}

void BenchmarkConfig::validate() const {
  if (version != 1) throw InvalidParams("unsupported benchmark config version");
  if (d < 2 || n_base < 1 || n_new < 1 || n_superclasses < 1 ||
      n_superclasses > n_base || n_superclasses > n_new) {
    throw InvalidParams("benchmark class layout is malformed");
  }
  if (train_per_class < 1 || test_per_class < 1 || gen_unseen_per_class < 1 ||
      gen_seen_per_class < 1 || batch_size < 1 || epochs < 0) {
    throw InvalidParams("benchmark sample counts must be positive");
  }
  if (!(sample_noise_sigma > 0.0) || !(gen_noise_sigma > 0.0) || !(mmd_sigma > 0.0)) {
    throw NonPositiveSigma("benchmark noise and kernel widths must be positive");
  }
  if (!(tau > 0.0) || !(lr > 0.0) || alpha < 0.0 || beta < 0.0) {
    throw InvalidParams("benchmark hyperparameters out of range");
  }
  if (k0 < 1 || k1 < 1 || k2 < 1 || k2 > k1 || k3 < 1 || period < 1) {
    throw InvalidParams("benchmark selection constants out of range");
  }
  if (train_per_class < k1) {
    throw InvalidParams("train_per_class must be at least k1");
  }
  if (!(domain_residual_scale >= 0.0)) {
    throw InvalidParams("domain residual scale must be nonnegative");
  }
}

BenchmarkConfig reference_benchmark() { return BenchmarkConfig{}; }

BenchmarkFixture build_fixture(const BenchmarkConfig& cfg) {
  cfg.validate();
  BenchmarkFixture fx;
  fx.d = cfg.d;
  fx.n_base = cfg.n_base;
  fx.n_new = cfg.n_new;

  rng::Stream emb_stream(rng::derive(cfg.embedding_seed, "embeddings"));
  for (int i = 0; i < cfg.n_base; ++i) {
    fx.names.push_back("base" + std::to_string(i));
    fx.superclass_names.push_back("group" + std::to_string(i % cfg.n_superclasses));
    fx.embeddings.push_back(emb_stream.gaussian_vector(cfg.d, 1.0).normalized());
  }
  for (int j = 0; j < cfg.n_new; ++j) {
    fx.names.push_back("new" + std::to_string(j));
    fx.superclass_names.push_back("group" + std::to_string(j % cfg.n_superclasses));
    fx.embeddings.push_back(emb_stream.gaussian_vector(cfg.d, 1.0).normalized());
  }

  rng::Stream res_stream(rng::derive(cfg.embedding_seed, "residual"));
  fx.residual = res_stream.gaussian_vector(cfg.d, 1.0).normalized() *
                cfg.domain_residual_scale;
  return fx;
}

BenchmarkData sample_benchmark_data(const BenchmarkFixture& fx,
                                    const BenchmarkConfig& cfg, std::uint64_t seed) {
  BenchmarkData data;
  rng::Stream ds(rng::derive(seed, "data"));
  for (int c = 0; c < fx.n_base; ++c) {
    for (int i = 0; i < cfg.train_per_class; ++i) {
      data.train_base.add({c,
                           fx.embeddings[static_cast<std::size_t>(c)] + fx.residual +
                               ds.gaussian_vector(fx.d, cfg.sample_noise_sigma),
                           Provenance::Seen});
    }
  }
  for (int c = 0; c < fx.n_base + fx.n_new; ++c) {
    SampleSet& target = c < fx.n_base ? data.test_base : data.test_new;
    for (int i = 0; i < cfg.test_per_class; ++i) {
      target.add({c,
                  fx.embeddings[static_cast<std::size_t>(c)] + fx.residual +
                      ds.gaussian_vector(fx.d, cfg.sample_noise_sigma),
                  Provenance::Seen});
    }
  }
  return data;
}

VariantSpec variant_by_name(const std::string& name) {
  if (name == "ours") return {"ours", PredictorMode::HighSim, DomainMode::Domain, true};
  if (name == "wo-da") {
    return {"wo-da", PredictorMode::HighSim, DomainMode::Domain, false};
  }
  if (name == "no-domain") {
    return {"no-domain", PredictorMode::HighSim, DomainMode::NoDomain, true};
  }
  if (name == "lowsim") {
    return {"lowsim", PredictorMode::LowSim, DomainMode::Domain, true};
  }
  if (name == "wo-tree") {
    return {"wo-tree", PredictorMode::Random, DomainMode::Domain, true};
  }
  throw UnknownVariant("no benchmark variant named '" + name + "'");
}

BenchmarkInstance materialize_benchmark(const BenchmarkConfig& cfg,
                                        const VariantSpec& variant,
                                        std::uint64_t seed) {
  cfg.validate();
  BenchmarkFixture fx = build_fixture(cfg);
  BenchmarkData data = sample_benchmark_data(fx, cfg, seed);
  const int n_total = fx.n_base + fx.n_new;

  // Taxonomy over the base classes, expanded with the new classes as
  // candidates under their superclasses.
  std::vector<std::pair<std::string, std::string>> seen_pairs;
  std::vector<std::pair<std::string, std::string>> cand_pairs;
  for (int c = 0; c < fx.n_base; ++c) {
    seen_pairs.emplace_back(fx.names[static_cast<std::size_t>(c)],
                            fx.superclass_names[static_cast<std::size_t>(c)]);
  }
  for (int c = fx.n_base; c < n_total; ++c) {
    cand_pairs.emplace_back(fx.names[static_cast<std::size_t>(c)],
                            fx.superclass_names[static_cast<std::size_t>(c)]);
  }
  const SemanticTree tree = expand_candidates(build_tree(seen_pairs), cand_pairs);

  std::map<std::string, EmbeddedClass> emb_by_name;
  std::map<std::string, int> id_by_name;
  for (int c = 0; c < n_total; ++c) {
    const std::string& name = fx.names[static_cast<std::size_t>(c)];
    emb_by_name[name] = {name, fx.embeddings[static_cast<std::size_t>(c)]};
    id_by_name[name] = c;
  }

  // Predicted unseen classes.
  std::vector<std::string> predicted;
  if (variant.predictor == PredictorMode::Random) {
    const std::vector<std::string> pool = tree.candidate_leaves();
    rng::Stream pick(rng::derive(seed, "tree-ablation"));
    const std::vector<int> order = pick.shuffled_indices(static_cast<int>(pool.size()));
    const int take = std::min<int>(cfg.k0, static_cast<int>(pool.size()));
    for (int i = 0; i < take; ++i) {
      predicted.push_back(pool[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    }
  } else {
    const SimMode mode = variant.predictor == PredictorMode::HighSim ? SimMode::HighSim
                                                                     : SimMode::LowSim;
    predicted = predict_unseen(tree, emb_by_name, cfg.k0, mode);
  }

  // Domain descriptors of the seen classes.
  std::map<int, FeatureVector> base_embeddings;
  for (int c = 0; c < fx.n_base; ++c) {
    base_embeddings[c] = fx.embeddings[static_cast<std::size_t>(c)];
  }
  const auto domains =
      extract_domain_info(data.train_base, base_embeddings, cfg.k1, cfg.k2);

  // Surrogate data for the predicted unseen classes...
  const std::uint64_t gen_seed = rng::derive(seed, "generate");
  SampleSet gen_unseen;
  for (const std::string& name : predicted) {
    const int id = id_by_name.at(name);
    GeneratorSpec spec;
    spec.class_name = name;
    spec.class_id = id;
    spec.base = fx.embeddings[static_cast<std::size_t>(id)];
    spec.noise_sigma = cfg.gen_noise_sigma;
    spec.provenance = Provenance::GeneratedUnseen;
    spec.descriptors =
        variant.domain == DomainMode::Domain
            ? domains.at(nearest_seen_class(spec.base, base_embeddings))
            : no_domain_descriptors(fx.d);
    const SampleSet chunk =
        synthesize(spec, cfg.gen_unseen_per_class,
                   rng::derive(gen_seed, static_cast<std::uint64_t>(id)));
    for (const Sample& s : chunk.samples()) gen_unseen.add(s);
  }

  // ...and extra data for the seen classes.
  std::vector<GeneratorSpec> seen_specs;
  for (int c = 0; c < fx.n_base; ++c) {
    GeneratorSpec spec;
    spec.class_name = fx.names[static_cast<std::size_t>(c)];
    spec.class_id = c;
    spec.base = fx.embeddings[static_cast<std::size_t>(c)];
    spec.noise_sigma = cfg.gen_noise_sigma;
    spec.descriptors = variant.domain == DomainMode::Domain
                           ? domains.at(c)
                           : no_domain_descriptors(fx.d);
    seen_specs.push_back(std::move(spec));
  }
  SampleSet gen_seen = synthesize_seen_extra(seen_specs, cfg.gen_seen_per_class,
                                             rng::derive(seed, "generate-seen"));

  // Train over base plus predicted classes.
  std::map<int, FeatureVector> train_embs = base_embeddings;
  std::vector<int> predicted_ids;
  for (const std::string& name : predicted) {
    const int id = id_by_name.at(name);
    predicted_ids.push_back(id);
    train_embs[id] = fx.embeddings[static_cast<std::size_t>(id)];
  }

  BenchmarkInstance inst;
  inst.fixture = std::move(fx);
  inst.data = std::move(data);
  inst.predicted_ids = std::move(predicted_ids);
  inst.gen_unseen = std::move(gen_unseen);
  inst.gen_seen = std::move(gen_seen);
  inst.train_class_embeddings = std::move(train_embs);
  return inst;
}

BenchmarkTraining train_benchmark(const BenchmarkInstance& instance,
                                  const BenchmarkConfig& cfg,
                                  const VariantSpec& variant, std::uint64_t seed) {
  const ClassBank train_bank(instance.train_class_embeddings, cfg.tau);

  AlignConfig align;
  align.alpha = variant.alignment_on ? cfg.alpha : 0.0;
  align.beta = variant.alignment_on ? cfg.beta : 0.0;
  align.period = cfg.period;
  align.k3 = cfg.k3;
  align.mmd_sigma = cfg.mmd_sigma;
  align.lr = cfg.lr;

  BenchmarkTraining out;
  out.params = zero_prompts(instance.fixture.d);
  const std::uint64_t train_seed = rng::derive(seed, "train");
  int iter_offset = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    EpochResult res = sparse_train_epoch(
        instance.data.train_base, instance.gen_unseen, instance.gen_seen,
        std::move(out.params), train_bank, align, cfg.batch_size,
        rng::derive(train_seed, static_cast<std::uint64_t>(e)));
    out.params = std::move(res.params);
    for (EpochMetricsRow row : res.metrics) {
      row.iter += iter_offset;
      out.metrics.push_back(row);
    }
    iter_offset += static_cast<int>(res.metrics.size());
  }
  return out;
}

EvalReport run_benchmark_variant(const BenchmarkConfig& cfg, const VariantSpec& variant,
                                 std::uint64_t seed) {
  const BenchmarkInstance inst = materialize_benchmark(cfg, variant, seed);
  const PromptParams params = train_benchmark(inst, cfg, variant, seed).params;

  // Evaluate over the full open vocabulary.
  const BenchmarkFixture& fx = inst.fixture;
  const int n_total = fx.n_base + fx.n_new;
  std::map<int, FeatureVector> all_embs;
  std::vector<int> open_set;
  for (int c = 0; c < n_total; ++c) {
    all_embs[c] = fx.embeddings[static_cast<std::size_t>(c)];
    open_set.push_back(c);
  }
  const ClassBank eval_bank(std::move(all_embs), cfg.tau);
  EvalReport rep =
      evaluate(params, eval_bank, inst.data.test_base, inst.data.test_new, open_set);

  // Distribution distance of the surrogate unseen data to the seen shots.
  std::vector<FeatureVector> gen_feats = inst.gen_unseen.features();
  std::vector<FeatureVector> seen_feats = inst.data.train_base.features();
  const std::size_t n = std::min(gen_feats.size(), seen_feats.size());
  gen_feats.resize(n);
  seen_feats.resize(n);
  rep.dis = mmd(gen_feats, seen_feats, cfg.mmd_sigma);

  rep.seed = seed;
  rep.variant = variant.name;
  return rep;
}

std::vector<EvalReport> run_ablation(const BenchmarkConfig& cfg,
                                     const std::vector<VariantSpec>& variants,
                                     const std::vector<std::uint64_t>& seeds) {
  if (variants.empty()) throw EmptyList("ablation requires at least one variant");
  if (seeds.empty()) throw EmptyList("ablation requires at least one seed");
  std::vector<EvalReport> out;
  out.reserve(variants.size() * seeds.size());
  for (const VariantSpec& v : variants) {
    for (std::uint64_t s : seeds) out.push_back(run_benchmark_variant(cfg, v, s));
  }
  return out;
}

std::string eval_table(const std::vector<EvalReport>& reports) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-12s %-20s %6s %6s %6s %8s\n", "variant", "seed",
                "Base", "New", "H", "Dis");
  out += line;

  auto fmt_row = [&](const std::string& variant, const std::string& seed_label,
                     double base, double nw, double h, double dis) {
    std::snprintf(line, sizeof(line), "%-12s %-20s %6.2f %6.2f %6.2f %8.4f\n",
                  variant.c_str(), seed_label.c_str(), base, nw, h, dis);
    out += line;
  };

  std::vector<std::string> variant_order;
  for (const EvalReport& r : reports) {
    if (std::find(variant_order.begin(), variant_order.end(), r.variant) ==
        variant_order.end()) {
      variant_order.push_back(r.variant);
    }
  }
  for (const std::string& v : variant_order) {
    double sb = 0.0, sn = 0.0, sh = 0.0, sd = 0.0;
    int count = 0;
    for (const EvalReport& r : reports) {
      if (r.variant != v) continue;
      fmt_row(r.variant, std::to_string(r.seed), r.acc_base, r.acc_new, r.h, r.dis);
      sb += r.acc_base;
      sn += r.acc_new;
      sh += r.h;
      sd += r.dis;
      ++count;
    }
    if (count > 1) {
      fmt_row(v, "mean", sb / count, sn / count, sh / count, sd / count);
    }
  }
  return out;
}

}  // namespace ovl
