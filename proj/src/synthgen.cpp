#include "ovl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ovl/errors.hpp"
#include "ovl/rng.hpp"

namespace ovl {

void GeneratorSpec::validate() const {
  if (descriptors.empty()) {
    throw InvalidParams("generator spec for '" + class_name + "' has no descriptors");
  }
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw NonPositiveSigma("noise_sigma must be positive and finite");
  }
  if (base.size() == 0 || !base.allFinite()) {
    throw InvalidParams("generator base embedding must be nonempty and finite");
  }
  double total = 0.0;
  for (const DomainDescriptor& d : descriptors) {
    if (d.residual.size() != base.size()) {
      throw DimensionMismatch("descriptor residual dimension differs from base");
    }
    if (!d.residual.allFinite() || !std::isfinite(d.weight)) {
      throw InvalidParams("descriptor entries must be finite");
    }
    if (!(d.weight > 0.0 && d.weight <= 1.0)) {
      throw InvalidParams("descriptor weights must lie in (0, 1]");
    }
    total += d.weight;
  }
  if (std::abs(total - 1.0) > kProbSumTolerance) {
    throw InvalidParams("descriptor weights must sum to 1");
  }
}

namespace {

/// Greedy farthest-point seeding over residuals: the first seed is the point
/// farthest from the centroid, each further seed maximizes the distance to
/// its nearest existing seed. Ties go to the lower index.
std::vector<int> farthest_point_seeds(const std::vector<FeatureVector>& residuals,
                                      int k2) {
  const int n = static_cast<int>(residuals.size());
  FeatureVector centroid = FeatureVector::Zero(residuals[0].size());
  for (const FeatureVector& r : residuals) centroid += r;
  centroid /= static_cast<double>(n);

  std::vector<int> seeds;
  int first = 0;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double d = (residuals[i] - centroid).norm();
    if (d > best) {
      best = d;
      first = i;
    }
  }
  seeds.push_back(first);

  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(seeds.size()) < k2) {
    for (int i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (residuals[i] - residuals[seeds.back()]).norm());
    }
    int next = 0;
    best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (nearest[i] > best) {
        best = nearest[i];
        next = i;
      }
    }
    seeds.push_back(next);
  }
  return seeds;
}

std::vector<DomainDescriptor> cluster_residuals(
    const std::vector<FeatureVector>& residuals, int k2) {
  const int n = static_cast<int>(residuals.size());
  const std::vector<int> seeds = farthest_point_seeds(residuals, k2);

  // Single assignment pass: each residual joins its nearest seed (ties to the
  // earlier seed), then each cluster is summarized by its mean.
  std::vector<int> assignment(n, 0);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
      const double d = (residuals[i] - residuals[seeds[s]]).norm();
      if (d < best) {
        best = d;
        assignment[i] = s;
      }
    }
  }

  std::vector<DomainDescriptor> out;
  for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
    FeatureVector mean = FeatureVector::Zero(residuals[0].size());
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (assignment[i] == s) {
        mean += residuals[i];
        ++count;
      }
    }
    if (count == 0) continue;  // duplicate residuals can starve a later seed
    mean /= static_cast<double>(count);
    out.push_back({mean, static_cast<double>(count) / static_cast<double>(n)});
  }
  std::stable_sort(out.begin(), out.end(), [](const DomainDescriptor& a,
                                              const DomainDescriptor& b) {
    return a.weight > b.weight;
  });
  return out;
}

}  // namespace

std::map<int, std::vector<DomainDescriptor>> extract_domain_info(
    const SampleSet& seen, const std::map<int, FeatureVector>& class_embeddings,
    int k1, int k2) {
  if (k1 < 1 || k2 < 1 || k2 > k1) {
    throw InvalidParams("domain extraction requires k1 >= k2 >= 1");
  }
  if (seen.empty()) throw EmptySample("no seen samples to extract domains from");

  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < static_cast<int>(seen.size()); ++i) {
    by_class[seen.samples()[i].class_id].push_back(i);
  }

  std::map<int, std::vector<DomainDescriptor>> out;
  for (const auto& [class_id, indices] : by_class) {
    auto emb_it = class_embeddings.find(class_id);
    if (emb_it == class_embeddings.end()) {
      throw MissingEmbedding("no embedding for class id " + std::to_string(class_id));
    }
    if (static_cast<int>(indices.size()) < k1) {
      throw InsufficientSamples("class id " + std::to_string(class_id) + " has " +
                                std::to_string(indices.size()) +
                                " samples but k1 = " + std::to_string(k1));
    }
    const FeatureVector& emb = emb_it->second;

    // Keep the k1 samples most aligned with the class embedding; stable sort
    // keeps the original order among equal similarities.
    std::vector<int> ranked = indices;
    std::vector<double> sim(seen.size(), 0.0);
    for (int i : indices) sim[i] = cosine_similarity(seen.samples()[i].feature, emb);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](int a, int b) { return sim[a] > sim[b]; });
    ranked.resize(k1);

    std::vector<FeatureVector> residuals;
    residuals.reserve(k1);
    for (int i : ranked) residuals.push_back(seen.samples()[i].feature - emb);

    out[class_id] = cluster_residuals(residuals, k2);
  }
  return out;
}

std::vector<DomainDescriptor> no_domain_descriptors(int d) {
  if (d < 1) throw InvalidParams("dimension must be positive");
  return {{FeatureVector::Zero(d), 1.0}};
}

int nearest_seen_class(const FeatureVector& embedding,
                       const std::map<int, FeatureVector>& seen_embeddings) {
  if (seen_embeddings.empty()) {
    throw InvalidParams("no seen embeddings to match against");
  }
  int best_id = seen_embeddings.begin()->first;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [id, emb] : seen_embeddings) {
    const double s = cosine_similarity(embedding, emb);
    if (s > best) {  // strict: ties keep the lower id (map order)
      best = s;
      best_id = id;
    }
  }
  return best_id;
}

SampleSet synthesize(const GeneratorSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw InvalidParams("sample count must be positive");

  Eigen::VectorXd weights(static_cast<Eigen::Index>(spec.descriptors.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    weights[i] = spec.descriptors[static_cast<std::size_t>(i)].weight;
  }

  rng::Stream rs(seed);
  const int d = static_cast<int>(spec.base.size());
  SampleSet out;
  for (int i = 0; i < n; ++i) {
    const int pick = rs.discrete(weights);
    FeatureVector feature =
        spec.base + spec.descriptors[pick].residual + rs.gaussian_vector(d, spec.noise_sigma);
    out.add({spec.class_id, std::move(feature), spec.provenance});
  }
  return out;
}

SampleSet synthesize_seen_extra(const std::vector<GeneratorSpec>& specs,
                                int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) throw InvalidParams("per-class sample count must be positive");
  SampleSet out;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    GeneratorSpec spec = specs[c];
    spec.provenance = Provenance::GeneratedSeen;
    SampleSet chunk = synthesize(spec, n_per_class, rng::derive(seed, c));
    for (const Sample& s : chunk.samples()) out.add(s);
  }
  return out;
}

SampleSet SyntheticFeatureGenerator::generate(const GeneratorSpec& spec, int n,
                                              std::uint64_t seed) const {
  return synthesize(spec, n, seed);
}

}  // namespace ovl
