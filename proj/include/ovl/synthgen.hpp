#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ovl/core_math.hpp"

namespace ovl {

/// One recurring capture condition of a class, summarized as the mean offset
/// of its member features from the class embedding, plus the fraction of
/// inspected samples assigned to it.
struct DomainDescriptor {
  FeatureVector residual;
  double weight = 0.0;  // in (0, 1]; a class's weights sum to 1
};

/// Everything needed to synthesize features for one class.
struct GeneratorSpec {
  std::string class_name;
  int class_id = 0;
  FeatureVector base;  // class embedding the residuals are relative to
  std::vector<DomainDescriptor> descriptors;
  double noise_sigma = 0.0;  // must be > 0
  Provenance provenance = Provenance::GeneratedUnseen;

  void validate() const;
};

/**
 * Summarize each seen class's domain structure from its training samples.
 *
 * Per class: rank samples by cosine similarity to the class embedding, keep
 * the top k1, form residuals (feature - embedding), and split them into k2
 * clusters via greedy farthest-point seeding followed by a single
 * assign-to-nearest-seed pass. Each cluster becomes a descriptor whose
 * residual is the cluster mean and whose weight is the cluster's fraction of
 * the k1 samples; descriptors are ordered by descending weight (ties keep
 * seed order). Clusters left empty by duplicate residuals are dropped, so
 * weights always sum to 1.
 */
std::map<int, std::vector<DomainDescriptor>> extract_domain_info(
    const SampleSet& seen, const std::map<int, FeatureVector>& class_embeddings,
    int k1, int k2);

/// The descriptor list that disables domain guidance: one zero residual with
/// weight 1, so synthesis reduces to embedding + noise.
std::vector<DomainDescriptor> no_domain_descriptors(int d);

/// The seen class whose embedding has the highest cosine similarity to the
/// given embedding (ties break toward the lower class id). Used to pick which
/// class's descriptors an unseen class inherits.
int nearest_seen_class(const FeatureVector& embedding,
                       const std::map<int, FeatureVector>& seen_embeddings);

/**
 * Draw n samples for one class: each sample picks a descriptor
 * weight-proportionally from the seeded stream, then emits
 * base + residual + Gaussian(0, noise_sigma^2) noise.
 * Identical (spec, n, seed) triples produce identical samples.
 */
SampleSet synthesize(const GeneratorSpec& spec, int n, std::uint64_t seed);

/// Synthesize n_per_class extra samples for every listed seen class, with
/// provenance forced to GeneratedSeen and per-class substreams derived from
/// the seed, so class order in the output is spec order.
SampleSet synthesize_seen_extra(const std::vector<GeneratorSpec>& specs,
                                int n_per_class, std::uint64_t seed);

/// Pluggable feature source, so the pipeline can swap the Gaussian
/// synthesizer for another backend without touching callers.
class SampleGenerator {
 public:
  virtual ~SampleGenerator() = default;
  virtual SampleSet generate(const GeneratorSpec& spec, int n,
                             std::uint64_t seed) const = 0;
};

/// Default backend: the synthesize() pipeline above.
class SyntheticFeatureGenerator final : public SampleGenerator {
 public:
  SampleSet generate(const GeneratorSpec& spec, int n,
                     std::uint64_t seed) const override;
};

}  // namespace ovl
