#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ovl/core_math.hpp"

namespace ovl {

enum class NodeKind { Superclass, SeenLeaf, CandidateLeaf };

/// A named class with its embedding. Embeddings are compared by cosine, so
/// callers may pass any positive rescaling; file loaders normalize to unit
/// norm on load.
struct EmbeddedClass {
  std::string name;
  FeatureVector embedding;
};

struct TreeNode {
  std::string name;
  NodeKind kind = NodeKind::Superclass;
  std::string parent;                  // empty for superclass roots
  std::vector<std::string> children;   // empty for leaves
};

/**
 * Forest of superclass roots with seen-class and candidate leaves.
 * Immutable after construction: expansion returns a new tree value.
 */
class SemanticTree {
 public:
  bool contains(const std::string& name) const { return nodes_.count(name) > 0; }
  const TreeNode& node(const std::string& name) const;

  std::vector<std::string> superclasses() const { return names_of(NodeKind::Superclass); }
  std::vector<std::string> seen_leaves() const { return names_of(NodeKind::SeenLeaf); }
  std::vector<std::string> candidate_leaves() const {
    return names_of(NodeKind::CandidateLeaf);
  }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::string> names_of(NodeKind kind) const;

  friend SemanticTree build_tree(
      const std::vector<std::pair<std::string, std::string>>& seen);
  friend SemanticTree expand_candidates(
      const SemanticTree& tree,
      const std::vector<std::pair<std::string, std::string>>& pool);

  std::map<std::string, TreeNode> nodes_;  // ordered: deterministic iteration
};

/// Build the forest from (class_name, superclass_name) pairs: each distinct
/// superclass becomes a root, each class a SeenLeaf under it.
SemanticTree build_tree(const std::vector<std::pair<std::string, std::string>>& seen);

/// Attach candidates as CandidateLeaf siblings of the seen leaves under an
/// existing superclass. Re-adding the same (candidate, superclass) pair is
/// idempotent; a candidate naming an existing seen class is rejected.
SemanticTree expand_candidates(
    const SemanticTree& tree,
    const std::vector<std::pair<std::string, std::string>>& pool);

enum class SimMode { HighSim, LowSim };

/// How a candidate's score aggregates its cosine similarities to the seen
/// classes. Max (nearest seen class) is the default; Mean is the documented
/// alternative.
enum class ScoreAggregate { Max, Mean };

/**
 * Rank candidate leaves by embedding similarity to the seen classes and
 * return min(k0, #candidates) names — the most similar under HighSim, the
 * least similar under LowSim. Output is ordered by score (descending for
 * HighSim, ascending for LowSim); ties break lexicographically.
 */
std::vector<std::string> predict_unseen(
    const SemanticTree& tree, const std::map<std::string, EmbeddedClass>& embeddings,
    int k0, SimMode mode, ScoreAggregate aggregate = ScoreAggregate::Max);

}  // namespace ovl
