#include "ovl/taxonomy.hpp"

#include <algorithm>
#include <limits>

#include "ovl/errors.hpp"

namespace ovl {

const TreeNode& SemanticTree::node(const std::string& name) const {
  auto it = nodes_.find(name);
  if (it == nodes_.end()) {
    throw UnknownClass("no tree node named '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> SemanticTree::names_of(NodeKind kind) const {
  std::vector<std::string> out;
  for (const auto& [name, node] : nodes_) {
    if (node.kind == kind) out.push_back(name);
  }
  return out;  // map iteration is already sorted
}

SemanticTree build_tree(const std::vector<std::pair<std::string, std::string>>& seen) {
  SemanticTree tree;
  for (const auto& [cls, super] : seen) {
    if (tree.nodes_.count(cls)) {
      throw DuplicateClass("class '" + cls + "' added twice");
    }
    auto super_it = tree.nodes_.find(super);
    if (super_it == tree.nodes_.end()) {
      if (cls == super) {
        throw DuplicateClass("class '" + cls + "' collides with its superclass name");
      }
      super_it = tree.nodes_.emplace(super, TreeNode{super, NodeKind::Superclass, "", {}})
                     .first;
    } else if (super_it->second.kind != NodeKind::Superclass) {
      throw DuplicateClass("superclass '" + super + "' collides with a class name");
    }
    tree.nodes_.emplace(cls, TreeNode{cls, NodeKind::SeenLeaf, super, {}});
    super_it->second.children.push_back(cls);
  }
  return tree;
}

SemanticTree expand_candidates(
    const SemanticTree& tree,
    const std::vector<std::pair<std::string, std::string>>& pool) {
  SemanticTree out = tree;
  for (const auto& [cand, super] : pool) {
    auto super_it = out.nodes_.find(super);
    if (super_it == out.nodes_.end() ||
        super_it->second.kind != NodeKind::Superclass) {
      throw UnknownSuperclass("candidate '" + cand + "' names missing superclass '" +
                              super + "'");
    }
    auto existing = out.nodes_.find(cand);
    if (existing != out.nodes_.end()) {
      const TreeNode& node = existing->second;
      if (node.kind == NodeKind::CandidateLeaf && node.parent == super) {
        continue;  // same attachment twice: idempotent
      }
      throw NameCollision("candidate '" + cand + "' collides with existing node");
    }
    out.nodes_.emplace(cand, TreeNode{cand, NodeKind::CandidateLeaf, super, {}});
    super_it->second.children.push_back(cand);
  }
  return out;
}

std::vector<std::string> predict_unseen(
    const SemanticTree& tree, const std::map<std::string, EmbeddedClass>& embeddings,
    int k0, SimMode mode, ScoreAggregate aggregate) {
  if (k0 < 0) throw InvalidParams("k0 must be nonnegative");
  const std::vector<std::string> seen = tree.seen_leaves();
  const std::vector<std::string> cands = tree.candidate_leaves();
  if (seen.empty()) {
    throw InvalidParams("tree has no seen leaves to score candidates against");
  }

  auto embedding_of = [&](const std::string& name) -> const FeatureVector& {
    auto it = embeddings.find(name);
    if (it == embeddings.end()) {
      throw MissingEmbedding("no embedding for class '" + name + "'");
    }
    return it->second.embedding;
  };

  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(cands.size());
  for (const std::string& cand : cands) {
    const FeatureVector& ce = embedding_of(cand);
    double score = 0.0;
    if (aggregate == ScoreAggregate::Max) {
      score = -std::numeric_limits<double>::infinity();
      for (const std::string& s : seen) {
        score = std::max(score, cosine_similarity(ce, embedding_of(s)));
      }
    } else {
      for (const std::string& s : seen) score += cosine_similarity(ce, embedding_of(s));
      score /= static_cast<double>(seen.size());
    }
    scored.emplace_back(score, cand);
  }

  if (mode == SimMode::HighSim) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
  } else {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });
  }

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k0),
                                                 scored.size());
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace ovl
