// Data guards: for every label, a decision tree that predicts the label of
// the next proof step from the parameters of the current one.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proofminer/trace.hpp"

namespace proofminer {

/// Class of the last event of a trace.
inline const std::string kEndClass = "\xE2\x9F\xA8" "end" "\xE2\x9F\xA9"; // ⟨end⟩
/// Attribute value for a parameter position the event does not fill.
inline const std::string kAbsentValue = "\xE2\x88\x85"; // ∅
inline const std::string kCombinedAttribute = "combined";

/// Count of training instances per class.
using ClassDistribution = std::map<std::string, std::size_t>;

struct TrainingInstance {
  std::map<std::string, std::string> attributes;
  std::string cls;

  friend auto operator<=>(const TrainingInstance&, const TrainingInstance&) = default;
};

/// Name of the i-th (1-based) positional parameter attribute.
std::string param_attribute(std::size_t position);

/// Attribute map for an event of a label with arity `arity`.
std::map<std::string, std::string> event_attributes(const ParamVector& values, std::size_t arity);

/// Majority class; ties go to the lexicographically smallest class name.
std::string majority_class(const ClassDistribution& dist);

class DecisionTree {
public:
  struct Node {
    /// Split attribute; empty for leaves.
    std::string attribute;
    std::map<std::string, std::size_t> children;
    /// Branch taken for attribute values never seen in training.
    std::string default_value;
    std::string cls;
    ClassDistribution distribution;

    bool is_leaf() const noexcept { return attribute.empty(); }
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes);

  static DecisionTree leaf(ClassDistribution distribution);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.front(); }

  /// Index of the leaf reached by `attributes`. Missing attributes read as
  /// kAbsentValue; unseen values follow the default branch.
  std::size_t leaf_index(const std::map<std::string, std::string>& attributes) const;
  const Node& leaf_for(const std::map<std::string, std::string>& attributes) const {
    return nodes_[leaf_index(attributes)];
  }
  const std::string& predict(const std::map<std::string, std::string>& attributes) const {
    return leaf_for(attributes).cls;
  }

  /// One "(attr = value) and ...: class" line per leaf, depth first.
  std::vector<std::string> rules() const;

  std::size_t depth() const;

  friend bool operator==(const DecisionTree& a, const DecisionTree& b);

private:
  std::vector<Node> nodes_;
};

/// Pluggable classifier back end; every learner produces a DecisionTree.
class TreeLearner {
public:
  virtual ~TreeLearner() = default;
  /// Throws std::invalid_argument on an empty instance list.
  virtual DecisionTree learn(std::span<const TrainingInstance> instances) const = 0;
  virtual std::string name() const = 0;
};

/// Top-down induction with information gain and multiway categorical splits,
/// no pruning. Deterministic for any instance order.
class InfoGainTreeLearner final : public TreeLearner {
public:
  explicit InfoGainTreeLearner(std::size_t min_leaf = 1) : min_leaf_(min_leaf < 1 ? 1 : min_leaf) {}

  DecisionTree learn(std::span<const TrainingInstance> instances) const override;
  std::string name() const override { return "infogain-tree"; }

private:
  std::size_t min_leaf_;
};

DecisionTree learn_tree(std::span<const TrainingInstance> instances, std::size_t min_leaf = 1);

/// One instance per event of every positive trace; the class is the label of
/// the following event or kEndClass. Negative traces are ignored.
std::map<Label, std::vector<TrainingInstance>> build_training_sets(const Corpus& corpus);

struct Prediction {
  enum class Kind { label, end, unknown_label };
  Kind kind = Kind::unknown_label;
  std::string label;

  static Prediction from_class(const std::string& cls);
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

class GuardModel {
public:
  GuardModel() = default;
  GuardModel(std::map<Label, DecisionTree> trees, std::map<Label, std::size_t> arities,
             ClassDistribution initial);

  const std::map<Label, DecisionTree>& trees() const noexcept { return trees_; }
  const std::map<Label, std::size_t>& arities() const noexcept { return arities_; }
  /// How often each label opens a training trace.
  const ClassDistribution& initial() const noexcept { return initial_; }

  bool contains(const Label& label) const { return trees_.contains(label); }

  Prediction predict(const Label& label, const ParamVector& values) const;

  /// Leaf reached by (label, values), or nullptr for an unknown label.
  const DecisionTree::Node* leaf(const Label& label, const ParamVector& values) const;
  /// Index of that leaf inside the label's tree.
  std::optional<std::size_t> leaf_index(const Label& label, const ParamVector& values) const;

  /// Fig.-style text dump: a "MODEL FOR:<label>" header and rules per label.
  std::string rules_text() const;

  std::string to_json() const;
  static GuardModel from_json(std::string_view json);
  /// FNV-1a 64 over the canonical JSON, as 16 hex digits.
  std::string content_hash() const;

  friend bool operator==(const GuardModel&, const GuardModel&) = default;

private:
  std::map<Label, DecisionTree> trees_;
  std::map<Label, std::size_t> arities_;
  ClassDistribution initial_;
};

/// Learns one tree per label from the positive traces of `corpus`.
GuardModel learn_guards(const Corpus& corpus, const TreeLearner& learner);
GuardModel learn_guards(const Corpus& corpus, std::size_t min_leaf = 1);

/// FNV-1a 64-bit.
std::uint64_t fnv1a_64(std::string_view bytes) noexcept;

} // namespace proofminer
