#include "proofminer/guard_learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace proofminer {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kGainEpsilon = 1e-12;

// p1 < p2 < ... < p10 < ... < combined < anything else (by name).
bool attribute_less(const std::string& a, const std::string& b) {
  auto rank = [](const std::string& s) -> std::pair<int, long> {
    if (s.size() > 1 && s[0] == 'p' &&
        std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return {0, std::stol(s.substr(1))};
    if (s == kCombinedAttribute)
      return {1, 0};
    return {2, 0};
  };
  const auto ra = rank(a), rb = rank(b);
  if (ra != rb)
    return ra < rb;
  return a < b;
}

double entropy(const ClassDistribution& dist, std::size_t total) {
  if (total == 0)
    return 0.0;
  double h = 0.0;
  for (const auto& [_, count] : dist) {
    if (count == 0)
      continue;
    const double p = static_cast<double>(count) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

class Builder {
public:
  Builder(std::span<const TrainingInstance> instances, std::size_t min_leaf)
      : instances_(instances), min_leaf_(min_leaf) {}

  std::vector<DecisionTree::Node> build(std::vector<std::string> attributes) {
    std::vector<std::size_t> all(instances_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, attributes);
    return std::move(nodes_);
  }

private:
  std::size_t grow(const std::vector<std::size_t>& members,
                   const std::vector<std::string>& attributes) {
    ClassDistribution dist;
    for (auto i : members)
      ++dist[instances_[i].cls];

    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    nodes_[index].distribution = dist;
    nodes_[index].cls = majority_class(dist);

    if (dist.size() <= 1 || attributes.empty() || members.size() < min_leaf_)
      return index;

    const double base = entropy(dist, members.size());
    double best_gain = 0.0;
    std::optional<std::size_t> best;
    std::map<std::string, std::vector<std::size_t>> best_parts;

    for (std::size_t a = 0; a < attributes.size(); ++a) {
      std::map<std::string, std::vector<std::size_t>> parts;
      for (auto i : members)
        parts[value_of(i, attributes[a])].push_back(i);
      if (parts.size() < 2)
        continue;
      const auto big_enough = std::count_if(parts.begin(), parts.end(), [&](const auto& p) {
        return p.second.size() >= min_leaf_;
      });
      if (big_enough < 2)
        continue;
      double remainder = 0.0;
      for (const auto& [_, part] : parts) {
        ClassDistribution d;
        for (auto i : part)
          ++d[instances_[i].cls];
        remainder += static_cast<double>(part.size()) / static_cast<double>(members.size()) *
                     entropy(d, part.size());
      }
      const double gain = base - remainder;
      if (gain > kGainEpsilon && (!best || gain > best_gain + kGainEpsilon)) {
        best_gain = gain;
        best = a;
        best_parts = std::move(parts);
      }
    }
    if (!best)
      return index;

    std::vector<std::string> rest = attributes;
    rest.erase(rest.begin() + static_cast<long>(*best));

    std::string default_value;
    std::size_t default_mass = 0;
    for (const auto& [value, part] : best_parts) {
      if (part.size() > default_mass) {
        default_mass = part.size();
        default_value = value;
      }
    }
    nodes_[index].attribute = attributes[*best];
    nodes_[index].default_value = default_value;
    for (const auto& [value, part] : best_parts) {
      const auto child = grow(part, rest);
      nodes_[index].children.emplace(value, child);
    }
    return index;
  }

  const std::string& value_of(std::size_t instance, const std::string& attribute) const {
    const auto& attrs = instances_[instance].attributes;
    const auto it = attrs.find(attribute);
    return it == attrs.end() ? kAbsentValue : it->second;
  }

  std::span<const TrainingInstance> instances_;
  std::size_t min_leaf_;
  std::vector<DecisionTree::Node> nodes_;
};

void collect_rules(const std::vector<DecisionTree::Node>& nodes, std::size_t at,
                   std::vector<std::string>& path, std::vector<std::string>& out) {
  const auto& node = nodes[at];
  if (node.is_leaf()) {
    std::string line;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0)
        line += " and ";
      line += path[i];
    }
    out.push_back(path.empty() ? node.cls : line + ": " + node.cls);
    return;
  }
  for (const auto& [value, child] : node.children) {
    path.push_back("(" + node.attribute + " = " + value + ")");
    collect_rules(nodes, child, path, out);
    path.pop_back();
  }
}

ojson node_to_json(const std::vector<DecisionTree::Node>& nodes, std::size_t at) {
  const auto& node = nodes[at];
  ojson j;
  if (node.is_leaf()) {
    j["leaf"] = node.cls;
  } else {
    j["split"] = node.attribute;
    j["default"] = node.default_value;
  }
  j["distribution"] = ojson::object();
  for (const auto& [cls, count] : node.distribution)
    j["distribution"][cls] = count;
  if (!node.is_leaf()) {
    j["branches"] = ojson::object();
    for (const auto& [value, child] : node.children)
      j["branches"][value] = node_to_json(nodes, child);
  }
  return j;
}

std::size_t node_from_json(const ojson& j, std::vector<DecisionTree::Node>& nodes) {
  const std::size_t index = nodes.size();
  nodes.emplace_back();
  DecisionTree::Node node;
  for (const auto& [cls, count] : j.at("distribution").items())
    node.distribution[cls] = count.get<std::size_t>();
  if (j.contains("leaf")) {
    node.cls = j.at("leaf").get<std::string>();
  } else {
    node.attribute = j.at("split").get<std::string>();
    node.default_value = j.at("default").get<std::string>();
    node.cls = majority_class(node.distribution);
    for (const auto& [value, child] : j.at("branches").items())
      node.children.emplace(value, node_from_json(child, nodes));
    if (node.attribute.empty() || !node.children.contains(node.default_value))
      throw std::runtime_error("guard tree: bad split node");
  }
  nodes[index] = std::move(node);
  return index;
}

} // namespace

std::string param_attribute(std::size_t position) {
  return "p" + std::to_string(position);
}

std::map<std::string, std::string> event_attributes(const ParamVector& values, std::size_t arity) {
  std::map<std::string, std::string> attrs;
  for (std::size_t i = 0; i < arity; ++i)
    attrs[param_attribute(i + 1)] = i < values.params.size() ? values.params[i] : kAbsentValue;
  attrs[kCombinedAttribute] = values.combined ? "true" : "false";
  return attrs;
}

std::string majority_class(const ClassDistribution& dist) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [cls, count] : dist) {
    if (count > best_count) {
      best = cls;
      best_count = count;
    }
  }
  return best;
}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty())
    throw std::invalid_argument("decision tree needs at least one node");
}

DecisionTree DecisionTree::leaf(ClassDistribution distribution) {
  Node n;
  n.cls = majority_class(distribution);
  n.distribution = std::move(distribution);
  return DecisionTree({std::move(n)});
}

std::size_t DecisionTree::leaf_index(const std::map<std::string, std::string>& attributes) const {
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const auto& node = nodes_[at];
    const auto a = attributes.find(node.attribute);
    const std::string& value = a == attributes.end() ? kAbsentValue : a->second;
    auto child = node.children.find(value);
    if (child == node.children.end())
      child = node.children.find(node.default_value);
    at = child->second;
  }
  return at;
}

std::vector<std::string> DecisionTree::rules() const {
  std::vector<std::string> out;
  std::vector<std::string> path;
  if (!nodes_.empty())
    collect_rules(nodes_, 0, path, out);
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& [_, c] : nodes_[i].children) {
      d[c] = d[i] + 1;
      deepest = std::max(deepest, d[c]);
    }
  }
  return deepest;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  if (a.nodes_.size() != b.nodes_.size())
    return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[i];
    if (x.attribute != y.attribute || x.children != y.children ||
        x.default_value != y.default_value || x.cls != y.cls || x.distribution != y.distribution)
      return false;
  }
  return true;
}

DecisionTree InfoGainTreeLearner::learn(std::span<const TrainingInstance> instances) const {
  if (instances.empty())
    throw std::invalid_argument("cannot learn a decision tree from zero instances");
  std::vector<TrainingInstance> sorted(instances.begin(), instances.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::string> attributes;
  for (const auto& inst : sorted)
    for (const auto& [name, _] : inst.attributes)
      if (std::find(attributes.begin(), attributes.end(), name) == attributes.end())
        attributes.push_back(name);
  std::sort(attributes.begin(), attributes.end(), attribute_less);

  return DecisionTree(Builder(sorted, min_leaf_).build(std::move(attributes)));
}

DecisionTree learn_tree(std::span<const TrainingInstance> instances, std::size_t min_leaf) {
  return InfoGainTreeLearner(min_leaf).learn(instances);
}

std::map<Label, std::vector<TrainingInstance>> build_training_sets(const Corpus& corpus) {
  std::map<Label, std::size_t> arity;
  for (const auto& trace : corpus.traces) {
    if (trace.polarity != Polarity::positive)
      continue;
    for (const auto& e : trace.events) {
      auto& k = arity[e.label];
      k = std::max(k, e.values.params.size());
    }
  }

  std::map<Label, std::vector<TrainingInstance>> sets;
  for (const auto& trace : corpus.traces) {
    if (trace.polarity != Polarity::positive)
      continue;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& e = trace.events[i];
      TrainingInstance inst;
      inst.attributes = event_attributes(e.values, arity[e.label]);
      inst.cls = i + 1 < trace.events.size() ? trace.events[i + 1].label.str() : kEndClass;
      sets[e.label].push_back(std::move(inst));
    }
  }
  return sets;
}

Prediction Prediction::from_class(const std::string& cls) {
  if (cls == kEndClass)
    return Prediction{Kind::end, {}};
  return Prediction{Kind::label, cls};
}

GuardModel::GuardModel(std::map<Label, DecisionTree> trees, std::map<Label, std::size_t> arities,
                       ClassDistribution initial)
    : trees_(std::move(trees)), arities_(std::move(arities)), initial_(std::move(initial)) {
  for (const auto& [label, _] : trees_)
    arities_.try_emplace(label, 0);
}

const DecisionTree::Node* GuardModel::leaf(const Label& label, const ParamVector& values) const {
  const auto t = trees_.find(label);
  if (t == trees_.end())
    return nullptr;
  return &t->second.leaf_for(event_attributes(values, arities_.at(label)));
}

std::optional<std::size_t> GuardModel::leaf_index(const Label& label,
                                                  const ParamVector& values) const {
  const auto t = trees_.find(label);
  if (t == trees_.end())
    return std::nullopt;
  return t->second.leaf_index(event_attributes(values, arities_.at(label)));
}

Prediction GuardModel::predict(const Label& label, const ParamVector& values) const {
  const auto* node = leaf(label, values);
  if (!node)
    return Prediction{Prediction::Kind::unknown_label, {}};
  return Prediction::from_class(node->cls);
}

std::string GuardModel::rules_text() const {
  std::string out;
  for (const auto& [label, tree] : trees_) {
    out += "MODEL FOR:" + label.str() + "\n";
    out += "------------------\n";
    for (const auto& rule : tree.rules())
      out += rule + "\n";
    out += "\n";
  }
  return out;
}

std::string GuardModel::to_json() const {
  ojson doc;
  doc["version"] = 1;
  doc["initial"] = ojson::object();
  for (const auto& [cls, count] : initial_)
    doc["initial"][cls] = count;
  doc["labels"] = ojson::array();
  for (const auto& [label, tree] : trees_) {
    ojson entry;
    entry["label"] = label.str();
    entry["arity"] = arities_.at(label);
    entry["rules"] = tree.rules();
    entry["tree"] = node_to_json(tree.nodes(), 0);
    doc["labels"].push_back(std::move(entry));
  }
  return doc.dump();
}

GuardModel GuardModel::from_json(std::string_view json) {
  try {
    const auto doc = ojson::parse(json);
    if (doc.at("version").get<int>() != 1)
      throw std::runtime_error("unsupported guard model version");
    ClassDistribution initial;
    if (doc.contains("initial"))
      for (const auto& [cls, count] : doc["initial"].items())
        initial[cls] = count.get<std::size_t>();
    std::map<Label, DecisionTree> trees;
    std::map<Label, std::size_t> arities;
    for (const auto& entry : doc.at("labels")) {
      Label label(entry.at("label").get<std::string>());
      std::vector<DecisionTree::Node> nodes;
      node_from_json(entry.at("tree"), nodes);
      arities[label] = entry.at("arity").get<std::size_t>();
      trees.emplace(label, DecisionTree(std::move(nodes)));
    }
    return GuardModel(std::move(trees), std::move(arities), std::move(initial));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed guard model: ") + e.what());
  } catch (const TraceError& e) {
    throw std::runtime_error(std::string("malformed guard model: ") + e.what());
  }
}

std::uint64_t fnv1a_64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string GuardModel::content_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a_64(to_json())));
  return buf;
}

GuardModel learn_guards(const Corpus& corpus, const TreeLearner& learner) {
  const auto sets = build_training_sets(corpus);
  std::map<Label, DecisionTree> trees;
  std::map<Label, std::size_t> arities;
  for (const auto& [label, instances] : sets) {
    trees.emplace(label, learner.learn(instances));
    std::size_t k = 0;
    for (const auto& [name, _] : instances.front().attributes)
      if (name != kCombinedAttribute)
        ++k;
    arities[label] = k;
  }
  ClassDistribution initial;
  for (const auto& trace : corpus.traces)
    if (trace.polarity == Polarity::positive && !trace.events.empty())
      ++initial[trace.events.front().label.str()];
  return GuardModel(std::move(trees), std::move(arities), std::move(initial));
}

GuardModel learn_guards(const Corpus& corpus, std::size_t min_leaf) {
  return learn_guards(corpus, InfoGainTreeLearner(min_leaf));
}

} // namespace proofminer
