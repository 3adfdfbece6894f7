#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "proofminer/guard_learner.hpp"
#include "synthetic.hpp"

using namespace proofminer;

namespace {

TrainingInstance inst(std::map<std::string, std::string> attrs, std::string cls) {
  return TrainingInstance{std::move(attrs), std::move(cls)};
}

std::vector<TrainingInstance> induction_instances() {
  return {inst({{"p1", "n"}, {"combined", "false"}}, "simpl"),
          inst({{"p1", "a"}, {"combined", "false"}}, "simpl"),
          inst({{"p1", "m"}, {"combined", "false"}}, "trivial"),
          inst({{"p1", "l"}, {"combined", "false"}}, "simpl")};
}

Corpus induction_corpus() {
  Corpus c;
  auto add = [&](const std::string& name, const std::string& var, const std::string& next) {
    c.traces.push_back(Trace{name,
                             {encode_step("induction", {var}, false), encode_step(next, {}, false)},
                             Polarity::positive});
  };
  add("t1", "n", "simpl");
  add("t2", "a", "simpl");
  add("t3", "m", "trivial");
  add("t4", "l", "simpl");
  return c;
}

double entropy(const std::vector<TrainingInstance>& xs) {
  std::map<std::string, double> counts;
  for (const auto& x : xs)
    counts[x.cls] += 1;
  double h = 0;
  for (const auto& [cls, n] : counts) {
    const double p = n / static_cast<double>(xs.size());
    h -= p * std::log2(p);
  }
  return h;
}

double gain(const std::vector<TrainingInstance>& xs, const std::string& attr) {
  std::map<std::string, std::vector<TrainingInstance>> parts;
  for (const auto& x : xs)
    parts[x.attributes.at(attr)].push_back(x);
  double rest = 0;
  for (const auto& [v, p] : parts)
    rest += static_cast<double>(p.size()) / static_cast<double>(xs.size()) * entropy(p);
  return entropy(xs) - rest;
}

bool repeats_attribute(const DecisionTree& tree, std::size_t at, std::vector<std::string>& path) {
  const auto& node = tree.nodes()[at];
  if (node.is_leaf())
    return false;
  if (std::find(path.begin(), path.end(), node.attribute) != path.end())
    return true;
  path.push_back(node.attribute);
  for (const auto& [v, child] : node.children)
    if (repeats_attribute(tree, child, path))
      return true;
  path.pop_back();
  return false;
}

} // namespace

TEST_CASE("build_training_sets") {
  SUBCASE("one instance per induction occurrence") {
    const auto sets = build_training_sets(induction_corpus());
    REQUIRE(sets.contains(Label("induction")));
    const auto& xs = sets.at(Label("induction"));
    REQUIRE(xs.size() == 4);
    std::multiset<std::string> classes;
    for (const auto& x : xs)
      classes.insert(x.cls);
    CHECK(classes == std::multiset<std::string>{"simpl_0", "simpl_0", "simpl_0", "trivial_0"});
    CHECK(sets.at(Label("simpl_0")).front().cls == kEndClass);
  }
  SUBCASE("single-event trace") {
    Corpus c;
    c.traces.push_back(Trace{"t", {encode_step("trivial", {}, false)}, Polarity::positive});
    const auto sets = build_training_sets(c);
    REQUIRE(sets.size() == 1);
    REQUIRE(sets.at(Label("trivial_0")).size() == 1);
    CHECK(sets.at(Label("trivial_0")).front().cls == kEndClass);
  }
  SUBCASE("worked lemma") {
    const auto c = testing::load_fixture("table1.v");
    const auto sets = build_training_sets(c);
    std::size_t total = 0;
    for (const auto& [l, xs] : sets)
      total += xs.size();
    CHECK(total == 9);
    CHECK(sets.at(Label("intros_0")).front().cls == "induction");
    CHECK(sets.at(Label("induction")).front().cls == "tauto_0");
    CHECK(sets.at(Label("assert")).front().cls == "try");
    CHECK(sets.at(Label("assert")).front().attributes.at("combined") == "true");
    CHECK(sets.at(Label("auto")).front().cls == kEndClass);
  }
  SUBCASE("negative traces are ignored and empty corpora give nothing") {
    CHECK(build_training_sets(Corpus{}).empty());
    Corpus c;
    c.traces.push_back(Trace{"n", {encode_step("auto", {}, false)}, Polarity::negative});
    CHECK(build_training_sets(c).empty());
  }
  SUBCASE("absent positions read as the reserved value") {
    Corpus c;
    c.traces.push_back(Trace{"t",
                             {encode_step("apply", {"H", "x"}, false), encode_step("apply", {"G"}, false)},
                             Polarity::positive});
    const auto& xs = build_training_sets(c).at(Label("apply"));
    REQUIRE(xs.size() == 2);
    CHECK(xs[1].attributes.at("p2") == kAbsentValue);
  }
}

TEST_CASE("training-set cardinality equals event count") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = testing::random_corpus(60, 10, seed);
    std::size_t total = 0;
    for (const auto& [l, xs] : build_training_sets(c))
      total += xs.size();
    CHECK(total == c.event_count());
  }
}

TEST_CASE("learn_tree") {
  SUBCASE("four induction instances") {
    const auto xs = induction_instances();
    const auto tree = learn_tree(xs);
    CHECK(tree.rules() == std::vector<std::string>{"(p1 = a): simpl", "(p1 = l): simpl",
                                                   "(p1 = m): trivial", "(p1 = n): simpl"});
    CHECK(tree.predict({{"p1", "m"}}) == "trivial");
    CHECK(tree.predict({{"p1", "n"}}) == "simpl");
    // Unseen values follow the heaviest child; ties go to the first value.
    CHECK(tree.root().default_value == "a");
    CHECK(tree.predict({{"p1", "z"}}) == "simpl");
  }
  SUBCASE("pure instances give a single leaf") {
    std::vector<TrainingInstance> xs{inst({{"p1", "x"}}, "b"), inst({{"p1", "y"}}, "b")};
    const auto tree = learn_tree(xs);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.predict({{"p1", "q"}}) == "b");
  }
  SUBCASE("identical attributes with split classes tie to the smaller class") {
    std::vector<TrainingInstance> xs{inst({{"p1", "x"}}, "b"), inst({{"p1", "x"}}, "a")};
    const auto tree = learn_tree(xs);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.root().cls == "a");
    CHECK(tree.root().distribution == ClassDistribution{{"a", 1}, {"b", 1}});
  }
  SUBCASE("empty input") {
    std::vector<TrainingInstance> none;
    CHECK_THROWS_AS(learn_tree(none), std::invalid_argument);
  }
  SUBCASE("min_leaf stops the recursion") {
    const auto xs = induction_instances();
    CHECK(learn_tree(xs, 5).nodes().size() == 1);
    CHECK(learn_tree(xs, 5).root().cls == "simpl");
  }
  SUBCASE("heavier child is the default") {
    std::vector<TrainingInstance> xs{inst({{"p1", "a"}}, "t"), inst({{"p1", "b"}}, "s"),
                                     inst({{"p1", "b"}}, "s")};
    CHECK(learn_tree(xs).predict({{"p1", "zz"}}) == "s");
  }
}

TEST_CASE("root attribute maximizes information gain") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> attrs{"p1", "p2", "p3"};
  for (int round = 0; round < 100; ++round) {
    std::vector<TrainingInstance> xs;
    const std::size_t n = 4 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::string, std::string> a;
      for (const auto& name : attrs)
        a[name] = std::string(1, static_cast<char>('u' + rng() % 3));
      // Make the class depend mostly on p2.
      const std::string cls = rng() % 4 == 0 ? "noise" : "c" + a["p2"];
      xs.push_back(inst(a, cls));
    }
    const auto tree = learn_tree(xs);
    if (tree.root().is_leaf()) {
      for (const auto& name : attrs)
        CHECK(gain(xs, name) < 1e-9);
      continue;
    }
    const double chosen = gain(xs, tree.root().attribute);
    for (const auto& name : attrs) {
      const double g = gain(xs, name);
      CHECK(chosen >= g - 1e-9);
      if (std::abs(g - chosen) < 1e-9)
        CHECK(tree.root().attribute <= name);
    }
  }
}

TEST_CASE("trees are independent of instance order") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = testing::random_corpus(60, 10, seed, 5);
    for (const auto& [label, xs] : build_training_sets(c)) {
      auto shuffled = xs;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto a = learn_tree(xs);
      const auto b = learn_tree(shuffled);
      CHECK(a == b);
      std::vector<std::string> path;
      CHECK_FALSE(repeats_attribute(a, 0, path));
      // Leaves predict their majority; pure leaves reproduce the training class.
      for (const auto& x : xs) {
        const auto& leaf = a.leaf_for(x.attributes);
        CHECK(leaf.cls == majority_class(leaf.distribution));
        if (leaf.distribution.size() == 1)
          CHECK(leaf.cls == x.cls);
      }
    }
  }
}

TEST_CASE("training accuracy equals the sum of leaf majorities") {
  const auto c = testing::random_corpus(80, 10, 3, 4);
  for (const auto& [label, xs] : build_training_sets(c)) {
    const auto tree = learn_tree(xs);
    std::size_t correct = 0;
    std::map<std::size_t, ClassDistribution> seen;
    for (const auto& x : xs) {
      const auto leaf = tree.leaf_index(x.attributes);
      correct += tree.nodes()[leaf].cls == x.cls ? 1 : 0;
      ++seen[leaf][x.cls];
    }
    std::size_t majority = 0;
    for (const auto& [leaf, dist] : seen)
      majority += dist.at(majority_class(dist));
    CHECK(correct == majority);
  }
}

TEST_CASE("GuardModel") {
  const auto model = learn_guards(induction_corpus());
  SUBCASE("predictions") {
    CHECK(model.predict(Label("induction"), ParamVector{{"m"}, false}) ==
          Prediction{Prediction::Kind::label, "trivial_0"});
    CHECK(model.predict(Label("induction"), ParamVector{{"n"}, false}) ==
          Prediction{Prediction::Kind::label, "simpl_0"});
    CHECK(model.predict(Label("simpl_0"), ParamVector{}).kind == Prediction::Kind::end);
    CHECK(model.predict(Label("nosuch"), ParamVector{}).kind == Prediction::Kind::unknown_label);
    CHECK(model.leaf(Label("nosuch"), ParamVector{}) == nullptr);
  }
  SUBCASE("domain and arities") {
    CHECK(model.trees().size() == 3);
    CHECK(model.arities().at(Label("induction")) == 1);
    CHECK(model.arities().at(Label("simpl_0")) == 0);
    CHECK(model.initial() == ClassDistribution{{"induction", 4}});
  }
  SUBCASE("rule text") {
    const auto text = model.rules_text();
    CHECK(text.find("MODEL FOR:induction\n") != std::string::npos);
    CHECK(text.find("(p1 = m): trivial_0\n") != std::string::npos);
    CHECK(text.find("(p1 = n): simpl_0\n") != std::string::npos);
  }
  SUBCASE("json round trip keeps the hash") {
    const auto back = GuardModel::from_json(model.to_json());
    CHECK(back == model);
    CHECK(back.content_hash() == model.content_hash());
    CHECK(model.content_hash().size() == 16);
    CHECK(learn_guards(testing::load_fixture("bool.v")).content_hash() != model.content_hash());
  }
  SUBCASE("malformed json") {
    CHECK_THROWS(GuardModel::from_json("{"));
    CHECK_THROWS(GuardModel::from_json("[]"));
  }
}

TEST_CASE("fnv1a_64 reference values") {
  CHECK(fnv1a_64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a_64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a_64("foobar") == 0x85944171f73967e8ULL);
}
