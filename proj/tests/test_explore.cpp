#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "etgl/explore.hpp"
#include "etgl/theorem.hpp"

using etgl::Box;
using etgl::CountTable;
using etgl::EpsilonSchedule;
using etgl::ExplorationOption;
using etgl::Mat;
using etgl::ModelBuffer;
using etgl::OptionState;
using etgl::Rng;
using etgl::SimHasher;
using etgl::Vec;

namespace {

Vec one_hot(int i, int dim) {
  Vec v = Vec::Zero(dim);
  v(i) = 1.0;
  return v;
}

Vec scalar(double x) { return Vec::Constant(1, x); }

Box unit_box(int dim) { return {Vec::Constant(dim, -1.0), Vec::Constant(dim, 1.0)}; }

// Chain s_0 -> s_1 -> ... -> s_{n-1}, one transition per bucket labelled by
// the index of its target; counts n - i, strictly decreasing.
struct Chain {
  int n;
  SimHasher hasher;
  ModelBuffer model;
  CountTable counts;

  explicit Chain(int n_)
      : n(n_),
        hasher(2.0 * Mat::Identity(n_, n_) - Mat::Ones(n_, n_)),
        model(hasher, 4) {
    Rng rng(0);
    for (int i = 0; i + 1 < n; ++i) model.insert({one_hot(i, n), scalar(i + 1), 0.0, one_hot(i + 1, n)}, rng);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n - i; ++c) counts.record_visit(hasher.hash(one_hot(i, n)));
  }
};

// 1D line x in [-10, 10] with displacement actions in [-1, 1].
class LineModel final : public etgl::TransitionModel {
 public:
  Vec model_transition(const Vec& s, const Vec& a) const override {
    return scalar(std::clamp(s(0) + a(0), -10.0, 10.0));
  }
  const Box& action_box() const override { return box_; }

 private:
  Box box_{scalar(-1.0), scalar(1.0)};
};

}  // namespace

TEST_CASE("option buffer: empty root bucket yields nothing") {
  Chain c(3);
  Rng rng(1);
  CHECK_FALSE(etgl::generate_option_buffer(one_hot(2, 3), c.hasher, c.counts, c.model, 5, rng).has_value());
}

TEST_CASE("option buffer: unvisited first child returns a one-step option") {
  Chain c(3);
  CountTable fresh;
  fresh.record_visit(c.hasher.hash(one_hot(0, 3)));
  Rng rng(2);
  const auto opt = etgl::generate_option_buffer(one_hot(0, 3), c.hasher, fresh, c.model, 10, rng);
  REQUIRE(opt.has_value());
  REQUIRE(opt->length() == 1);
  CHECK(opt->actions[0](0) == 1.0);
}

TEST_CASE("option buffer: budget 5 on a decreasing chain, checked against exhaustive enumeration") {
  Chain c(6);
  const std::vector<int> sizes(6, 1);
  const auto e = etgl::enumerate_chain_search(sizes);
  CHECK(e.total_probability == doctest::Approx(1.0).epsilon(1e-12));
  // Reaching s_5 needs every expansion to pick the deepest node: 1 / 5!.
  CHECK(e.chain_option_probability == doctest::Approx(1.0 / 120.0).epsilon(1e-12));

  int full = 0;
  std::uint64_t first_full_seed = 0;
  const int seeds = 12000;
  for (int seed = 1; seed <= seeds; ++seed) {
    Rng rng(seed);
    const auto opt = etgl::generate_option_buffer(one_hot(0, 6), c.hasher, c.counts, c.model, 5, rng);
    REQUIRE(opt.has_value());  // every child has a smaller count than the root
    std::vector<double> key;
    for (const auto& a : opt->actions) key.push_back(a(0));
    // Options are root paths of the chain, so labels are 1, 2, ..., length.
    for (std::size_t i = 0; i < key.size(); ++i) CHECK(key[i] == i + 1.0);
    CHECK(e.option_probability.count(key) == 1);
    if (opt->length() == 5) {
      ++full;
      if (!first_full_seed) first_full_seed = seed;
    }
  }
  CHECK(first_full_seed > 0);
  CHECK(full / double(seeds) == doctest::Approx(1.0 / 120.0).epsilon(0.25));
}

TEST_CASE("tree search: N=3 chain distribution matches the hand-derived one") {
  // Sizes (2, 2, 2), budget 2: chain option 1/2 * 1/2 * 1/2, one-step option
  // 1/2 * (1/2 + 1/4) + 1/2 * 1/2 * 1/2, no option otherwise.
  const std::vector<int> sizes{2, 2, 2};
  const auto e = etgl::enumerate_chain_search(sizes);
  CHECK(e.chain_option_probability == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
  CHECK(e.option_probability.at({1.0}) == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
  CHECK(e.no_option_probability == doctest::Approx(3.0 / 8.0).epsilon(1e-12));
  CHECK(e.option_probability.size() == 2);
}

TEST_CASE("option model: budget 1 and fresh counts give one-step options") {
  LineModel line;
  Rng hash_rng(3);
  SimHasher h(9, 1, hash_rng, etgl::HashPreprocess::affine_box, scalar(-10), scalar(10));
  CountTable busy;
  for (double x = -10; x <= 10; x += 0.01) busy.record_visit(h.hash(scalar(x)));
  CountTable fresh;
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    CHECK(etgl::generate_option_model(scalar(rng.uniform(-9, 9)), h, busy, line, 1, rng).length() == 1);
    CHECK(etgl::generate_option_model(scalar(rng.uniform(-9, 9)), h, fresh, line, 20, rng).length() == 1);
  }
}

TEST_CASE("option model: selected node is a least-visited node (exhaustive audit)") {
  LineModel line;
  Rng hash_rng(5);
  SimHasher h(9, 1, hash_rng, etgl::HashPreprocess::affine_box, scalar(-10), scalar(10));
  CountTable counts;  // counts rise toward the origin
  for (double x = -10; x <= 10; x += 0.01) {
    const int visits = 1 + static_cast<int>(10 - std::abs(x));
    for (int v = 0; v < visits; ++v) counts.record_visit(h.hash(scalar(x)));
  }
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec root = scalar(rng.uniform(-3, 3));
    etgl::RngIndexSource picks(rng);
    const auto trace = etgl::tree_search(root, h, counts, 10, etgl::model_expander(line, rng), picks);
    CHECK_FALSE(trace.early_exit);
    const auto sel = trace.nodes[trace.selected];
    for (std::size_t i = 0; i < trace.nodes.size(); ++i) {
      CHECK(sel.count <= trace.nodes[i].count);
      if (static_cast<int>(i) < trace.selected) CHECK(trace.nodes[i].count > sel.count);
    }
    // The option replays to the selected node through the true model.
    Vec s = root;
    for (const auto& a : trace.option().actions) s = line.model_transition(s, a);
    CHECK(s(0) == sel.state(0));
    CHECK(trace.option().length() <= 10);
  }
}

TEST_CASE("select_action: greedy at epsilon 0, options run to completion") {
  const Box box = unit_box(2);
  const etgl::GreedyPolicy greedy = [](const Vec&, const Vec&) { return Vec::Constant(2, 0.5); };
  Rng rng(7);
  OptionState os;
  EpsilonSchedule eps{0.0, 1.0, 0.0};
  for (int i = 0; i < 20; ++i) CHECK(etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), eps, os, {}, box, rng) == Vec::Constant(2, 0.5));

  ExplorationOption opt{{Vec::Constant(2, -0.1), Vec::Constant(2, -0.2), Vec::Constant(2, 3.0)}};
  int generated = 0;
  const etgl::OptionGenerator gen = [&](const Vec&, Rng&) {
    ++generated;
    return std::optional<ExplorationOption>(opt);
  };
  EpsilonSchedule always{1.0, 1.0, 0.0};
  CHECK(etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), always, os, gen, box, rng) == Vec::Constant(2, -0.1));
  // epsilon is not consulted mid-option
  CHECK(etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), eps, os, gen, box, rng) == Vec::Constant(2, -0.2));
  CHECK(etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), eps, os, gen, box, rng) == Vec::Constant(2, 1.0));
  CHECK(generated == 1);
  CHECK_FALSE(os.active());
  CHECK(etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), eps, os, gen, box, rng) == Vec::Constant(2, 0.5));
}

TEST_CASE("select_action: epsilon 1 with no option falls back to a uniform action") {
  const Box box{Vec::Constant(2, -0.95), Vec::Constant(2, 0.95)};
  const etgl::GreedyPolicy greedy = [](const Vec&, const Vec&) { return Vec::Constant(2, 5.0); };
  const etgl::OptionGenerator none = [](const Vec&, Rng&) { return std::optional<ExplorationOption>(); };
  Rng rng(8);
  OptionState os;
  EpsilonSchedule eps{1.0, 1.0, 0.0};
  Vec mean = Vec::Zero(2);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vec a = etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), eps, os, none, box, rng);
    CHECK(box.contains(a));
    mean += a / n;
  }
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  EpsilonSchedule greedy_only{0.0, 1.0, 0.0};
  CHECK(box.contains(etgl::select_action(greedy, Vec::Zero(2), Vec::Zero(2), greedy_only, os, none, box, rng)));
}

TEST_CASE("ez-greedy: durations uniform on 1..N with one repeated action") {
  const Box box = unit_box(2);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) CHECK(etgl::ez_greedy_option(1, box, rng).length() == 1);
  std::vector<int> hist(5, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto o = etgl::ez_greedy_option(4, box, rng);
    REQUIRE(o.length() >= 1);
    REQUIRE(o.length() <= 4);
    ++hist[o.length()];
    for (const auto& a : o.actions) CHECK(a == o.actions[0]);
  }
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(hist[n] / double(draws) - 0.25) <= 0.02);
}

TEST_CASE("epsilon decay") {
  EpsilonSchedule s{0.7, 1.0, 0.0};
  s.decay();
  CHECK(s.epsilon == 0.7);
  EpsilonSchedule d{1.0, 0.9999988, 0.0};
  for (int i = 0; i < 1000000; ++i) d.decay();
  CHECK(d.epsilon == doctest::Approx(std::pow(0.9999988, 1e6)).epsilon(1e-9));
  CHECK(d.epsilon == doctest::Approx(0.301).epsilon(0.002));
  EpsilonSchedule f{0.1, 0.5, 0.1};
  f.decay();
  CHECK(f.epsilon == 0.1);
}

TEST_CASE("gaussian action stays in the box") {
  const Box box = unit_box(2);
  Rng rng(10);
  for (int i = 0; i < 1000; ++i) CHECK(box.contains(etgl::gaussian_action(Vec::Constant(2, 0.9), 0.2, box, rng)));
}
