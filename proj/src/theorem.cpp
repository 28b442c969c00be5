#include "etgl/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>

#include "etgl/common.hpp"
#include "etgl/explore.hpp"
#include "etgl/hashing.hpp"

namespace etgl {

namespace {

// Replays a fixed prefix of choices, then takes choice 0 for every new
// decision, recording each decision's range.
class ScriptedSource final : public IndexSource {
 public:
  explicit ScriptedSource(std::vector<std::size_t> prefix) : choices_(std::move(prefix)) {}

  std::size_t pick(std::size_t n) override {
    if (pos_ == choices_.size()) choices_.push_back(0);
    if (ranges_.size() <= pos_) ranges_.resize(pos_ + 1);
    ranges_[pos_] = n;
    return choices_[pos_++];
  }

  const std::vector<std::size_t>& choices() const { return choices_; }
  const std::vector<std::size_t>& ranges() const { return ranges_; }

  double probability() const {
    double p = 1.0;
    for (std::size_t i = 0; i < pos_; ++i) p /= static_cast<double>(ranges_[i]);
    return p;
  }

 private:
  std::vector<std::size_t> choices_;
  std::vector<std::size_t> ranges_;
  std::size_t pos_ = 0;
};

Vec one_hot(int i, int dim) {
  Vec v = Vec::Zero(dim);
  v(i) = 1.0;
  return v;
}

Vec label(double x) {
  Vec v(1);
  v << x;
  return v;
}

}  // namespace

ChainEnumeration enumerate_chain_search(std::span<const int> bucket_sizes) {
  const int n = static_cast<int>(bucket_sizes.size());
  require(n >= 2, "enumerate_chain_search: chain length must be at least 2");
  double leaves = 1.0;
  for (int i = 0; i < n; ++i) {
    require(bucket_sizes[i] >= 1, "enumerate_chain_search: sizes must be positive");
    if (i + 1 < n) leaves *= (i + 1.0) * bucket_sizes[i];
  }
  require(leaves <= 5e7, "enumerate_chain_search: search space too large to enumerate");

  // States are one-hot vectors (chain 0..n-1, side state n); the projection
  // 2I - J gives every state its own code.
  const int dim = n + 1;
  const Mat projection = 2.0 * Mat::Identity(dim, dim) - Mat::Ones(dim, dim);
  const SimHasher hasher(projection);
  const int capacity = *std::max_element(bucket_sizes.begin(), bucket_sizes.end());
  ModelBuffer model(hasher, static_cast<std::size_t>(capacity));
  CountTable counts;
  Rng unused(0);

  const Vec side = one_hot(n, dim);
  for (int i = 0; i < n; ++i) {
    const Vec s = one_hot(i, dim);
    int stored = 0;
    if (i + 1 < n) {
      model.insert({s, label(i + 1), 0.0, one_hot(i + 1, dim)}, unused);
      ++stored;
    }
    for (; stored < bucket_sizes[i]; ++stored) model.insert({s, label(-1.0), 0.0, side}, unused);
    for (int c = 0; c < n - i; ++c) counts.record_visit(hasher.hash(s));
  }
  model.insert({side, label(-1.0), 0.0, side}, unused);
  for (int c = 0; c < n + 10; ++c) counts.record_visit(hasher.hash(side));

  ChainEnumeration result;
  result.bucket_sizes.assign(bucket_sizes.begin(), bucket_sizes.end());
  const Expander expand = buffer_expander(model);
  const Vec root = one_hot(0, dim);

  std::vector<std::size_t> prefix;
  while (true) {
    ScriptedSource source(prefix);
    const SearchTrace trace = tree_search(root, hasher, counts, n - 1, expand, source);
    const double p = source.probability();
    ++result.executions;
    result.total_probability += p;
    if (trace.selected == 0) {
      result.no_option_probability += p;
    } else {
      std::vector<double> key;
      for (const auto& a : trace.option().actions) key.push_back(a(0));
      result.option_probability[key] += p;
    }
    // Advance the odometer: bump the deepest decision that has room left.
    auto choices = source.choices();
    const auto& ranges = source.ranges();
    int pos = static_cast<int>(ranges.size()) - 1;
    while (pos >= 0 && choices[pos] + 1 >= ranges[pos]) --pos;
    if (pos < 0) break;
    choices.resize(pos + 1);
    ++choices[pos];
    prefix = std::move(choices);
  }

  std::vector<double> chain_key;
  for (int i = 1; i < n; ++i) chain_key.push_back(i);
  const auto it = result.option_probability.find(chain_key);
  result.chain_option_probability = it == result.option_probability.end() ? 0.0 : it->second;
  result.min_option_probability = 1.0;
  for (const auto& [key, p] : result.option_probability)
    result.min_option_probability = std::min(result.min_option_probability, p);
  return result;
}

Theorem1Report verify_theorem1_bound(int budget, std::span<const int> bucket_sizes,
                                     std::optional<double> state_action_count, bool enumerate) {
  require(budget >= 1, "verify_theorem1_bound: budget must be at least 1");
  require(static_cast<int>(bucket_sizes.size()) == budget,
          "verify_theorem1_bound: need exactly one bucket size per tree node");
  for (int s : bucket_sizes) require(s >= 1, "verify_theorem1_bound: bucket sizes must be positive");

  Theorem1Report r;
  r.budget = budget;
  r.bucket_sizes.assign(bucket_sizes.begin(), bucket_sizes.end());
  double log_chain = std::lgamma(static_cast<double>(budget));  // log (N-1)!
  for (int i = 0; i + 1 < budget; ++i) log_chain += std::log(static_cast<double>(bucket_sizes[i]));
  const double max_size = *std::max_element(bucket_sizes.begin(), bucket_sizes.end());
  const double log_bound = std::lgamma(budget + 1.0) + (budget - 1) * std::log(max_size);
  r.chain_probability = std::exp(-log_chain);
  r.worst_case_bound = std::exp(-log_bound);
  r.chain_holds = log_chain <= log_bound + 1e-12;

  if (state_action_count) {
    const double sa = *state_action_count;
    require(sa > std::exp(1.0), "verify_theorem1_bound: |S||A| must exceed e");
    r.state_action_count = sa;
    r.log_condition = budget <= std::log(sa) / std::log(std::log(sa));
    r.bound_above_inverse = log_bound <= std::log(sa);
    r.implication_holds = !r.log_condition || r.bound_above_inverse;
  }

  if (enumerate && budget >= 2 && budget <= 4 && max_size <= 16) {
    r.enumeration = enumerate_chain_search(bucket_sizes);
    r.enumeration_holds = r.enumeration->min_option_probability >= r.chain_probability * (1.0 - 1e-12);
  }
  return r;
}

namespace {

// Visits every nondecreasing sequence of `length` sizes in [lo, max_size].
void for_each_multiset(int length, int lo, int max_size, std::vector<int>& prefix,
                       const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(prefix.size()) == length) {
    visit(prefix);
    return;
  }
  for (int s = lo; s <= max_size; ++s) {
    prefix.push_back(s);
    for_each_multiset(length, s, max_size, prefix, visit);
    prefix.pop_back();
  }
}

// Number of distinct orderings of a sorted sequence (multinomial coefficient).
std::uint64_t orderings(const std::vector<int>& sorted) {
  std::uint64_t count = 1;
  std::uint64_t placed = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    for (std::size_t r = 1; r <= j - i; ++r) {
      ++placed;
      count = count * placed / r;
    }
    i = j;
  }
  return count;
}

}  // namespace

Theorem1GridResult check_theorem1_grid(int max_budget, int max_size) {
  require(max_budget >= 1 && max_budget <= 8, "check_theorem1_grid: budget must be in [1, 8]");
  require(max_size >= 1 && max_size <= 16, "check_theorem1_grid: size must be in [1, 16]");
  Theorem1GridResult g{max_budget, max_size, 0, 0};
  // The chain holds iff N * max^(N-1) >= prod of the first N-1 sizes, which
  // depends only on the multiset of the first N-1 sizes and the last size;
  // each multiset is checked once and weighted by its orderings. Exact in
  // 64-bit integers.
  for (int n = 1; n <= max_budget; ++n) {
    std::vector<int> prefix;
    for_each_multiset(n - 1, 1, max_size, prefix, [&](const std::vector<int>& head) {
      std::uint64_t prod = 1;
      std::uint64_t head_max = 1;
      for (int s : head) {
        prod *= static_cast<std::uint64_t>(s);
        head_max = std::max<std::uint64_t>(head_max, s);
      }
      const std::uint64_t weight = orderings(head);
      for (int last = 1; last <= max_size; ++last) {
        const std::uint64_t mx = std::max<std::uint64_t>(head_max, last);
        std::uint64_t lhs = n;
        for (int i = 0; i + 1 < n; ++i) lhs *= mx;
        g.cases += weight;
        if (lhs < prod) g.failures += weight;
      }
    });
  }
  return g;
}

void write_report(std::ostream& out, const Theorem1Report& r) {
  out << std::setprecision(10);
  out << "budget N: " << r.budget << "\nbucket sizes:";
  for (int s : r.bucket_sizes) out << ' ' << s;
  out << "\nchain probability 1/((N-1)! prod|phi|): " << r.chain_probability
      << "\nworst-case bound 1/(N! max^(N-1)): " << r.worst_case_bound
      << "\nchain >= bound: " << (r.chain_holds ? "yes" : "NO") << '\n';
  if (r.state_action_count) {
    out << "|S||A|: " << *r.state_action_count
        << "\nN <= log|S||A| / loglog|S||A|: " << (r.log_condition ? "yes" : "no")
        << "\nbound >= 1/|S||A|: " << (r.bound_above_inverse ? "yes" : "no")
        << "\nimplication holds: " << (r.implication_holds ? "yes" : "no (the bound is asymptotic in |S||A|)") << '\n';
  }
  if (r.enumeration) {
    const auto& e = *r.enumeration;
    out << "enumerated executions: " << e.executions << "\ntotal probability: " << e.total_probability
        << "\ndistinct options: " << e.option_probability.size()
        << "\nno-option probability: " << e.no_option_probability
        << "\nchain option probability: " << e.chain_option_probability
        << "\nmin option probability: " << e.min_option_probability
        << "\nmin >= chain probability: " << (r.enumeration_holds ? "yes" : "NO") << '\n';
  }
}

void write_report(std::ostream& out, const Theorem1GridResult& g) {
  out << "grid N <= " << g.max_budget << ", sizes <= " << g.max_size << ": " << g.cases
      << " cases, " << g.failures << " violations\n";
}

}  // namespace etgl
