#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace etgl {

// Exhaustive enumeration of every execution of the tree search on a chain
// model: chain states s_1..s_N with n(phi(s_i)) strictly decreasing, bucket
// phi(s_i) holding bucket_sizes[i-1] transitions of which exactly one leads
// to s_{i+1} (the rest lead to a heavily visited side state), and a search
// budget of N - 1 expansions (a tree of N nodes). The number of executions
// must stay below about 5e7.
struct ChainEnumeration {
  std::vector<int> bucket_sizes;
  std::size_t executions = 0;
  double total_probability = 0.0;
  double no_option_probability = 0.0;  // search ended at the root
  std::map<std::vector<double>, double> option_probability;  // keyed by action labels
  double chain_option_probability = 0.0;  // option root -> s_N
  double min_option_probability = 0.0;
};

ChainEnumeration enumerate_chain_search(std::span<const int> bucket_sizes);

struct Theorem1Report {
  int budget = 0;
  std::vector<int> bucket_sizes;
  // 1 / ((N-1)! * prod_{i<N} |phi(s_i)|): probability of the hardest option.
  double chain_probability = 0.0;
  // 1 / (N! * max_i |phi(s_i)|^(N-1)).
  double worst_case_bound = 0.0;
  bool chain_holds = false;

  std::optional<double> state_action_count;
  bool log_condition = false;         // N <= log(|S||A|) / log log(|S||A|)
  bool bound_above_inverse = false;   // bound >= 1 / (|S||A|)
  bool implication_holds = true;      // log_condition => bound_above_inverse

  std::optional<ChainEnumeration> enumeration;
  bool enumeration_holds = true;      // min enumerated option probability >= chain_probability
};

// Enumeration runs when enumerate is set and 2 <= N <= 4.
Theorem1Report verify_theorem1_bound(int budget, std::span<const int> bucket_sizes,
                                     std::optional<double> state_action_count = std::nullopt,
                                     bool enumerate = true);

// Exact integer check of chain_probability >= worst_case_bound over every
// N <= max_budget and every assignment of sizes in [1, max_size].
struct Theorem1GridResult {
  int max_budget = 0;
  int max_size = 0;
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
};
Theorem1GridResult check_theorem1_grid(int max_budget, int max_size);

void write_report(std::ostream& out, const Theorem1Report& report);
void write_report(std::ostream& out, const Theorem1GridResult& grid);

}  // namespace etgl
