#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "etgl/common.hpp"
#include "etgl/rng.hpp"

namespace etgl {

// k-entry sign vector in {-1,+1}^k, packed into a bitmask (bit set = +1).
class HashCode {
 public:
  static constexpr int kMaxBits = 64;

  HashCode() = default;
  HashCode(std::uint64_t bits, int k);
  static HashCode from_signs(std::span<const int> signs);

  int size() const { return k_; }
  int sign(int i) const { return (bits_ >> i) & 1U ? 1 : -1; }
  std::vector<int> signs() const;
  std::uint64_t bits() const { return bits_; }
  std::string to_string() const;  // '1' for +1, '0' for -1, entry 0 first

  friend bool operator==(const HashCode&, const HashCode&) = default;
  friend auto operator<=>(const HashCode&, const HashCode&) = default;

 private:
  std::uint64_t bits_ = 0;
  int k_ = 0;
};

struct HashCodeHash {
  std::size_t operator()(const HashCode& c) const noexcept;
};

// How a raw state is mapped to R^D before projection.
enum class HashPreprocess {
  identity,    // f(s) = s
  affine_box,  // f(s) = (2 (s - lo) / (hi - lo) - 1, 1)
  fourier,     // f(s) = sqrt(2/F) cos(W u + b), u the affine_box image of s
};

struct FourierFeatures {
  int count = 64;
  double lengthscale = 0.25;  // in the [-1,1] box coordinates
};

// SimHash: phi(s) = sgn(A f(s)), A with i.i.d. N(0,1) entries, sgn(0) = +1.
class SimHasher {
 public:
  SimHasher() = default;
  SimHasher(int bits, int state_dim, Rng& rng, HashPreprocess preprocess = HashPreprocess::identity,
            Vec box_low = {}, Vec box_high = {}, FourierFeatures fourier = {});
  // Fixed projection with identity preprocessing (tests, hand-built models).
  explicit SimHasher(Mat projection);

  HashCode hash(const Vec& state) const;
  Vec preprocess(const Vec& state) const;

  int bits() const { return static_cast<int>(projection_.rows()); }
  int state_dim() const { return state_dim_; }
  const Mat& projection() const { return projection_; }

 private:
  Mat projection_;
  int state_dim_ = 0;
  HashPreprocess preprocess_ = HashPreprocess::identity;
  Vec low_;
  Vec high_;
  Mat frequencies_;
  Vec phases_;
};

// n(phi(s)): visit counts per hash code; absent codes read as zero.
class CountTable {
 public:
  void record_visit(const HashCode& code);
  std::uint64_t count(const HashCode& code) const;
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }

  // "code,count" rows sorted by code.
  void write_csv(std::ostream& out) const;

 private:
  std::unordered_map<HashCode, std::uint64_t, HashCodeHash> counts_;
  std::uint64_t total_ = 0;
};

struct ModelTransition {
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec next_state;
};

// B_M: real transitions bucketed by the hash of their start state, used as
// an approximate transition model by the tree search.
class ModelBuffer {
 public:
  ModelBuffer(SimHasher hasher, std::size_t bucket_capacity);

  // Appends, or overwrites a uniformly chosen entry when the bucket is full.
  // code_of_start must equal hasher().hash(t.state).
  void insert(ModelTransition t, const HashCode& code_of_start, Rng& rng);
  void insert(ModelTransition t, Rng& rng);

  std::optional<ModelTransition> sample(const HashCode& code, Rng& rng) const;
  std::span<const ModelTransition> bucket(const HashCode& code) const;

  const SimHasher& hasher() const { return hasher_; }
  std::size_t bucket_capacity() const { return capacity_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  std::size_t total_size() const { return total_; }

 private:
  SimHasher hasher_;
  std::size_t capacity_;
  std::unordered_map<HashCode, std::vector<ModelTransition>, HashCodeHash> buckets_;
  std::size_t total_ = 0;
};

}  // namespace etgl
