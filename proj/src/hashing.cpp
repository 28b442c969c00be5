#include "etgl/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace etgl {

HashCode::HashCode(std::uint64_t bits, int k) : bits_(bits), k_(k) {
  require(k >= 1 && k <= kMaxBits, "HashCode: k must be in [1, 64]");
  if (k < kMaxBits) bits_ &= (std::uint64_t{1} << k) - 1;
}

HashCode HashCode::from_signs(std::span<const int> signs) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    require(signs[i] == 1 || signs[i] == -1, "HashCode: entries must be -1 or +1");
    if (signs[i] == 1) bits |= std::uint64_t{1} << i;
  }
  return HashCode(bits, static_cast<int>(signs.size()));
}

std::vector<int> HashCode::signs() const {
  std::vector<int> s(k_);
  for (int i = 0; i < k_; ++i) s[i] = sign(i);
  return s;
}

std::string HashCode::to_string() const {
  std::string s(k_, '0');
  for (int i = 0; i < k_; ++i)
    if (sign(i) > 0) s[i] = '1';
  return s;
}

std::size_t HashCodeHash::operator()(const HashCode& c) const noexcept {
  return static_cast<std::size_t>(splitmix64(c.bits() ^ (static_cast<std::uint64_t>(c.size()) << 58)));
}

SimHasher::SimHasher(int bits, int state_dim, Rng& rng, HashPreprocess preprocess, Vec box_low,
                     Vec box_high, FourierFeatures fourier)
    : state_dim_(state_dim), preprocess_(preprocess), low_(std::move(box_low)), high_(std::move(box_high)) {
  require(bits >= 1 && bits <= HashCode::kMaxBits, "SimHasher: bits must be in [1, 64]");
  require(state_dim >= 1, "SimHasher: state dimension must be positive");
  int d = state_dim;
  if (preprocess != HashPreprocess::identity) {
    require(low_.size() == state_dim && high_.size() == state_dim,
            "SimHasher: box preprocessing needs box bounds of the state dimension");
    require(((high_ - low_).array() > 0).all(), "SimHasher: empty box");
    d = state_dim + 1;
  }
  if (preprocess == HashPreprocess::fourier) {
    require(fourier.count >= 1, "SimHasher: fourier feature count must be positive");
    require(fourier.lengthscale > 0.0, "SimHasher: fourier lengthscale must be positive");
    frequencies_.resize(fourier.count, state_dim);
    phases_.resize(fourier.count);
    for (int r = 0; r < fourier.count; ++r) {
      for (int c = 0; c < state_dim; ++c) frequencies_(r, c) = rng.normal() / fourier.lengthscale;
      phases_(r) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    d = fourier.count;
  }
  projection_.resize(bits, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < bits; ++r) projection_(r, c) = rng.normal();
}

SimHasher::SimHasher(Mat projection)
    : projection_(std::move(projection)), state_dim_(static_cast<int>(projection_.cols())) {
  require(projection_.rows() >= 1 && projection_.rows() <= HashCode::kMaxBits,
          "SimHasher: bits must be in [1, 64]");
}

Vec SimHasher::preprocess(const Vec& state) const {
  require(state.size() == state_dim_, "SimHasher: state dimension mismatch");
  if (preprocess_ == HashPreprocess::identity) return state;
  const Vec u = (2.0 * (state - low_).array() / (high_ - low_).array() - 1.0).matrix();
  if (preprocess_ == HashPreprocess::fourier) {
    const double scale = std::sqrt(2.0 / static_cast<double>(phases_.size()));
    return (scale * (frequencies_ * u + phases_).array().cos()).matrix();
  }
  Vec f(state_dim_ + 1);
  f.head(state_dim_) = u;
  f(state_dim_) = 1.0;
  return f;
}

HashCode SimHasher::hash(const Vec& state) const {
  const Vec z = projection_ * preprocess(state);
  std::uint64_t bits = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z(i) >= 0.0) bits |= std::uint64_t{1} << i;
  return HashCode(bits, static_cast<int>(z.size()));
}

void CountTable::record_visit(const HashCode& code) {
  ++counts_[code];
  ++total_;
}

std::uint64_t CountTable::count(const HashCode& code) const {
  const auto it = counts_.find(code);
  return it == counts_.end() ? 0 : it->second;
}

void CountTable::write_csv(std::ostream& out) const {
  std::vector<std::pair<HashCode, std::uint64_t>> rows(counts_.begin(), counts_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first.to_string() < b.first.to_string();
  });
  out << "code,count\n";
  for (const auto& [code, n] : rows) out << code.to_string() << ',' << n << '\n';
}

ModelBuffer::ModelBuffer(SimHasher hasher, std::size_t bucket_capacity)
    : hasher_(std::move(hasher)), capacity_(bucket_capacity) {
  require(bucket_capacity >= 1, "ModelBuffer: bucket capacity must be positive");
}

void ModelBuffer::insert(ModelTransition t, const HashCode& code_of_start, Rng& rng) {
  require(hasher_.hash(t.state) == code_of_start,
          "ModelBuffer::insert: code does not match the hash of the start state");
  auto& bucket = buckets_[code_of_start];
  if (bucket.size() < capacity_) {
    bucket.push_back(std::move(t));
    ++total_;
  } else {
    bucket[rng.index(bucket.size())] = std::move(t);
  }
}

void ModelBuffer::insert(ModelTransition t, Rng& rng) {
  const HashCode code = hasher_.hash(t.state);
  insert(std::move(t), code, rng);
}

std::optional<ModelTransition> ModelBuffer::sample(const HashCode& code, Rng& rng) const {
  const auto b = bucket(code);
  if (b.empty()) return std::nullopt;
  return b[rng.index(b.size())];
}

std::span<const ModelTransition> ModelBuffer::bucket(const HashCode& code) const {
  const auto it = buckets_.find(code);
  if (it == buckets_.end()) return {};
  return it->second;
}

}  // namespace etgl
