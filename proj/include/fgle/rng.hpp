#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace fgle {

enum class StreamRole : std::uint32_t { Primary = 0, Oracle = 1, Pilot = 2, Reference = 3 };

// Identifies one independent random stream: (master seed, level, sample index, role).
struct NoiseSeed {
  std::uint64_t master_seed = 0;
  std::int64_t level = 0;
  std::int64_t sample_index = 0;
  StreamRole role = StreamRole::Primary;

  NoiseSeed with_level(std::int64_t l) const { return {master_seed, l, sample_index, role}; }
  NoiseSeed with_sample(std::int64_t i) const { return {master_seed, level, i, role}; }
  NoiseSeed with_role(StreamRole r) const { return {master_seed, level, sample_index, r}; }

  bool operator==(const NoiseSeed&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

// Philox4x32-10 counter-based generator exposed as a 64-bit
// UniformRandomBitGenerator. The key and the upper counter words are derived
// from the NoiseSeed labels; the lower counter words enumerate blocks.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  explicit PhiloxEngine(const NoiseSeed& seed);
  PhiloxEngine(std::uint64_t key, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Jumps to an absolute 128-bit output block.
  void seek_block(std::uint64_t block);

  using Block = std::array<std::uint32_t, 4>;
  static Block philox(Block counter, std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 2;  // 64-bit words consumed from buffer_
};

// Independent standard normals from the stream identified by `seed`.
class NormalStream {
 public:
  explicit NormalStream(const NoiseSeed& seed) : engine_(seed) {}

  double operator()() { return dist_(engine_); }
  void fill(Eigen::Ref<Eigen::VectorXd> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = dist_(engine_);
  }
  Eigen::VectorXd draw(Eigen::Index n) {
    Eigen::VectorXd out(n);
    fill(out);
    return out;
  }

 private:
  PhiloxEngine engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace fgle
