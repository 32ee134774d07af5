#include "fgle/rng.hpp"

namespace fgle {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

PhiloxEngine::Block PhiloxEngine::philox(Block ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

PhiloxEngine::PhiloxEngine(std::uint64_t key, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      stream_(stream) {}

PhiloxEngine::PhiloxEngine(const NoiseSeed& seed) {
  std::uint64_t h = splitmix64(seed.master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(seed.level));
  h = splitmix64(h ^ static_cast<std::uint64_t>(seed.sample_index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(seed.role));
  key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  stream_ = splitmix64(h ^ 0x5851F42D4C957F2Dull);
}

void PhiloxEngine::seek_block(std::uint64_t block) {
  block_ = block;
  used_ = 2;
}

void PhiloxEngine::refill() {
  const Block ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  buffer_ = philox(ctr, key_);
  ++block_;
  used_ = 0;
}

PhiloxEngine::result_type PhiloxEngine::operator()() {
  if (used_ == 2) refill();
  const int i = 2 * used_++;
  return (std::uint64_t(buffer_[i + 1]) << 32) | buffer_[i];
}

}  // namespace fgle
