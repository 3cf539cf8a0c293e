#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace hetnet {

/**
 * Philox4x32-10 counter-based generator (Salmon et al.). Pure function of
 * (key, counter), so streams keyed by (seed, replication, purpose) are
 * independent and reproducible regardless of draw interleaving.
 */
struct Philox4x32 {
  static std::array<uint32_t, 4> block(const std::array<uint32_t, 2>& key,
                                       std::array<uint32_t, 4> ctr) {
    constexpr uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
    constexpr uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
    uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = uint64_t(kMul0) * ctr[0];
      const uint64_t p1 = uint64_t(kMul1) * ctr[2];
      ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ k0, uint32_t(p1), uint32_t(p0 >> 32) ^ ctr[3] ^ k1,
             uint32_t(p0)};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return ctr;
  }
};

/**
 * One logical random stream: 32-bit words drawn from Philox blocks whose
 * counter encodes (draw index, replication, purpose) under the base-seed key.
 */
class RngStream {
 public:
  RngStream(uint64_t base_seed, uint32_t replication, uint32_t purpose)
      : key_{uint32_t(base_seed), uint32_t(base_seed >> 32)},
        replication_(replication),
        purpose_(purpose) {}

  uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = Philox4x32::block(key_, {uint32_t(counter_), uint32_t(counter_ >> 32), replication_,
                                      purpose_});
      ++counter_;
      pos_ = 0;
    }
    return buf_[size_t(pos_++)];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  /** Uniform in [0, 1) with 53 random bits. */
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /** Exponential holding time with the given rate (inversion method). */
  double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::array<uint32_t, 2> key_;
  uint32_t replication_;
  uint32_t purpose_;
  uint64_t counter_ = 0;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace hetnet
