#include "mhc/hash.hpp"

#include <sodium.h>

#include <cstring>

namespace mhc {

Hash32 sha256(BytesView data) {
  Hash32 out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

namespace {

constexpr uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808AULL,
    0x8000000080008000ULL, 0x000000000000808BULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008AULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000AULL,
    0x000000008000808BULL, 0x800000000000008BULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800AULL, 0x800000008000000AULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// rotation offsets r[x][y]
constexpr unsigned kRotation[5][5] = {
    {0, 36, 3, 41, 18},
    {1, 44, 10, 45, 2},
    {62, 6, 43, 15, 61},
    {28, 55, 25, 21, 56},
    {27, 20, 39, 8, 14},
};

inline uint64_t rotl64(uint64_t v, unsigned n) {
  n %= 64;
  return n == 0 ? v : (v << n) | (v >> (64 - n));
}

void keccak_f1600(uint64_t a[5][5]) {
  for (int round = 0; round < 24; ++round) {
    // theta
    uint64_t c[5];
    for (int x = 0; x < 5; ++x) {
      c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
    }
    uint64_t d[5];
    for (int x = 0; x < 5; ++x) {
      d[x] = c[(x + 4) % 5] ^ rotl64(c[(x + 1) % 5], 1);
    }
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        a[x][y] ^= d[x];
      }
    }
    // rho + pi
    uint64_t b[5][5];
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        b[y][(2 * x + 3 * y) % 5] = rotl64(a[x][y], kRotation[x][y]);
      }
    }
    // chi
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        a[x][y] = b[x][y] ^ (~b[(x + 1) % 5][y] & b[(x + 2) % 5][y]);
      }
    }
    // iota
    a[0][0] ^= kRoundConstants[round];
  }
}

constexpr size_t kRate = 136;  // 1088-bit rate for a 256-bit capacity sponge

inline uint64_t load_le64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline void store_le64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

}  // namespace

Hash32 keccak256(BytesView data) {
  uint64_t state[5][5] = {};

  uint8_t block[kRate];
  size_t offset = 0;
  auto absorb_block = [&](const uint8_t* blk) {
    for (size_t i = 0; i < kRate / 8; ++i) {
      state[i % 5][i / 5] ^= load_le64(blk + i * 8);  // lanes are little-endian
    }
    keccak_f1600(state);
  };

  while (data.size() - offset >= kRate) {
    absorb_block(data.data() + offset);
    offset += kRate;
  }

  // final partial block with pad10*1 and 0x01 domain byte (original Keccak)
  size_t tail = data.size() - offset;
  std::memset(block, 0, kRate);
  if (tail > 0) std::memcpy(block, data.data() + offset, tail);
  block[tail] = 0x01;
  block[kRate - 1] ^= 0x80;
  absorb_block(block);

  Hash32 out;
  for (size_t i = 0; i < 4; ++i) {
    store_le64(out.data() + i * 8, state[i % 5][i / 5]);
  }
  return out;
}

}  // namespace mhc
