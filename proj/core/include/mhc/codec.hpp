#pragma once

#include "mhc/bytes.hpp"
#include "mhc/errors.hpp"

namespace mhc {

/// Canonical binary encoding used for everything that is hashed or persisted:
/// integers are big-endian fixed-width, variable byte strings carry a
/// big-endian 32-bit length prefix, fixed-width fields are written raw in
/// declared order. Encodings must stay bit-exact; the hash chain depends on it.
class Encoder {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u32(uint32_t v);
  void u64(uint64_t v);

  /// Fixed-width field, no length prefix.
  void raw(BytesView data) { out_.insert(out_.end(), data.begin(), data.end()); }

  /// Length-prefixed byte string.
  void bytes(BytesView data);

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

/// Strict decoder over the canonical encoding. Any out-of-bounds read or
/// leftover tail throws Error(MalformedRecord).
class Decoder {
 public:
  explicit Decoder(BytesView in) : in_(in) {}

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();

  /// Reads exactly out.size() raw bytes.
  void raw(std::span<uint8_t> out);

  /// Reads a length-prefixed byte string.
  Bytes bytes();

  size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  void need(size_t n) const;

  BytesView in_;
  size_t pos_ = 0;
};

}  // namespace mhc
