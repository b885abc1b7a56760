#include "mhc/codec.hpp"

namespace mhc {

void Encoder::u32(uint32_t v) {
  out_.push_back(static_cast<uint8_t>(v >> 24));
  out_.push_back(static_cast<uint8_t>(v >> 16));
  out_.push_back(static_cast<uint8_t>(v >> 8));
  out_.push_back(static_cast<uint8_t>(v));
}

void Encoder::u64(uint64_t v) {
  u32(static_cast<uint32_t>(v >> 32));
  u32(static_cast<uint32_t>(v));
}

void Encoder::bytes(BytesView data) {
  u32(static_cast<uint32_t>(data.size()));
  raw(data);
}

void Decoder::need(size_t n) const {
  if (in_.size() - pos_ < n) {
    throw Error(ErrorCode::MalformedRecord, "unexpected end of record");
  }
}

uint8_t Decoder::u8() {
  need(1);
  return in_[pos_++];
}

uint32_t Decoder::u32() {
  need(4);
  uint32_t v = (static_cast<uint32_t>(in_[pos_]) << 24) |
               (static_cast<uint32_t>(in_[pos_ + 1]) << 16) |
               (static_cast<uint32_t>(in_[pos_ + 2]) << 8) |
               static_cast<uint32_t>(in_[pos_ + 3]);
  pos_ += 4;
  return v;
}

uint64_t Decoder::u64() {
  uint64_t hi = u32();
  return (hi << 32) | u32();
}

void Decoder::raw(std::span<uint8_t> out) {
  need(out.size());
  std::copy(in_.begin() + pos_, in_.begin() + pos_ + out.size(), out.begin());
  pos_ += out.size();
}

Bytes Decoder::bytes() {
  uint32_t len = u32();
  need(len);
  Bytes out(in_.begin() + pos_, in_.begin() + pos_ + len);
  pos_ += len;
  return out;
}

void Decoder::expect_done() const {
  if (!done()) {
    throw Error(ErrorCode::MalformedRecord, "trailing bytes in record");
  }
}

}  // namespace mhc
