#include "mhc/fingerprint.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/test_support.hpp"

namespace mhc {
namespace {

TEST(Fingerprint, Sha256KnownDigests) {
  auto empty = fingerprint_document(BytesView{}, HashAlgorithm::Sha256);
  EXPECT_EQ(empty.text(),
            "sha-256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  auto abc = fingerprint_document(as_bytes("abc"), "sha-256");
  EXPECT_EQ(abc.text(),
            "sha-256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Fingerprint, Keccak256KnownDigest) {
  auto abc = fingerprint_document(as_bytes("abc"), "keccak-256");
  EXPECT_EQ(abc.text(),
            "keccak-256:4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST(Fingerprint, Deterministic) {
  auto doc = as_bytes("a legal contract, in full");
  EXPECT_EQ(fingerprint_document(doc, HashAlgorithm::Sha256),
            fingerprint_document(doc, HashAlgorithm::Sha256));
  EXPECT_EQ(fingerprint_document(doc, HashAlgorithm::Keccak256),
            fingerprint_document(doc, HashAlgorithm::Keccak256));
}

TEST(Fingerprint, RejectsUnsupportedAlgorithm) {
  try {
    fingerprint_document(as_bytes("doc"), "md5");
    FAIL() << "expected UnsupportedAlgorithm";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedAlgorithm);
  }
}

TEST(VerifyFingerprint, RoundTrip) {
  auto doc = as_bytes("the original document");
  auto fp = fingerprint_document(doc, HashAlgorithm::Sha256);
  EXPECT_TRUE(verify_fingerprint(doc, fp));
}

TEST(VerifyFingerprint, AppendedByteFails) {
  std::string content = "the original document";
  auto fp = fingerprint_document(as_bytes(content), HashAlgorithm::Sha256);
  content.push_back('\n');
  EXPECT_FALSE(verify_fingerprint(as_bytes(content), fp));
}

TEST(VerifyFingerprint, WrongAlgorithmFails) {
  auto doc = as_bytes("the original document");
  auto fp = fingerprint_document(doc, HashAlgorithm::Sha256);
  Fingerprint wrong = fp;
  wrong.algorithm = HashAlgorithm::Keccak256;  // same digest, wrong method
  EXPECT_FALSE(verify_fingerprint(doc, wrong));
}

TEST(Fingerprint, TextFormRoundTrips) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    auto algorithm = (i % 2 == 0) ? HashAlgorithm::Sha256 : HashAlgorithm::Keccak256;
    auto fp = fingerprint_document(test::random_bytes(rng, 0, 64), algorithm);
    EXPECT_EQ(Fingerprint::parse(fp.text()), fp);
  }
}

TEST(Fingerprint, ParseRejectsMalformedText) {
  EXPECT_THROW(Fingerprint::parse("no-separator"), Error);
  EXPECT_THROW(Fingerprint::parse("md5:" + std::string(64, 'a')), Error);
  EXPECT_THROW(Fingerprint::parse("sha-256:" + std::string(63, 'a')), Error);
  EXPECT_THROW(Fingerprint::parse("sha-256:" + std::string(64, 'A')), Error);
  EXPECT_THROW(Fingerprint::parse("sha-256:" + std::string(64, 'z')), Error);
}

// Every single-byte mutation over a corpus of documents must change the
// digest. 10,000+ mutations across both supported methods.
TEST(Fingerprint, ModificationSensitivity) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> byte_dist(1, 255);
  int mutations = 0;
  while (mutations < 10000) {
    Bytes doc = test::random_bytes(rng, 1, 400);
    auto algorithm = (mutations % 2 == 0) ? HashAlgorithm::Sha256 : HashAlgorithm::Keccak256;
    auto fp = fingerprint_document(doc, algorithm);
    for (int k = 0; k < 20 && mutations < 10000; ++k, ++mutations) {
      Bytes mutated = doc;
      size_t pos = rng() % mutated.size();
      mutated[pos] ^= static_cast<uint8_t>(byte_dist(rng));
      ASSERT_FALSE(verify_fingerprint(mutated, fp))
          << "undetected mutation at offset " << pos;
    }
  }
}

}  // namespace
}  // namespace mhc
