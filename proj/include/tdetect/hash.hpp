#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tdetect {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Lowercase hex SHA-256 (OpenSSL EVP).
std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 for keys assembled from several fields.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  /// Length-prefixed, so ("ab","c") and ("a","bc") differ.
  Sha256& field(std::string_view bytes);
  Sha256& field(double value);
  std::string hex_digest();

 private:
  void* ctx_;
};

}  // namespace tdetect
