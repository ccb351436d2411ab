#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace lbs::crypto {

/// `bytes` bytes from the OpenSSL CSPRNG, rendered as lowercase hex.
std::string random_hex(std::size_t bytes);

/// Salted PBKDF2-HMAC-SHA256, encoded as "pbkdf2-sha256$<iterations>$<salt>$<hash>".
std::string hash_password(std::string_view password, int iterations);

/// Constant-time comparison against an encoded hash. Malformed encodings never verify.
bool verify_password(std::string_view password, std::string_view encoded);

}  // namespace lbs::crypto
