#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "testkg/errors.hpp"

namespace testkg::checksum {

namespace detail {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error(Errc::IoError, "failed to initialize SHA-256 context");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_, data, len) != 1)
      throw Error(Errc::IoError, "SHA-256 update failed");
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1)
      throw Error(Errc::IoError, "SHA-256 finalization failed");
    static constexpr char alphabet[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
      out += alphabet[digest[i] >> 4];
      out += alphabet[digest[i] & 0x0f];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace detail

/// SHA-256 of an in-memory buffer, lowercase hex.
inline std::string sha256_hex(std::string_view data) {
  detail::Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

/// SHA-256 of a file's bytes, lowercase hex.
inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open file: " + path.string());
  detail::Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    std::streamsize got = in.gcount();
    if (got > 0) h.update(buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) throw Error(Errc::IoError, "read error: " + path.string());
  return h.hex();
}

}  // namespace testkg::checksum
