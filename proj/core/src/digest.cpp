#include "patchgate/digest.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace patchgate {

namespace {

std::string to_hex(const unsigned char* bytes, unsigned int len) {
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", bytes[i]);
  return out;
}

}  // namespace

struct Sha256Builder::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256Builder::Sha256Builder() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
}

Sha256Builder::~Sha256Builder() {
  if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

Sha256Builder& Sha256Builder::field(std::string_view data) {
  std::array<unsigned char, 8> len{};
  auto n = static_cast<std::uint64_t>(data.size());
  for (int i = 7; i >= 0; --i) {
    len[static_cast<std::size_t>(i)] = static_cast<unsigned char>(n & 0xffu);
    n >>= 8;
  }
  EVP_DigestUpdate(impl_->ctx, len.data(), len.size());
  EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
  return *this;
}

std::string Sha256Builder::hex() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, out.data(), &len);
  EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
  return to_hex(out.data(), len);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  return to_hex(out.data(), len);
}

}  // namespace patchgate
