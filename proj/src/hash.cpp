#include "swarmfield/hash.hpp"

#include "swarmfield/error.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

namespace swarmfield {

std::string sha256_hex(std::string_view bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 computation failed");
  std::string out(2 * len, '0');
  for (unsigned int k = 0; k < len; ++k)
    std::snprintf(&out[2 * k], 3, "%02x", md[k]);
  return out;
}

std::string positions_digest(std::span<const Vec2> positions)
{
  std::string raw;
  raw.reserve(positions.size() * 2 * sizeof(double));
  for (Vec2 p : positions) {
    raw.append(reinterpret_cast<const char*>(&p.x), sizeof(double));
    raw.append(reinterpret_cast<const char*>(&p.y), sizeof(double));
  }
  return sha256_hex(raw);
}

} // namespace swarmfield
