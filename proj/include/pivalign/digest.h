#ifndef PIVALIGN_DIGEST_H_
#define PIVALIGN_DIGEST_H_

#include <string>
#include <string_view>

namespace pivalign {

// First 128 bits of SHA-256, as 32 lowercase hex characters.
std::string Digest128Hex(std::string_view data);

}  // namespace pivalign

#endif  // PIVALIGN_DIGEST_H_
