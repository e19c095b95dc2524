#pragma once

#include <array>
#include <cstdint>

#include "tabhash/hashers.hpp"

namespace tabhash {

// Transcriptions of the classic 32-bit C routines for simple and twisted
// tabulation (four 8-bit characters). They are the golden oracle for
// SimpleTab / TwistedTab at geometry (8, 4, 32).
using Simple32Tables = std::array<std::array<std::uint32_t, 256>, 4>;
using Twisted32Tables = std::array<std::array<std::uint64_t, 256>, 4>;

std::uint32_t simple_tab32(std::uint32_t x, const Simple32Tables& H);
std::uint32_t twisted_tab32(std::uint32_t x, const Twisted32Tables& H);

// Layout conversions. The twisted routine twists the last character it
// reads (the most significant byte), so the TwistedTab must use
// HeadPosition::high; its 64-bit entries carry the twister in bits 0..7 and
// the hash in bits 32..63. Wrong geometry throws ConfigError.
Simple32Tables to_simple32(const SimpleTab& h);
Twisted32Tables to_twisted32(const TwistedTab& h);

enum class RefKind { simple, twisted };

std::uint32_t reference_hash32(RefKind kind, std::uint32_t x, const AnyHasher& h);

}  // namespace tabhash
