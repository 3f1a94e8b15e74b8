#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hermes {

using Addr = std::uint64_t;
using Tick = std::uint64_t;
using CoreId = std::uint32_t;

enum class MemOp : std::uint8_t { Read, Write };

// Reuse class carried by synthetic traces. Weight-class data is expected to
// be re-referenced many times, Streaming-class data is touch-once.
enum class ReuseClass : std::uint8_t { Weight, Activation, Gradient, Streaming };

struct TensorHint {
    std::uint32_t tensor_id = 0;
    ReuseClass reuse_class = ReuseClass::Activation;

    friend bool operator==(const TensorHint&, const TensorHint&) = default;
};

// One core-issued access; the atom flowing through the hierarchy.
struct MemoryRequest {
    Tick tick = 0;
    CoreId core = 0;
    MemOp op = MemOp::Read;
    Addr address = 0;
    std::uint32_t size_bytes = 1;
    std::optional<TensorHint> hint;

    friend bool operator==(const MemoryRequest&, const MemoryRequest&) = default;
};

inline constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline constexpr std::uint64_t log2_exact(std::uint64_t v) {
    std::uint64_t n = 0;
    while (v > 1) { v >>= 1; ++n; }
    return n;
}

inline constexpr Addr align_down(Addr a, std::uint64_t granule) { return a - (a % granule); }

inline char reuse_class_code(ReuseClass c) {
    switch (c) {
    case ReuseClass::Weight: return 'W';
    case ReuseClass::Activation: return 'A';
    case ReuseClass::Gradient: return 'G';
    case ReuseClass::Streaming: return 'S';
    }
    return '?';
}

inline std::optional<ReuseClass> reuse_class_from_code(char c) {
    switch (c) {
    case 'W': return ReuseClass::Weight;
    case 'A': return ReuseClass::Activation;
    case 'G': return ReuseClass::Gradient;
    case 'S': return ReuseClass::Streaming;
    default: return std::nullopt;
    }
}

}  // namespace hermes
