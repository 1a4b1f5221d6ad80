#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpc3 {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

struct MpcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Value outside the representable range of the number format.
struct RangeError : MpcError {
    using MpcError::MpcError;
};

// API misuse: mismatched rings, exhausted streams, bad dimensions.
struct UsageError : MpcError {
    using MpcError::MpcError;
};

struct TransportError : MpcError {
    using MpcError::MpcError;
};

// A party detected a condition that makes continuing meaningless
// (e.g. an ill-conditioned Gram matrix in the inverse square root).
struct ProtocolAbort : MpcError {
    using MpcError::MpcError;
};

struct ConfigError : MpcError {
    using MpcError::MpcError;
};

} // namespace mpc3
