#pragma once

#include <cstdint>
#include <initializer_list>

namespace fedcmab {

/// One step of the SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Fixed seed-splitting rule: folds every component into the running state
/// with SplitMix64. The result depends only on the values and their order,
/// never on scheduling, so parallel runs reproduce serial ones.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

}  // namespace fedcmab
