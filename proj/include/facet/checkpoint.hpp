#ifndef FACET_CHECKPOINT_HPP
#define FACET_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "facet/network.hpp"

namespace facet {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    NetworkState net;
    std::uint64_t seed = 0;
};

// JSON object {format_version, spec, seed, parameters: named flat arrays}.
// Doubles round-trip bit-exactly through save/load.
void save_checkpoint(const NetworkState& net, std::uint64_t seed, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string checkpoint_to_json(const NetworkState& net, std::uint64_t seed);
Checkpoint checkpoint_from_json(const std::string& text);

} // namespace facet

#endif
