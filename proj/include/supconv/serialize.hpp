#pragma once

#include <string>

#include "supconv/network.hpp"

namespace supconv {

// Canonical JSON encoding; weight/bias payloads are concatenated big-endian
// binary64 hex so round-trips are bit-exact.
std::string serialize_network(const Network& net);
Network deserialize_network(const std::string& text);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace supconv
