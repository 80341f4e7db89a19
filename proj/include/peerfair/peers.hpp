#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "peerfair/ic.hpp"

namespace peerfair {

enum class PeerStatus { Auditable, Unknown };

struct PeerEntry {
    std::string id;                         // protected instance id
    std::size_t index = 0;                  // position in the dataset
    std::vector<std::uint32_t> peer_indices;  // unprotected positions, ascending
    PeerStatus status = PeerStatus::Unknown;
};

struct PeerSet {
    double delta = 0.0;
    int min_peers = 0;
    std::vector<PeerEntry> entries;  // one per protected instance, dataset order
};

// delta = multiplier * sigma_minus (default multiplier 0.3).
double resolve_delta(const ICTable& table, double multiplier);

// All unprotected j with |xi_a - xi_j| < delta, strict, via a sorted window;
// exactly equivalent to the quadratic scan.
PeerSet identify_peers(const ICTable& table, double delta, int min_peers);

std::string peers_to_csv(const PeerSet& peers);
void write_peers_csv(const PeerSet& peers, const std::filesystem::path& path);
std::string peer_edges_to_csv(const PeerSet& peers, const ICTable& table);

}  // namespace peerfair
