#include "peerfair/peers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "peerfair/common.hpp"

namespace peerfair {

double resolve_delta(const ICTable& table, double multiplier) {
    if (!(multiplier > 0.0)) throw UsageError("resolve_delta: multiplier must be positive");
    if (!(table.sigma_minus > 0.0)) {
        throw Error(
            "resolve_delta: protected-group identification coefficients are constant "
            "(sigma = 0); supply an absolute delta override");
    }
    return multiplier * table.sigma_minus;
}

PeerSet identify_peers(const ICTable& table, double delta, int min_peers) {
    if (!(delta > 0.0)) throw UsageError("identify_peers: delta must be positive");
    if (min_peers < 1) throw UsageError("identify_peers: min_peers must be >= 1");

    // Unprotected xi values sorted once; each protected instance takes the
    // open window (xi - delta, xi + delta) by binary search. Output is
    // identical to the quadratic scan over all pairs.
    std::vector<std::pair<double, std::uint32_t>> unprotected;  // (xi, dataset index)
    unprotected.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!table.rows[i].is_protected) {
            unprotected.emplace_back(table.rows[i].xi, static_cast<std::uint32_t>(i));
        }
    }
    std::sort(unprotected.begin(), unprotected.end());

    PeerSet peers;
    peers.delta = delta;
    peers.min_peers = min_peers;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (!row.is_protected) continue;
        PeerEntry entry;
        entry.id = row.id;
        entry.index = i;
        // Strict inequality: values at exactly xi +- delta are excluded. The
        // binary search brackets the window; the boundary walk plus the exact
        // |xi_a - xi_j| < delta filter make the result identical to the pair
        // scan even when rounding of xi +- delta disagrees with the direct
        // difference at the window edges.
        auto lo = std::upper_bound(
            unprotected.begin(), unprotected.end(),
            std::make_pair(row.xi - delta, std::numeric_limits<std::uint32_t>::max()));
        auto hi = std::lower_bound(unprotected.begin(), unprotected.end(),
                                   std::make_pair(row.xi + delta, std::uint32_t{0}));
        while (lo != unprotected.begin() && std::abs(row.xi - std::prev(lo)->first) < delta) {
            --lo;
        }
        while (hi != unprotected.end() && std::abs(row.xi - hi->first) < delta) {
            ++hi;
        }
        entry.peer_indices.reserve(static_cast<std::size_t>(hi - lo));
        for (auto it = lo; it != hi; ++it) {
            if (std::abs(row.xi - it->first) < delta) entry.peer_indices.push_back(it->second);
        }
        std::sort(entry.peer_indices.begin(), entry.peer_indices.end());
        entry.status = entry.peer_indices.size() >= static_cast<std::size_t>(min_peers)
                           ? PeerStatus::Auditable
                           : PeerStatus::Unknown;
        peers.entries.push_back(std::move(entry));
    }
    return peers;
}

std::string peers_to_csv(const PeerSet& peers) {
    std::ostringstream out;
    out << "protected_id,peer_count,status\n";
    for (const auto& e : peers.entries) {
        out << e.id << ',' << e.peer_indices.size() << ','
            << (e.status == PeerStatus::Auditable ? "auditable" : "unknown") << '\n';
    }
    return out.str();
}

void write_peers_csv(const PeerSet& peers, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << peers_to_csv(peers);
}

std::string peer_edges_to_csv(const PeerSet& peers, const ICTable& table) {
    std::ostringstream out;
    out << "protected_id,peer_id\n";
    for (const auto& e : peers.entries) {
        for (std::uint32_t j : e.peer_indices) {
            out << e.id << ',' << table.rows[j].id << '\n';
        }
    }
    return out.str();
}

}  // namespace peerfair
