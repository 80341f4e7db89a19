#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "peerfair/common.hpp"
#include "peerfair/peers.hpp"

using namespace peerfair;

namespace {

// Brute-force oracle: the quadratic pair scan.
PeerSet brute_force_peers(const ICTable& table, double delta, int min_peers) {
    PeerSet peers;
    peers.delta = delta;
    peers.min_peers = min_peers;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!table.rows[i].is_protected) continue;
        PeerEntry entry;
        entry.id = table.rows[i].id;
        entry.index = i;
        for (std::size_t j = 0; j < table.rows.size(); ++j) {
            if (table.rows[j].is_protected) continue;
            if (std::abs(table.rows[i].xi - table.rows[j].xi) < delta) {
                entry.peer_indices.push_back(static_cast<std::uint32_t>(j));
            }
        }
        entry.status = entry.peer_indices.size() >= static_cast<std::size_t>(min_peers)
                           ? PeerStatus::Auditable
                           : PeerStatus::Unknown;
        peers.entries.push_back(std::move(entry));
    }
    return peers;
}

ICTable random_table(std::size_t n, std::uint64_t seed, double protected_share = 0.4) {
    Rng rng(seed);
    ICTable table;
    table.marginal = protected_share;
    std::vector<double> protected_xi;
    for (std::size_t i = 0; i < n; ++i) {
        ICRow row;
        row.id = "i" + std::to_string(i);
        row.is_protected = rng.bernoulli(protected_share);
        row.propensity = rng.uniform01();
        row.xi = row.is_protected ? row.propensity / protected_share
                                  : (1.0 - row.propensity) / (1.0 - protected_share);
        if (row.is_protected) protected_xi.push_back(row.xi);
        table.rows.push_back(std::move(row));
    }
    if (protected_xi.empty()) {
        table.rows[0].is_protected = true;
        protected_xi.push_back(table.rows[0].xi);
    }
    table.sigma_minus = population_sd(protected_xi);
    return table;
}

bool same_peers(const PeerSet& a, const PeerSet& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t e = 0; e < a.entries.size(); ++e) {
        if (a.entries[e].index != b.entries[e].index) return false;
        if (a.entries[e].status != b.entries[e].status) return false;
        if (a.entries[e].peer_indices != b.entries[e].peer_indices) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE_BEGIN("peers");

TEST_CASE("delta is multiplier times sigma") {
    ICTable table;
    table.sigma_minus = 0.2;
    CHECK(resolve_delta(table, 0.3) == doctest::Approx(0.06).epsilon(1e-15));
    CHECK_THROWS_AS(resolve_delta(table, 0.0), UsageError);
    table.sigma_minus = 0.0;
    CHECK_THROWS_AS(resolve_delta(table, 0.3), Error);
}

TEST_CASE("threshold rule on a tiny table") {
    ICTable table;
    table.marginal = 0.5;
    table.rows.push_back({"a", true, 0.5, 1.0});
    table.rows.push_back({"u1", false, 0.0, 1.1});
    table.rows.push_back({"u2", false, 0.0, 1.25});
    table.sigma_minus = 0.1;
    PeerSet peers = identify_peers(table, 0.2, 1);
    REQUIRE(peers.entries.size() == 1);
    CHECK(peers.entries[0].peer_indices == std::vector<std::uint32_t>{1});
    CHECK(peers.entries[0].status == PeerStatus::Auditable);
}

TEST_CASE("ties at exactly delta are excluded") {
    ICTable table;
    table.rows.push_back({"a", true, 0.5, 1.0});
    table.rows.push_back({"u1", false, 0.0, 1.25});
    PeerSet peers = identify_peers(table, 0.25, 1);
    CHECK(peers.entries[0].peer_indices.empty());
    CHECK(peers.entries[0].status == PeerStatus::Unknown);
}

TEST_CASE("huge delta makes everyone a peer") {
    ICTable table = random_table(200, 5);
    std::size_t unprotected = 0;
    for (const auto& row : table.rows) unprotected += row.is_protected ? 0 : 1;
    PeerSet peers = identify_peers(table, 1e9, 1);
    for (const auto& entry : peers.entries) {
        CHECK(entry.peer_indices.size() == unprotected);
    }
}

TEST_CASE("window search equals the quadratic scan on random tables") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng meta(derive_seed(seed, 0xABCDull));
        const std::size_t n = 50 + meta.uniform_int(450);
        ICTable table = random_table(n, seed + 1000);
        const double delta = 0.01 + 0.5 * meta.uniform01();
        PeerSet fast = identify_peers(table, delta, 35);
        PeerSet slow = brute_force_peers(table, delta, 35);
        CHECK(same_peers(fast, slow));
    }
}

TEST_CASE("equal xi means equal peer sets") {
    ICTable table = random_table(300, 77);
    // Force two protected rows to share xi exactly.
    std::vector<std::size_t> protected_idx;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].is_protected) protected_idx.push_back(i);
    }
    REQUIRE(protected_idx.size() >= 2);
    table.rows[protected_idx[1]].xi = table.rows[protected_idx[0]].xi;
    PeerSet peers = identify_peers(table, 0.15, 5);
    const PeerEntry* a = nullptr;
    const PeerEntry* b = nullptr;
    for (const auto& entry : peers.entries) {
        if (entry.index == protected_idx[0]) a = &entry;
        if (entry.index == protected_idx[1]) b = &entry;
    }
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    CHECK(a->peer_indices == b->peer_indices);
}

TEST_CASE("peer sets grow monotonically with delta") {
    ICTable table = random_table(400, 99);
    PeerSet narrow = identify_peers(table, 0.05, 1);
    PeerSet wide = identify_peers(table, 0.25, 1);
    REQUIRE(narrow.entries.size() == wide.entries.size());
    for (std::size_t e = 0; e < narrow.entries.size(); ++e) {
        const auto& small = narrow.entries[e].peer_indices;
        const auto& large = wide.entries[e].peer_indices;
        CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    }
}

TEST_CASE("status tracks the min-peer floor exactly") {
    ICTable table = random_table(500, 123);
    PeerSet peers = identify_peers(table, 0.1, 35);
    for (const auto& entry : peers.entries) {
        CHECK((entry.status == PeerStatus::Unknown) == (entry.peer_indices.size() < 35));
    }
}

TEST_CASE("subset mean of xi stays within delta of the anchor") {
    // Any K-subset of peers keeps its average xi within delta.
    ICTable table = random_table(600, 321);
    const double delta = 0.12;
    PeerSet peers = identify_peers(table, delta, 10);
    Rng rng(7);
    for (const auto& entry : peers.entries) {
        if (entry.status != PeerStatus::Auditable) continue;
        for (int rep = 0; rep < 20; ++rep) {
            double sum = 0.0;
            const int k = 10;
            for (int j = 0; j < k; ++j) {
                const auto pick = entry.peer_indices[rng.uniform_int(entry.peer_indices.size())];
                sum += table.rows[pick].xi;
            }
            CHECK(std::abs(table.rows[entry.index].xi - sum / k) <= delta);
        }
    }
}

TEST_CASE("peer CSV layout") {
    ICTable table = random_table(100, 17);
    PeerSet peers = identify_peers(table, 0.2, 35);
    const std::string csv = peers_to_csv(peers);
    CHECK(csv.rfind("protected_id,peer_count,status\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(peers.entries.size()) + 1);
}

TEST_SUITE_END();
