#include "peerfair/explain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "peerfair/common.hpp"

namespace peerfair {

namespace {

// Maps a level-coded value onto the better-is-higher scale.
double better_scale(double value, Direction better) {
    return better == Direction::Lower ? -value : value;
}

}  // namespace

std::optional<ExplanationRecord> explain_instance(
    const Instance& instance, const std::vector<const Instance*>& accepted_peers,
    const FeatureSchema& schema, double alpha, int min_accepted) {
    if (accepted_peers.size() < static_cast<std::size_t>(min_accepted)) {
        return std::nullopt;
    }
    ExplanationRecord record;
    record.id = instance.id;
    for (std::size_t f = 0; f < schema.n_features(); ++f) {
        const auto& spec = schema.feature(f);
        if (spec.intrinsic || spec.better == Direction::None) continue;
        const double own = better_scale(instance.x[f], spec.better);
        std::size_t worse = 0;
        std::size_t ties = 0;
        for (const Instance* peer : accepted_peers) {
            const double pv = better_scale(peer->x[f], spec.better);
            if (pv < own) {
                ++worse;
            } else if (pv == own) {
                ++ties;
            }
        }
        // Mid-rank tail probability of the instance within the peer sample;
        // small q means the instance sits at the bad end.
        const double q = (static_cast<double>(worse) + 0.5 * static_cast<double>(ties)) /
                         static_cast<double>(accepted_peers.size());
        FeatureFlag flag;
        flag.feature = spec.name;
        flag.value = instance.x[f];
        flag.q = q;
        flag.worse = q <= alpha;
        record.tested.push_back(std::move(flag));
    }
    if (record.tested.empty()) record.note = "no eligible features";
    return record;
}

ExplanationReport aggregate_explanations(std::vector<ExplanationRecord> records) {
    ExplanationReport report;
    std::vector<std::string> order;
    std::map<std::string, ExplanationAggregateRow> by_feature;
    for (const auto& record : records) {
        for (const auto& flag : record.tested) {
            auto [it, fresh] = by_feature.try_emplace(flag.feature);
            if (fresh) {
                it->second.feature = flag.feature;
                order.push_back(flag.feature);
            }
            ++it->second.tested;
            it->second.flagged += flag.worse ? 1 : 0;
        }
    }
    for (const auto& name : order) {
        auto row = by_feature[name];
        row.percent = 100.0 * static_cast<double>(row.flagged) /
                      static_cast<double>(row.tested);
        report.aggregate.push_back(std::move(row));
    }
    report.records = std::move(records);
    if (report.records.empty()) report.note = "no explained instances";
    return report;
}

ExplanationReport explain_all(const Dataset& dataset, const PeerSet& peers,
                              const std::vector<AuditResult>& results,
                              const AuditConfig& config) {
    const double alpha = config.explain_alpha.value_or(config.alpha);
    std::vector<ExplanationRecord> records;
    std::size_t eligible = 0;
    std::size_t skipped = 0;
    // PeerSet entries and audit results share the protected-instance order.
    if (peers.entries.size() != results.size()) {
        throw Error("explain_all: peer set and audit results do not match");
    }
    for (std::size_t e = 0; e < results.size(); ++e) {
        const auto& res = results[e];
        if (res.category != Category::FairlyTreated || res.observed_y != 0) continue;
        ++eligible;
        const auto& entry = peers.entries[e];
        std::vector<const Instance*> accepted;
        for (std::uint32_t j : entry.peer_indices) {
            const Instance& peer = dataset.instance(j);
            if (peer.y == 1) accepted.push_back(&peer);
        }
        auto record = explain_instance(dataset.instance(entry.index), accepted,
                                       dataset.schema(), alpha, config.explain_min_peers);
        if (!record) {
            ++skipped;
            continue;
        }
        records.push_back(std::move(*record));
    }
    ExplanationReport report = aggregate_explanations(std::move(records));
    report.eligible = eligible;
    report.skipped_few_peers = skipped;
    return report;
}

std::string explanations_to_csv(const ExplanationReport& report) {
    std::ostringstream out;
    out << "instance_id,feature,value,q,flagged\n";
    out.precision(17);
    for (const auto& record : report.records) {
        for (const auto& flag : record.tested) {
            out << record.id << ',' << flag.feature << ',' << flag.value << ',' << flag.q
                << ',' << (flag.worse ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

std::string explanation_aggregate_to_csv(const ExplanationReport& report) {
    std::ostringstream out;
    out << "feature,percent_flagged,flagged,tested\n";
    out.precision(17);
    for (const auto& row : report.aggregate) {
        out << row.feature << ',' << row.percent << ',' << row.flagged << ',' << row.tested
            << '\n';
    }
    return out.str();
}

}  // namespace peerfair
