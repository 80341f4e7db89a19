#pragma once

#include <string>
#include <vector>

#include "peerfair/dataset.hpp"

namespace peerfair::testutil {

// Small hand-built schema: two binary features, one ordinal, one continuous.
inline FeatureSchema small_schema() {
    FeatureSchema schema;
    schema.protected_column = "group";
    schema.protected_value = "p";
    schema.unprotected_value = "u";
    schema.outcome_column = "outcome";
    schema.favourable_value = "yes";
    schema.unfavourable_value = "no";
    schema.id_column = "id";
    FeatureSpec a{"flag_a", FeatureKind::Binary, {"no", "yes"}, Direction::Higher, false};
    FeatureSpec b{"flag_b", FeatureKind::Binary, {"no", "yes"}, Direction::Lower, true};
    FeatureSpec c{"grade", FeatureKind::Ordinal, {"low", "mid", "high"}, Direction::Higher,
                  false};
    FeatureSpec d{"amount", FeatureKind::Continuous, {}, Direction::Higher, false};
    schema.features = {a, b, c, d};
    return schema;
}

inline Instance make_instance(std::string id, std::vector<double> x, bool is_protected,
                              int y) {
    Instance inst;
    inst.id = std::move(id);
    inst.x = std::move(x);
    inst.is_protected = is_protected;
    inst.y = y;
    return inst;
}

}  // namespace peerfair::testutil
