// Copyright 2026 The Momir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "momir/database.hpp"
#include "momir/detail/parallel.hpp"

namespace momir {

/// Canberra distance: sum_k |a_k - b_k| / (|a_k| + |b_k|), with 0/0 terms
/// defined as 0. Each term lies in [0,1], so the distance is at most dim.
inline double canberra(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error("dimension mismatch in canberra: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double denom = std::abs(a[k]) + std::abs(b[k]);
        if (denom > 0.0) acc += std::abs(a[k] - b[k]) / denom;
    }
    return acc;
}

struct RankedHit {
    std::string id;
    int class_label = 0;
    double distance = 0.0;
};

/// Hits ordered by ascending distance, ties broken by id.
using RankedResult = std::vector<RankedHit>;

namespace detail {

// (distance, record index) ranking shared by query and the efficiency scan.
// Comparing by id keeps tie order independent of record permutation.
struct DistIdx {
    double dist;
    std::uint32_t idx;
};

inline std::vector<DistIdx> rank_all(const FeatureDatabase& db, std::span<const double> q,
                                     int skip_idx = -1) {
    std::vector<DistIdx> out;
    out.reserve(db.records.size());
    for (std::uint32_t i = 0; i < db.records.size(); ++i) {
        if (static_cast<int>(i) == skip_idx) continue;
        out.push_back({canberra(q, db.records[i].values), i});
    }
    return out;
}

}  // namespace detail

/// Top-n records by Canberra distance. top_n larger than the database is
/// clamped; ordering is deterministic under ties (ascending id).
inline RankedResult query(const FeatureDatabase& db, std::span<const double> q,
                          std::size_t top_n) {
    if (db.records.empty()) throw Error("query against an empty database");
    if (q.size() != db.dim)
        throw Error("query dimension " + std::to_string(q.size()) +
                    " does not match database dimension " + std::to_string(db.dim));
    auto ranked = detail::rank_all(db, q);
    auto cmp = [&db](const detail::DistIdx& a, const detail::DistIdx& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return db.records[a.idx].id < db.records[b.idx].id;
    };
    top_n = std::min(top_n, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_n),
                      ranked.end(), cmp);
    RankedResult result;
    result.reserve(top_n);
    for (std::size_t i = 0; i < top_n; ++i) {
        const auto& rec = db.records[ranked[i].idx];
        result.push_back({rec.id, rec.class_label, ranked[i].dist});
    }
    return result;
}

inline RankedResult query(const FeatureDatabase& db, const FeatureVector& q, std::size_t top_n) {
    if (q.method != db.method)
        throw Error("query method '" + to_string(q.method) + "' does not match database method '" +
                    to_string(db.method) + "'");
    return query(db, std::span<const double>(q.values), top_n);
}

struct RetrievalEfficiency {
    std::vector<double> per_class;  // mean percentage per class label
    double overall = 0.0;           // mean over all queries
};

/// Average retrieval efficiency: every record queries the database and the
/// percentage of same-class images among its top_n hits is averaged. With
/// include_self (the default) the query itself is in the candidate set and
/// counts as a rank-1 match.
inline RetrievalEfficiency retrieval_efficiency(const FeatureDatabase& db, std::size_t top_n,
                                                bool include_self = true, unsigned jobs = 0) {
    if (db.records.empty()) throw Error("retrieval efficiency of an empty database");
    if (top_n < 1) throw Error("top_n must be at least 1");

    int max_class = 0;
    for (const auto& r : db.records) max_class = std::max(max_class, r.class_label);

    std::vector<double> per_query(db.records.size());
    detail::parallel_for(db.records.size(), jobs, [&](std::size_t qi) {
        auto ranked = detail::rank_all(db, db.records[qi].values,
                                       include_self ? -1 : static_cast<int>(qi));
        auto cmp = [&db](const detail::DistIdx& a, const detail::DistIdx& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return db.records[a.idx].id < db.records[b.idx].id;
        };
        const std::size_t n = std::min(top_n, ranked.size());
        std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n - 1),
                         ranked.end(), cmp);
        std::size_t matches = 0;
        const int want = db.records[qi].class_label;
        for (std::size_t i = 0; i < n; ++i)
            if (db.records[ranked[i].idx].class_label == want) ++matches;
        per_query[qi] = 100.0 * static_cast<double>(matches) / static_cast<double>(top_n);
    });

    RetrievalEfficiency eff;
    eff.per_class.assign(static_cast<std::size_t>(max_class) + 1, 0.0);
    std::vector<std::size_t> class_sizes(static_cast<std::size_t>(max_class) + 1, 0);
    double total = 0.0;
    for (std::size_t qi = 0; qi < db.records.size(); ++qi) {
        eff.per_class[db.records[qi].class_label] += per_query[qi];
        class_sizes[db.records[qi].class_label]++;
        total += per_query[qi];
    }
    for (std::size_t c = 0; c < eff.per_class.size(); ++c)
        if (class_sizes[c] > 0) eff.per_class[c] /= static_cast<double>(class_sizes[c]);
    eff.overall = total / static_cast<double>(db.records.size());
    return eff;
}

}  // namespace momir
