#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "remi/errors.hpp"

namespace remi {

// Deterministic partition of the distinct ids into k near-equal groups:
// sort, one seeded shuffle, contiguous chunks; the first (count mod k)
// chunks take the extra element.
inline std::vector<std::vector<std::string>> partition_ids(const std::vector<std::string>& ids,
                                                           int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2");
    const std::set<std::string> unique(ids.begin(), ids.end());
    std::vector<std::string> distinct(unique.begin(), unique.end());
    if (static_cast<int>(distinct.size()) < k)
        throw DataError("fewer distinct patients (" + std::to_string(distinct.size())
                        + ") than folds (" + std::to_string(k) + ")");
    std::mt19937_64 rng(seed);
    std::shuffle(distinct.begin(), distinct.end(), rng);

    std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(k));
    const std::size_t base = distinct.size() / static_cast<std::size_t>(k);
    const std::size_t extra = distinct.size() % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < static_cast<std::size_t>(k); ++g) {
        const std::size_t take = base + (g < extra ? 1 : 0);
        groups[g].assign(distinct.begin() + static_cast<std::ptrdiff_t>(pos),
                         distinct.begin() + static_cast<std::ptrdiff_t>(pos + take));
        pos += take;
    }
    return groups;
}

struct FoldIndices {
    std::vector<int> train;
    std::vector<int> test;
};

// Row-index folds grouped by id: fold f tests the rows whose id is in group f.
inline std::vector<FoldIndices> grouped_row_folds(const std::vector<std::string>& row_ids,
                                                  int k, std::uint64_t seed) {
    const auto groups = partition_ids(row_ids, k, seed);
    std::vector<FoldIndices> folds(groups.size());
    for (std::size_t f = 0; f < groups.size(); ++f) {
        const std::set<std::string> test_ids(groups[f].begin(), groups[f].end());
        for (int i = 0; i < static_cast<int>(row_ids.size()); ++i) {
            if (test_ids.count(row_ids[static_cast<std::size_t>(i)]))
                folds[f].test.push_back(i);
            else
                folds[f].train.push_back(i);
        }
    }
    return folds;
}

} // namespace remi
