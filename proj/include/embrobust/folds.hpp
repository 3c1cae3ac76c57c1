#ifndef EMBROBUST_FOLDS_HPP
#define EMBROBUST_FOLDS_HPP

#include "dataset.hpp"
#include "rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file folds.hpp
 *
 * @brief Stratified cross-validation folds.
 */

namespace embrobust {

struct FoldAssignment {
    std::vector<int> fold_of;
    int num_folds = 5;
    std::uint64_t seed = 0;

    std::size_t fold_size(int f) const {
        std::size_t out = 0;
        for (auto x : fold_of) {
            out += (x == f);
        }
        return out;
    }
};

/**
 * Assign samples to `num_folds` folds, stratified by (biological, confounder) cell.
 *
 * Members of each cell are shuffled with a generator seeded by `seed`, then cells are visited in label order
 * and their members dealt round-robin, continuing the deal from one cell to the next.
 * Within a cell, fold counts therefore differ by at most one, and so do the overall fold sizes.
 */
inline FoldAssignment assign_folds(const EmbeddingDataset& ds, int num_folds, std::uint64_t seed) {
    if (num_folds < 2) {
        throw std::invalid_argument("assign_folds: need at least 2 folds, got " + std::to_string(num_folds));
    }
    if (static_cast<std::size_t>(num_folds) > ds.size()) {
        throw std::invalid_argument("assign_folds: " + std::to_string(num_folds) + " folds exceed " + std::to_string(ds.size()) + " samples");
    }

    std::size_t nconf = ds.conf_classes().size();
    std::vector<std::vector<std::size_t>> cells(ds.bio_classes().size() * nconf);
    auto bio = ds.labels(Axis::bio);
    auto conf = ds.labels(Axis::conf);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        cells[static_cast<std::size_t>(bio[i]) * nconf + static_cast<std::size_t>(conf[i])].push_back(i);
    }

    FoldAssignment out;
    out.num_folds = num_folds;
    out.seed = seed;
    out.fold_of.assign(ds.size(), -1);

    Rng rng(seed);
    std::size_t position = 0;
    for (auto& members : cells) {
        rng.shuffle(members);
        for (auto i : members) {
            out.fold_of[i] = static_cast<int>(position % static_cast<std::size_t>(num_folds));
            ++position;
        }
    }
    return out;
}

}

#endif
