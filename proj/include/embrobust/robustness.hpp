#ifndef EMBROBUST_ROBUSTNESS_HPP
#define EMBROBUST_ROBUSTNESS_HPP

#include "dataset.hpp"
#include "neighbors.hpp"

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

/**
 * @file robustness.hpp
 *
 * @brief Robustness index: same-biological-label neighbor count over same-confounder neighbor count.
 */

namespace embrobust {

/**
 * @brief Outcome of a robustness index computation.
 */
struct RobustnessReport {
    /** Neighbors per sample. */
    std::size_t k = 50;

    /** Total number of (sample, neighbor rank <= k) pairs sharing the biological label. */
    std::uint64_t numerator = 0;

    /** Same, for the confounder label. */
    std::uint64_t denominator = 0;

    double r_k = 0;

    /** Index under perfect biological organization with chance-level confounder agreement, i.e. `1 / p_conf`. */
    double r_max = 0;

    /** Index under the converse, i.e. `p_bio`. */
    double r_min = 0;
};

/**
 * @brief The index is undefined because no sample has a same-confounder neighbor within k.
 */
class UndefinedIndexError : public PreconditionError {
public:
    UndefinedIndexError(std::size_t k, std::uint64_t numerator) :
        PreconditionError("undefined index: no same-confounder neighbors within k=" + std::to_string(k) + " (numerator " + std::to_string(numerator) + ")"),
        numerator(numerator) {}

    std::uint64_t numerator;
};

struct RobustnessBounds {
    double r_min;
    double r_max;
};

/**
 * Chance-level bounds of the index for the dataset's label composition: `r_max = 1 / p_conf`, `r_min = p_bio`.
 * `k` does not enter the closed form; it is accepted so callers can pass the same parameters as `robustness_index()`.
 */
inline RobustnessBounds robustness_bounds(const EmbeddingDataset& ds, [[maybe_unused]] std::size_t k = 50) {
    auto chance = chance_levels(ds);
    return RobustnessBounds{ chance.bio, 1.0 / chance.conf };
}

/**
 * Compute the robustness index over the `k` nearest other samples of every sample.
 *
 * Neighbors sharing both labels count towards both sums.
 * Throws `std::invalid_argument` when `k` is 0 or exceeds the shortest neighbor row,
 * and `UndefinedIndexError` (carrying the numerator) when the denominator is zero.
 */
inline RobustnessReport robustness_index(const EmbeddingDataset& ds, const NeighborTable& nt, std::size_t k = 50) {
    if (nt.size() != ds.size()) {
        throw std::invalid_argument("robustness_index: neighbor table was built on a different dataset");
    }
    if (k < 1 || k > nt.min_row_length()) {
        throw std::invalid_argument("robustness_index: k must lie in [1, " + std::to_string(nt.min_row_length()) + "], got " + std::to_string(k));
    }

    auto bio = ds.labels(Axis::bio);
    auto conf = ds.labels(Axis::conf);
    RobustnessReport out;
    out.k = k;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto ord = nt.order(i);
        for (std::size_t j = 0; j < k; ++j) {
            out.numerator += (bio[ord[j]] == bio[i]);
            out.denominator += (conf[ord[j]] == conf[i]);
        }
    }
    if (out.denominator == 0) {
        throw UndefinedIndexError(k, out.numerator);
    }

    out.r_k = static_cast<double>(out.numerator) / static_cast<double>(out.denominator);
    auto bounds = robustness_bounds(ds, k);
    out.r_min = bounds.r_min;
    out.r_max = bounds.r_max;
    return out;
}

/**
 * @return Two-significant-digit display form, e.g. "1.2" or "0.84".
 */
inline std::string display_value(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2g", value);
    return buffer;
}

}

#endif
