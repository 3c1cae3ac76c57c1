#ifndef EMBROBUST_NEIGHBORS_HPP
#define EMBROBUST_NEIGHBORS_HPP

#include "dataset.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

/**
 * @file neighbors.hpp
 *
 * @brief Exact neighbor rankings and per-rank label agreement curves.
 */

namespace embrobust {

/**
 * Cosine distance \f$1 - u \cdot v / (\|u\| \|v\|)\f$, clamped to [0, 2].
 * Throws `std::invalid_argument` on length mismatch or a zero-norm input.
 */
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine_distance: length mismatch");
    }
    double dot = 0, uu = 0, vv = 0;
    for (std::size_t d = 0; d < u.size(); ++d) {
        dot += u[d] * v[d];
        uu += u[d] * u[d];
        vv += v[d] * v[d];
    }
    if (uu == 0 || vv == 0) {
        throw std::invalid_argument("cosine_distance: zero-norm input");
    }
    double out = 1.0 - dot / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(out, 0.0, 2.0);
}

enum class Metric {
    cosine,
    /** Plain Euclidean distance; only meant for testing geometric properties. */
    euclidean
};

struct NeighborOptions {
    Metric metric = Metric::cosine;
    /** Drop neighbors that share the sample's non-empty group id. */
    bool exclude_same_group = false;
    /** 0 uses all hardware threads. */
    int num_threads = 0;
};

/**
 * @brief Full ranking of every other sample, per sample.
 *
 * Row `i` lists the other samples by non-decreasing distance, ties by ascending index.
 * Without group exclusion every row has length `n - 1`; with it, rows may be shorter.
 */
class NeighborTable {
public:
    NeighborTable() = default;

    NeighborTable(std::vector<std::size_t> offsets, std::vector<std::uint32_t> order, std::vector<double> dist) :
        offsets_(std::move(offsets)), order_(std::move(order)), dist_(std::move(dist)) {}

    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

    std::size_t row_length(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

    /** Shortest row; equals `n - 1` unless neighbors were excluded. */
    std::size_t min_row_length() const {
        std::size_t out = size() ? row_length(0) : 0;
        for (std::size_t i = 1; i < size(); ++i) {
            out = std::min(out, row_length(i));
        }
        return out;
    }

    /** Neighbor indices of sample `i`, nearest first. Rank j (1-based) is element `j - 1`. */
    std::span<const std::uint32_t> order(std::size_t i) const {
        return std::span<const std::uint32_t>(order_.data() + offsets_[i], row_length(i));
    }

    std::span<const double> dist(std::size_t i) const {
        return std::span<const double>(dist_.data() + offsets_[i], row_length(i));
    }

    friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> order_;
    std::vector<double> dist_;
};

namespace neighbors_detail {

inline std::vector<double> unit_rows(const EmbeddingDataset& ds) {
    std::vector<double> out(ds.matrix().begin(), ds.matrix().end());
    std::size_t d = ds.dim();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double* row = out.data() + i * d;
        double norm = 0;
        for (std::size_t k = 0; k < d; ++k) {
            norm += row[k] * row[k];
        }
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < d; ++k) {
            row[k] /= norm;
        }
    }
    return out;
}

}

/**
 * Compute the exact neighbor table by brute force.
 * Cosine distances are computed between unit-normalized copies of the vectors, and every row is fully sorted.
 * Rows are independent and are distributed across `opt.num_threads` workers; the result does not depend on the worker count.
 */
inline NeighborTable build_neighbor_table(const EmbeddingDataset& ds, const NeighborOptions& opt = {}) {
    std::size_t n = ds.size(), d = ds.dim();
    const std::vector<double> rows = (opt.metric == Metric::cosine ? neighbors_detail::unit_rows(ds) : std::vector<double>(ds.matrix().begin(), ds.matrix().end()));

    std::vector<std::vector<std::uint32_t>> orders(n);
    std::vector<std::vector<double>> dists(n);

    parallel_for(n, opt.num_threads, [&](std::size_t start, std::size_t end) {
        std::vector<double> all(n);
        for (std::size_t i = start; i < end; ++i) {
            const double* self = rows.data() + i * d;
            for (std::size_t j = 0; j < n; ++j) {
                const double* other = rows.data() + j * d;
                double acc = 0;
                if (opt.metric == Metric::cosine) {
                    for (std::size_t k = 0; k < d; ++k) {
                        acc += self[k] * other[k];
                    }
                    all[j] = std::clamp(1.0 - acc, 0.0, 2.0);
                } else {
                    for (std::size_t k = 0; k < d; ++k) {
                        double diff = self[k] - other[k];
                        acc += diff * diff;
                    }
                    all[j] = std::sqrt(acc);
                }
            }

            auto& ord = orders[i];
            ord.reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i && !(opt.exclude_same_group && ds.same_group(i, j))) {
                    ord.push_back(static_cast<std::uint32_t>(j));
                }
            }
            std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
                return all[a] < all[b] || (all[a] == all[b] && a < b);
            });

            auto& dd = dists[i];
            dd.reserve(ord.size());
            for (auto j : ord) {
                dd.push_back(all[j]);
            }
        }
    });

    std::vector<std::size_t> offsets(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] = offsets[i] + orders[i].size();
    }
    std::vector<std::uint32_t> order;
    std::vector<double> dist;
    order.reserve(offsets[n]);
    dist.reserve(offsets[n]);
    for (std::size_t i = 0; i < n; ++i) {
        order.insert(order.end(), orders[i].begin(), orders[i].end());
        dist.insert(dist.end(), dists[i].begin(), dists[i].end());
    }
    return NeighborTable(std::move(offsets), std::move(order), std::move(dist));
}

/**
 * @brief Fraction of samples whose j-th neighbor shares each label.
 *
 * Element `j - 1` holds rank `j`. Curves run up to the shortest row of the neighbor table.
 */
struct FrequencyCurves {
    std::vector<double> f_bio;
    std::vector<double> f_conf;

    std::size_t size() const { return f_bio.size(); }
};

inline FrequencyCurves frequency_curves(const EmbeddingDataset& ds, const NeighborTable& nt) {
    if (nt.size() != ds.size()) {
        throw std::invalid_argument("frequency_curves: neighbor table was built on a different dataset");
    }
    std::size_t n = ds.size(), len = nt.min_row_length();
    auto bio = ds.labels(Axis::bio);
    auto conf = ds.labels(Axis::conf);
    std::vector<std::size_t> same_bio(len), same_conf(len);
    for (std::size_t i = 0; i < n; ++i) {
        auto ord = nt.order(i);
        for (std::size_t j = 0; j < len; ++j) {
            same_bio[j] += (bio[ord[j]] == bio[i]);
            same_conf[j] += (conf[ord[j]] == conf[i]);
        }
    }
    FrequencyCurves out;
    out.f_bio.resize(len);
    out.f_conf.resize(len);
    for (std::size_t j = 0; j < len; ++j) {
        out.f_bio[j] = static_cast<double>(same_bio[j]) / static_cast<double>(n);
        out.f_conf[j] = static_cast<double>(same_conf[j]) / static_cast<double>(n);
    }
    return out;
}

}

#endif
