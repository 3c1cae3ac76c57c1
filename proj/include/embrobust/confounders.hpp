#ifndef EMBROBUST_CONFOUNDERS_HPP
#define EMBROBUST_CONFOUNDERS_HPP

#include "dataset.hpp"
#include "folds.hpp"
#include "knn.hpp"
#include "logreg.hpp"
#include "neighbors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file confounders.hpp
 *
 * @brief Attribution of kNN errors to same-confounder neighbors.
 */

namespace embrobust {

/**
 * @return Up to `points` log-spaced integers from `lo` to `hi` inclusive, rounded and deduplicated.
 * The defaults give 1, 2, 4, 8, 16, 32, 63, 125, 250.
 */
inline std::vector<std::size_t> log_spaced_grid(std::size_t lo = 1, std::size_t hi = 250, std::size_t points = 9) {
    if (lo < 1 || hi < lo || points < 1) {
        throw std::invalid_argument("log_spaced_grid: need 1 <= lo <= hi and points >= 1");
    }
    std::vector<std::size_t> out;
    double llo = std::log(static_cast<double>(lo)), lhi = std::log(static_cast<double>(hi));
    for (std::size_t p = 0; p < points; ++p) {
        double t = points == 1 ? 0.0 : static_cast<double>(p) / static_cast<double>(points - 1);
        auto k = static_cast<std::size_t>(std::llround(std::exp(llo + t * (lhi - llo))));
        if (out.empty() || out.back() != k) {
            out.push_back(k);
        }
    }
    out.back() = hi;
    return out;
}

/**
 * @brief Subset of a dataset keeping biological classes observed under every confounder class.
 */
struct RestrictedDataset {
    EmbeddingDataset data;
    std::vector<std::string> retained_classes;
    /** `1 / number of confounder classes`. */
    double chance_level = 0;
};

/**
 * Keep only biological classes that have at least one sample in every confounder class,
 * so that a confounder-blind embedding spreads wrong-class neighbors evenly over the confounder classes.
 * Throws `PreconditionError` when no class qualifies.
 */
inline RestrictedDataset restrict_for_confounders(const EmbeddingDataset& ds) {
    auto counts = class_count_matrix(ds);
    std::vector<char> keep(counts.bio_classes.size());
    RestrictedDataset out;
    for (std::size_t b = 0; b < counts.bio_classes.size(); ++b) {
        const auto& row = counts.counts[b];
        keep[b] = std::all_of(row.begin(), row.end(), [](std::size_t c) { return c > 0; });
        if (keep[b]) {
            out.retained_classes.push_back(counts.bio_classes[b]);
        }
    }
    if (out.retained_classes.empty()) {
        throw PreconditionError("no biological class is present in all " + std::to_string(counts.conf_classes.size()) +
                                " confounder classes; supply a manually restricted subset instead");
    }

    auto bio = ds.labels(Axis::bio);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (keep[bio[i]]) {
            rows.push_back(i);
        }
    }
    out.data = rows.size() == ds.size() ? ds : ds.subset(rows);
    out.chance_level = 1.0 / static_cast<double>(counts.conf_classes.size());
    return out;
}

struct RepeatedKnnOptions {
    std::vector<std::size_t> k_grid = log_spaced_grid();
    /** Number of re-foldings; repetition `r` uses fold seed `derive_seed(seed, r)`. */
    int reps = 5;
    std::uint64_t seed = 0;
    int num_folds = 5;
};

/**
 * @return Fold assignment for repetition `rep`.
 */
inline FoldAssignment rep_folds(const EmbeddingDataset& ds, const RepeatedKnnOptions& opt, int rep) {
    return assign_folds(ds, opt.num_folds, derive_seed(opt.seed, static_cast<std::uint64_t>(rep)));
}

/**
 * @brief Same-confounder fraction among the neighbors behind wrong kNN predictions.
 */
struct ConfounderReport {
    std::vector<std::size_t> k_grid;
    int reps = 0;
    std::uint64_t seed = 0;
    int num_folds = 0;

    /** Per k: mean over (rep, misclassified sample) of the same-confounder fraction; empty when nothing was misclassified. */
    std::vector<std::optional<double>> frac_same_center;

    /** Per k: number of (rep, misclassified sample) pairs behind `frac_same_center`. */
    std::vector<std::size_t> misclassified;

    /** Per k: cross-validated accuracy on each axis, averaged over reps. */
    std::vector<double> acc_bio;
    std::vector<double> acc_conf;

    double chance_level = 0;
};

/**
 * For every repetition and `k`: predict biological labels by cross-validated kNN; for each misclassified sample,
 * take its `k` training neighbors carrying the predicted (wrong) label and record the fraction that share the sample's confounder label.
 * The curve value at `k` is the unweighted mean of these per-sample fractions.
 *
 * @param ds Typically the output of `restrict_for_confounders()`.
 * @param nt Neighbor table built on `ds`.
 */
inline ConfounderReport confounder_analysis(const EmbeddingDataset& ds, const NeighborTable& nt, const RepeatedKnnOptions& opt = {}) {
    if (opt.reps < 1) {
        throw std::invalid_argument("confounder_analysis: reps must be at least 1");
    }
    std::size_t G = opt.k_grid.size();
    ConfounderReport out;
    out.k_grid = opt.k_grid;
    out.reps = opt.reps;
    out.seed = opt.seed;
    out.num_folds = opt.num_folds;
    out.chance_level = 1.0 / static_cast<double>(ds.conf_classes().size());
    out.acc_bio.assign(G, 0);
    out.acc_conf.assign(G, 0);
    out.misclassified.assign(G, 0);

    std::vector<double> frac_sum(G, 0);
    std::size_t kmax = *std::max_element(opt.k_grid.begin(), opt.k_grid.end());
    auto bio = ds.labels(Axis::bio);
    auto conf = ds.labels(Axis::conf);

    for (int r = 0; r < opt.reps; ++r) {
        auto folds = rep_folds(ds, opt, r);
        auto pred_bio = knn_predict_grid(ds, nt, folds, Axis::bio, opt.k_grid);
        auto pred_conf = knn_predict_grid(ds, nt, folds, Axis::conf, opt.k_grid);
        for (std::size_t g = 0; g < G; ++g) {
            out.acc_bio[g] += pred_bio.accuracy_mean[g] / opt.reps;
            out.acc_conf[g] += pred_conf.accuracy_mean[g] / opt.reps;
        }

        for (std::size_t i = 0; i < ds.size(); ++i) {
            std::vector<std::uint32_t> nn;
            for (std::size_t g = 0; g < G; ++g) {
                int predicted = pred_bio.predictions[g][i];
                if (predicted == bio[i]) {
                    continue;
                }
                if (nn.empty()) {
                    nn = training_neighbors(nt, folds, i, kmax);
                }
                std::size_t confounding = 0, same = 0;
                for (std::size_t j = 0; j < opt.k_grid[g]; ++j) {
                    if (bio[nn[j]] == predicted) {
                        ++confounding;
                        same += (conf[nn[j]] == conf[i]);
                    }
                }
                frac_sum[g] += static_cast<double>(same) / static_cast<double>(confounding);
                ++out.misclassified[g];
            }
        }
    }

    out.frac_same_center.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        if (out.misclassified[g]) {
            out.frac_same_center[g] = frac_sum[g] / static_cast<double>(out.misclassified[g]);
        }
    }
    return out;
}

/**
 * @brief Per-sample frequency of center-related kNN errors, related to logistic-regression errors.
 */
struct CenterErrorRelation {
    struct Bin {
        double lo = 0;
        double hi = 0;
        std::size_t count = 0;
        /** Fraction of binned samples misclassified by regression; empty for an empty bin. */
        std::optional<double> logreg_error_rate;
    };

    /** Per sample: center-related error runs over all (rep, k) runs. */
    std::vector<double> center_error_fraction;
    /** Per sample: misclassified by cross-validated logistic regression on the biological axis. */
    std::vector<char> logreg_error;
    std::vector<Bin> bins;

    std::vector<std::size_t> k_grid;
    int reps = 0;
    std::uint64_t seed = 0;
    double lambda = 0;
};

/**
 * A kNN run is one (repetition, k) pair. A run makes a center-related error on sample `i` when it misclassifies `i`
 * and strictly more than `k / 2` of the `k` training neighbors both carry a label other than `i`'s true label and share `i`'s confounder label.
 * Regression errors come from `logreg_cv()` on the biological axis with the first repetition's folds.
 * Samples are binned by their center-related error fraction into `num_bins` equal-width bins on [0, 1] (1 falls in the last bin).
 */
inline CenterErrorRelation center_error_relation(const EmbeddingDataset& ds, const NeighborTable& nt, const RepeatedKnnOptions& opt = {},
                                                 const LogRegOptions& logreg = {}, int num_threads = 1, std::size_t num_bins = 10) {
    if (opt.reps < 1) {
        throw std::invalid_argument("center_error_relation: reps must be at least 1");
    }
    std::size_t n = ds.size(), G = opt.k_grid.size();
    std::size_t kmax = *std::max_element(opt.k_grid.begin(), opt.k_grid.end());
    auto bio = ds.labels(Axis::bio);
    auto conf = ds.labels(Axis::conf);

    CenterErrorRelation out;
    out.k_grid = opt.k_grid;
    out.reps = opt.reps;
    out.seed = opt.seed;
    out.lambda = logreg.lambda;
    std::vector<std::size_t> related(n, 0);

    for (int r = 0; r < opt.reps; ++r) {
        auto folds = rep_folds(ds, opt, r);
        auto pred = knn_predict_grid(ds, nt, folds, Axis::bio, opt.k_grid);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::uint32_t> nn;
            for (std::size_t g = 0; g < G; ++g) {
                if (pred.predictions[g][i] == bio[i]) {
                    continue;
                }
                if (nn.empty()) {
                    nn = training_neighbors(nt, folds, i, kmax);
                }
                std::size_t k = opt.k_grid[g], hits = 0;
                for (std::size_t j = 0; j < k; ++j) {
                    hits += (bio[nn[j]] != bio[i] && conf[nn[j]] == conf[i]);
                }
                if (2 * hits > k) {
                    ++related[i];
                }
            }
        }
    }

    double runs = static_cast<double>(opt.reps) * static_cast<double>(G);
    out.center_error_fraction.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.center_error_fraction[i] = static_cast<double>(related[i]) / runs;
    }

    auto folds = rep_folds(ds, opt, 0);
    auto lr = logreg_cv(ds, folds, Axis::bio, logreg, num_threads);
    out.logreg_error.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.logreg_error[i] = (lr.predictions[0][i] != bio[i]);
    }

    out.bins.resize(num_bins);
    std::vector<std::size_t> errors(num_bins, 0);
    for (std::size_t b = 0; b < num_bins; ++b) {
        out.bins[b].lo = static_cast<double>(b) / static_cast<double>(num_bins);
        out.bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(num_bins);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto b = std::min(num_bins - 1, static_cast<std::size_t>(out.center_error_fraction[i] * static_cast<double>(num_bins)));
        ++out.bins[b].count;
        errors[b] += out.logreg_error[i];
    }
    for (std::size_t b = 0; b < num_bins; ++b) {
        if (out.bins[b].count) {
            out.bins[b].logreg_error_rate = static_cast<double>(errors[b]) / static_cast<double>(out.bins[b].count);
        }
    }
    return out;
}

}

#endif
