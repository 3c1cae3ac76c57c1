#ifndef EMBROBUST_KNN_HPP
#define EMBROBUST_KNN_HPP

#include "dataset.hpp"
#include "folds.hpp"
#include "neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file knn.hpp
 *
 * @brief Cross-validated k-nearest-neighbor probe, and the shared result type for probes.
 */

namespace embrobust {

/**
 * @brief Cross-validated predictions and accuracies for one label axis.
 *
 * Each "configuration" is one value of `k` for kNN, or the single fitted model for logistic regression.
 */
struct EvalResult {
    Axis target = Axis::bio;
    std::string method;

    /** kNN neighbor counts, one per configuration; empty for regression. */
    std::vector<std::size_t> k_grid;

    /** Per configuration, per fold. */
    std::vector<std::vector<double>> fold_accuracy;

    /** Per configuration: mean and population standard deviation of the fold accuracies. */
    std::vector<double> accuracy_mean;
    std::vector<double> accuracy_std;

    /** Per configuration, per sample: predicted label index from the model that held the sample out. */
    std::vector<std::vector<int>> predictions;
};

namespace eval_detail {

inline void summarize(EvalResult& out, std::span<const int> truth, const FoldAssignment& folds) {
    std::size_t nf = static_cast<std::size_t>(folds.num_folds);
    for (const auto& pred : out.predictions) {
        std::vector<double> correct(nf), total(nf);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            auto f = static_cast<std::size_t>(folds.fold_of[i]);
            total[f] += 1;
            correct[f] += (pred[i] == truth[i]);
        }
        std::vector<double> acc(nf);
        double mean = 0;
        for (std::size_t f = 0; f < nf; ++f) {
            acc[f] = total[f] > 0 ? correct[f] / total[f] : 0.0;
            mean += acc[f];
        }
        mean /= static_cast<double>(nf);
        double var = 0;
        for (auto a : acc) {
            var += (a - mean) * (a - mean);
        }
        out.fold_accuracy.push_back(std::move(acc));
        out.accuracy_mean.push_back(mean);
        out.accuracy_std.push_back(std::sqrt(var / static_cast<double>(nf)));
    }
}

}

/**
 * @return The `k` nearest neighbors of sample `i` that are outside its own fold, nearest first.
 * Throws `PreconditionError` if fewer than `k` exist.
 */
inline std::vector<std::uint32_t> training_neighbors(const NeighborTable& nt, const FoldAssignment& folds, std::size_t i, std::size_t k) {
    std::vector<std::uint32_t> out;
    out.reserve(k);
    int own = folds.fold_of[i];
    for (auto j : nt.order(i)) {
        if (out.size() == k) {
            break;
        }
        if (folds.fold_of[j] != own) {
            out.push_back(j);
        }
    }
    if (out.size() < k) {
        throw PreconditionError("k=" + std::to_string(k) + " exceeds the " + std::to_string(out.size()) + " training-fold neighbors available to sample " + std::to_string(i));
    }
    return out;
}

/**
 * Majority vote over `labels` of `neighbors`; ties go to the tied class whose member appears first (nearest).
 */
inline int majority_vote(std::span<const std::uint32_t> neighbors, std::span<const int> labels, std::size_t num_classes) {
    std::vector<std::size_t> counts(num_classes);
    std::size_t best = 0;
    for (auto j : neighbors) {
        best = std::max(best, ++counts[labels[j]]);
    }
    for (auto j : neighbors) {
        if (counts[labels[j]] == best) {
            return labels[j];
        }
    }
    return -1;
}

/**
 * Cross-validated kNN predictions for several `k` at once.
 * Sample `i` in fold `f` votes among its nearest neighbors outside fold `f`.
 */
inline EvalResult knn_predict_grid(const EmbeddingDataset& ds, const NeighborTable& nt, const FoldAssignment& folds, Axis target, const std::vector<std::size_t>& k_grid) {
    if (k_grid.empty()) {
        throw std::invalid_argument("knn_predict: empty k grid");
    }
    std::size_t kmax = 0;
    for (auto k : k_grid) {
        if (k < 1) {
            throw std::invalid_argument("knn_predict: k must be at least 1");
        }
        kmax = std::max(kmax, k);
    }

    auto labels = ds.labels(target);
    std::size_t nclasses = ds.classes(target).size();
    EvalResult out;
    out.target = target;
    out.method = "knn";
    out.k_grid = k_grid;
    out.predictions.assign(k_grid.size(), std::vector<int>(ds.size()));

    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto nn = training_neighbors(nt, folds, i, kmax);
        for (std::size_t g = 0; g < k_grid.size(); ++g) {
            out.predictions[g][i] = majority_vote(std::span<const std::uint32_t>(nn.data(), k_grid[g]), labels, nclasses);
        }
    }
    eval_detail::summarize(out, labels, folds);
    return out;
}

inline EvalResult knn_predict(const EmbeddingDataset& ds, const NeighborTable& nt, const FoldAssignment& folds, Axis target, std::size_t k = 3) {
    return knn_predict_grid(ds, nt, folds, target, std::vector<std::size_t>{ k });
}

}

#endif
