#ifndef EMBROBUST_LOGREG_HPP
#define EMBROBUST_LOGREG_HPP

#include "dataset.hpp"
#include "folds.hpp"
#include "knn.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file logreg.hpp
 *
 * @brief Multinomial logistic regression probe.
 */

namespace embrobust {

/**
 * @brief Per-feature standardization to mean 0 and variance 1, fitted on training rows.
 * Constant features get a zero scale and map to 0.
 */
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> inv_scale;

    static Standardizer fit(std::span<const double> x, std::size_t rows, std::size_t dim) {
        Standardizer out;
        out.mean.assign(dim, 0);
        out.inv_scale.assign(dim, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t d = 0; d < dim; ++d) {
                out.mean[d] += x[r * dim + d];
            }
        }
        for (auto& m : out.mean) {
            m /= static_cast<double>(rows);
        }
        std::vector<double> var(dim);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t d = 0; d < dim; ++d) {
                double delta = x[r * dim + d] - out.mean[d];
                var[d] += delta * delta;
            }
        }
        for (std::size_t d = 0; d < dim; ++d) {
            double sd = std::sqrt(var[d] / static_cast<double>(rows));
            out.inv_scale[d] = sd > 0 ? 1.0 / sd : 0.0;
        }
        return out;
    }

    void apply(std::span<const double> row, std::span<double> out) const {
        for (std::size_t d = 0; d < mean.size(); ++d) {
            out[d] = (row[d] - mean[d]) * inv_scale[d];
        }
    }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct LogRegOptions {
    double lambda = 1e-3;
    double tolerance = 1e-6;
    int max_iterations = 5000;
};

/**
 * @brief Fitted softmax model on standardized inputs.
 */
struct LogRegModel {
    std::size_t num_classes = 0;
    std::size_t dim = 0;
    Standardizer standardizer;
    /** `num_classes * dim`, row per class. */
    std::vector<double> weights;
    std::vector<double> bias;

    int iterations = 0;
    bool converged = false;
    double lambda = 0;
    /** Objective at the start and after every accepted step. */
    std::vector<double> loss_trace;

    std::vector<double> logits(std::span<const double> row) const {
        std::vector<double> z(dim);
        standardizer.apply(row, z);
        std::vector<double> out(bias);
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double* w = weights.data() + c * dim;
            double acc = 0;
            for (std::size_t d = 0; d < dim; ++d) {
                acc += w[d] * z[d];
            }
            out[c] += acc;
        }
        return out;
    }

    /** Highest logit; ties to the lowest class index. */
    int predict(std::span<const double> row) const {
        auto z = logits(row);
        return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    }
};

/**
 * @brief Non-finite objective during fitting.
 */
class NonFiniteLossError : public std::runtime_error {
public:
    NonFiniteLossError(int iteration, double step) :
        std::runtime_error("non-finite loss at iteration " + std::to_string(iteration) + " (step size " + std::to_string(step) + ")"),
        iteration(iteration), step(step) {}

    int iteration;
    double step;
};

namespace logreg_detail {

/**
 * Mean cross-entropy of logits `z` (n x C) against `y`, computed with log-sum-exp.
 */
inline double cross_entropy(std::span<const double> z, std::span<const int> y, std::size_t C) {
    std::size_t n = y.size();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = z.data() + i * C;
        double top = *std::max_element(row, row + C);
        double sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            sum += std::exp(row[c] - top);
        }
        total += top + std::log(sum) - row[y[i]];
    }
    return total / static_cast<double>(n);
}

inline void compute_logits(std::span<const double> x, std::size_t n, std::size_t dim, std::span<const double> w, std::span<const double> b, std::size_t C, std::span<double> z) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.data() + i * dim;
        for (std::size_t c = 0; c < C; ++c) {
            const double* wc = w.data() + c * dim;
            double acc = 0;
            for (std::size_t d = 0; d < dim; ++d) {
                acc += wc[d] * row[d];
            }
            z[i * C + c] = acc + b[c];
        }
    }
}

/**
 * Gradient of the objective given the logits: mean of (softmax - onehot) outer x, plus `lambda * w` on weights.
 */
inline void gradient_from_logits(std::span<const double> x, std::size_t n, std::size_t dim, std::span<const int> y, std::size_t C, double lambda,
                                 std::span<const double> w, std::span<const double> z, std::span<double> gw, std::span<double> gb) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    std::vector<double> resid(C);
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = z.data() + i * C;
        double top = *std::max_element(row, row + C);
        double sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            resid[c] = std::exp(row[c] - top);
            sum += resid[c];
        }
        for (std::size_t c = 0; c < C; ++c) {
            resid[c] = (resid[c] / sum - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0)) * inv_n;
            gb[c] += resid[c];
            double* g = gw.data() + c * dim;
            const double* xi = x.data() + i * dim;
            double r = resid[c];
            for (std::size_t d = 0; d < dim; ++d) {
                g[d] += r * xi[d];
            }
        }
    }
    for (std::size_t k = 0; k < gw.size(); ++k) {
        gw[k] += lambda * w[k];
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double out = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        out += a[k] * b[k];
    }
    return out;
}

}

/**
 * Objective on already-standardized inputs: mean cross-entropy plus \f$\lambda \|W\|^2 / 2\f$ (bias unpenalized).
 *
 * @param x Row-major `n * dim` inputs.
 * @param y Class index per row, in `[0, num_classes)`.
 * @param w Row-major `num_classes * dim` weights.
 * @param b Bias per class.
 * @param[out] gw If non-empty, receives the weight gradient.
 * @param[out] gb If non-empty, receives the bias gradient.
 *
 * @return Objective value.
 */
inline double logreg_objective(std::span<const double> x, std::size_t dim, std::span<const int> y, std::size_t num_classes, double lambda,
                               std::span<const double> w, std::span<const double> b, std::span<double> gw = {}, std::span<double> gb = {}) {
    std::size_t n = y.size();
    std::vector<double> z(n * num_classes);
    logreg_detail::compute_logits(x, n, dim, w, b, num_classes, z);
    if (!gw.empty()) {
        logreg_detail::gradient_from_logits(x, n, dim, y, num_classes, lambda, w, z, gw, gb);
    }
    return logreg_detail::cross_entropy(z, y, num_classes) + 0.5 * lambda * logreg_detail::dot(w, w);
}

/**
 * Fit a multinomial logistic regression by full-batch gradient descent from zero.
 *
 * Inputs are standardized with statistics of `x` itself.
 * Each step moves along the negative gradient; the trial step length is the Barzilai-Borwein estimate from the previous step
 * and is halved until the Armijo sufficient-decrease condition holds, so the objective never increases.
 * Iteration stops when the gradient's infinity norm drops below `opt.tolerance`, after `opt.max_iterations` steps,
 * or when no step length yields a decrease (`converged` is then false).
 *
 * @param x Row-major `y.size() * dim` inputs.
 * @param y Class index per row, with at least two distinct classes present.
 * @param num_classes Size of the label space; classes absent from `y` are allowed.
 */
inline LogRegModel logreg_fit(std::span<const double> x, std::size_t dim, std::span<const int> y, std::size_t num_classes, const LogRegOptions& opt = {}) {
    std::size_t n = y.size();
    if (x.size() != n * dim) {
        throw std::invalid_argument("logreg_fit: input size does not match rows * dim");
    }
    {
        std::vector<char> present(num_classes);
        std::size_t distinct = 0;
        for (auto label : y) {
            if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
                throw std::invalid_argument("logreg_fit: label out of range");
            }
            distinct += !present[label];
            present[label] = 1;
        }
        if (distinct < 2) {
            throw PreconditionError("logreg_fit: need at least 2 classes present");
        }
    }
    for (auto v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("logreg_fit: non-finite input");
        }
    }

    LogRegModel model;
    model.num_classes = num_classes;
    model.dim = dim;
    model.lambda = opt.lambda;
    model.standardizer = Standardizer::fit(x, n, dim);

    std::vector<double> xs(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        model.standardizer.apply(x.subspan(i * dim, dim), std::span<double>(xs.data() + i * dim, dim));
    }

    std::size_t C = num_classes, P = C * dim;
    std::vector<double> w(P, 0.0), b(C, 0.0), gw(P), gb(C), z(n * C, 0.0);
    std::vector<double> dz(n * C), ztrial(n * C);
    std::vector<double> prev_w, prev_b, prev_gw, prev_gb;

    double loss = logreg_detail::cross_entropy(z, y, C);
    if (!std::isfinite(loss)) {
        throw NonFiniteLossError(0, 0);
    }
    logreg_detail::gradient_from_logits(xs, n, dim, y, C, opt.lambda, w, z, gw, gb);
    model.loss_trace.push_back(loss);

    double step = 1.0;
    constexpr double armijo = 1e-4;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        double gmax = 0;
        for (auto g : gw) {
            gmax = std::max(gmax, std::abs(g));
        }
        for (auto g : gb) {
            gmax = std::max(gmax, std::abs(g));
        }
        if (gmax < opt.tolerance) {
            model.converged = true;
            break;
        }

        if (!prev_w.empty()) {
            double ss = 0, sy = 0;
            for (std::size_t k = 0; k < P; ++k) {
                double s = w[k] - prev_w[k], yk = gw[k] - prev_gw[k];
                ss += s * s;
                sy += s * yk;
            }
            for (std::size_t c = 0; c < C; ++c) {
                double s = b[c] - prev_b[c], yk = gb[c] - prev_gb[c];
                ss += s * s;
                sy += s * yk;
            }
            step = sy > 0 ? ss / sy : step * 2;
            step = std::clamp(step, 1e-10, 1e10);
        }

        // Logits are affine in the step length, so each trial costs O(n C).
        logreg_detail::compute_logits(xs, n, dim, gw, gb, C, dz);
        double gg = logreg_detail::dot(gw, gw) + logreg_detail::dot(gb, gb);
        double ww = logreg_detail::dot(w, w), wg = logreg_detail::dot(w, gw), gwgw = logreg_detail::dot(gw, gw);

        bool accepted = false;
        double trial_loss = 0;
        for (int halving = 0; halving < 80; ++halving, step *= 0.5) {
            for (std::size_t k = 0; k < z.size(); ++k) {
                ztrial[k] = z[k] - step * dz[k];
            }
            double penalty = 0.5 * opt.lambda * (ww - 2 * step * wg + step * step * gwgw);
            trial_loss = logreg_detail::cross_entropy(ztrial, y, C) + penalty;
            if (std::isfinite(trial_loss) && trial_loss <= loss - armijo * step * gg) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!std::isfinite(trial_loss)) {
                throw NonFiniteLossError(iter + 1, step);
            }
            break;
        }

        prev_w = w;
        prev_b = b;
        prev_gw = gw;
        prev_gb = gb;
        for (std::size_t k = 0; k < P; ++k) {
            w[k] -= step * gw[k];
        }
        for (std::size_t c = 0; c < C; ++c) {
            b[c] -= step * gb[c];
        }
        z.swap(ztrial);
        loss = trial_loss;
        model.loss_trace.push_back(loss);
        logreg_detail::gradient_from_logits(xs, n, dim, y, C, opt.lambda, w, z, gw, gb);
    }

    model.iterations = iter;
    model.weights = std::move(w);
    model.bias = std::move(b);
    return model;
}

/**
 * Cross-validated logistic regression on one label axis.
 * Each fold's model (and its standardization) is fitted on the other folds only, then predicts the held-out fold.
 * If the training folds contain a single class, that class is predicted.
 *
 * @param[out] models If non-null, receives the fitted model per fold (default-constructed where a single class was predicted).
 */
inline EvalResult logreg_cv(const EmbeddingDataset& ds, const FoldAssignment& folds, Axis target, const LogRegOptions& opt = {}, int num_threads = 1,
                            std::vector<LogRegModel>* models = nullptr) {
    auto labels = ds.labels(target);
    std::size_t C = ds.classes(target).size(), dim = ds.dim();
    std::size_t nf = static_cast<std::size_t>(folds.num_folds);

    EvalResult out;
    out.target = target;
    out.method = "logreg";
    out.predictions.assign(1, std::vector<int>(ds.size(), 0));
    std::vector<LogRegModel> fitted(nf);

    parallel_for(nf, num_threads, [&](std::size_t start, std::size_t end) {
        for (std::size_t f = start; f < end; ++f) {
            std::vector<double> x;
            std::vector<int> y;
            std::vector<char> present(C);
            std::size_t distinct = 0;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (static_cast<std::size_t>(folds.fold_of[i]) != f) {
                    auto v = ds.vector(i);
                    x.insert(x.end(), v.begin(), v.end());
                    y.push_back(labels[i]);
                    distinct += !present[labels[i]];
                    present[labels[i]] = 1;
                }
            }
            if (distinct < 2) {
                int only = y.empty() ? 0 : y.front();
                for (std::size_t i = 0; i < ds.size(); ++i) {
                    if (static_cast<std::size_t>(folds.fold_of[i]) == f) {
                        out.predictions[0][i] = only;
                    }
                }
                continue;
            }
            fitted[f] = logreg_fit(x, dim, y, C, opt);
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (static_cast<std::size_t>(folds.fold_of[i]) == f) {
                    out.predictions[0][i] = fitted[f].predict(ds.vector(i));
                }
            }
        }
    });

    eval_detail::summarize(out, labels, folds);
    if (models) {
        *models = std::move(fitted);
    }
    return out;
}

}

#endif
