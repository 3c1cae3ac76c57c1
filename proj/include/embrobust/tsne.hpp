#ifndef EMBROBUST_TSNE_HPP
#define EMBROBUST_TSNE_HPP

#include "dataset.hpp"
#include "neighbors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file tsne.hpp
 *
 * @brief Exact t-SNE projection to 2D, plus projection diagnostics.
 *
 * High-dimensional affinities use squared cosine distances, matching the rest of the toolkit.
 */

namespace embrobust {

/**
 * @brief Conditional distribution over the other samples for one row.
 */
struct PerplexityRow {
    /** Gaussian bandwidth; infinite when the uniform fallback was used. */
    double sigma = 0;
    std::vector<double> p;
    /** `2^H(p)`. */
    double achieved_perplexity = 0;
    /** The target could not be matched: the row is uniform (degenerate input) or the closest reachable distribution. */
    bool fallback = false;
};

/**
 * Binary search on the Gaussian precision \f$\beta = 1 / (2 \sigma^2)\f$ so that \f$p_j \propto \exp(-\beta d_j)\f$ has perplexity
 * `target` within `tolerance` (at most 64 bisection steps once the target is bracketed).
 *
 * @param sq_distances Squared distances from the sample to every other sample.
 *
 * A row whose distances are all equal, or a target of at least the row length, cannot be matched by any bandwidth;
 * the row is then uniform and flagged as a fallback.
 */
inline PerplexityRow perplexity_calibration(std::span<const double> sq_distances, double target, double tolerance = 1e-4) {
    std::size_t m = sq_distances.size();
    if (m == 0 || !(target > 0)) {
        throw std::invalid_argument("perplexity_calibration: need a non-empty row and a positive target");
    }
    PerplexityRow out;
    out.p.resize(m);

    double dmin = *std::min_element(sq_distances.begin(), sq_distances.end());
    double dmax = *std::max_element(sq_distances.begin(), sq_distances.end());
    if (dmax == dmin || target >= static_cast<double>(m)) {
        std::fill(out.p.begin(), out.p.end(), 1.0 / static_cast<double>(m));
        out.sigma = std::numeric_limits<double>::infinity();
        out.achieved_perplexity = static_cast<double>(m);
        out.fallback = true;
        return out;
    }

    // Entropy (bits) of the row for a given beta, filling out.p.
    auto entropy = [&](double beta) {
        double sum = 0;
        for (std::size_t j = 0; j < m; ++j) {
            out.p[j] = std::exp(-beta * (sq_distances[j] - dmin));
            sum += out.p[j];
        }
        double h = 0;
        for (std::size_t j = 0; j < m; ++j) {
            out.p[j] /= sum;
            if (out.p[j] > 0) {
                h -= out.p[j] * std::log2(out.p[j]);
            }
        }
        return h;
    };

    double lo = 0, hi = std::numeric_limits<double>::infinity(), beta = 1.0, h = 0;
    int bisections = 0;
    while (true) {
        h = entropy(beta);
        double perp = std::exp2(h);
        if (std::abs(perp - target) < tolerance) {
            break;
        }
        (perp > target ? lo : hi) = beta;
        if (std::isinf(hi)) {
            if (beta > 1e300) {
                out.fallback = true;
                break;
            }
            beta *= 2;
        } else {
            if (bisections++ >= 64) {
                out.fallback = true;
                break;
            }
            beta = 0.5 * (lo + hi);
        }
    }

    out.sigma = std::sqrt(1.0 / (2.0 * beta));
    out.achieved_perplexity = std::exp2(h);
    return out;
}

/**
 * @brief t-SNE hyperparameters; all of them are echoed into the result.
 */
struct TsneConfig {
    double perplexity = 30;
    int iterations = 1000;
    double early_exaggeration = 12;
    int exaggeration_iterations = 250;
    double learning_rate = 200;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    std::uint64_t seed = 0;
    int num_threads = 1;
};

struct ProjectionResult {
    /** Row-major `n * 2`. */
    std::vector<double> coords;
    /** KL(P || Q) at the start of each iteration, with the unexaggerated P. */
    std::vector<double> kl_trace;
    TsneConfig config;
    /** Rows whose perplexity could not be matched. */
    std::size_t fallback_rows = 0;
};

/**
 * @return Symmetrized joint affinities `(p_{j|i} + p_{i|j}) / (2n)`, row-major `n * n` with a zero diagonal.
 */
inline std::vector<double> joint_affinities(const EmbeddingDataset& ds, double perplexity, int num_threads = 1, std::size_t* fallback_rows = nullptr) {
    std::size_t n = ds.size();
    auto nt = build_neighbor_table(ds, NeighborOptions{ Metric::cosine, false, num_threads });
    std::vector<double> cond(n * n, 0.0);
    std::vector<char> flagged(n, 0);

    parallel_for(n, num_threads, [&](std::size_t start, std::size_t end) {
        std::vector<double> sq(n - 1);
        for (std::size_t i = start; i < end; ++i) {
            auto ord = nt.order(i);
            auto dist = nt.dist(i);
            for (std::size_t j = 0; j < n - 1; ++j) {
                sq[j] = dist[j] * dist[j];
            }
            auto row = perplexity_calibration(sq, perplexity);
            flagged[i] = row.fallback;
            for (std::size_t j = 0; j < n - 1; ++j) {
                cond[i * n + ord[j]] = row.p[j];
            }
        }
    });

    std::vector<double> out(n * n, 0.0);
    double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = (cond[i * n + j] + cond[j * n + i]) * scale;
        }
    }
    if (fallback_rows) {
        *fallback_rows = static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
    }
    return out;
}

namespace tsne_detail {

inline double sum_p_log_p(std::span<const double> P) {
    double out = 0;
    for (auto p : P) {
        if (p > 0) {
            out += p * std::log(p);
        }
    }
    return out;
}

/**
 * Objective and gradient with \f$\sum P \log P\f$ supplied, so each call needs one logarithm per pair.
 * Uses \f$KL(eP \| Q) = e (\sum P \log P + \log e + \sum P \log(1 + d^2) + \log Z)\f$ for P summing to 1.
 */
inline double objective(std::span<const double> P, double p_log_p, std::span<const double> y, double exaggeration, std::span<double> grad, int num_threads) {
    std::size_t n = y.size() / 2;
    std::vector<double> row_z(n, 0.0);
    parallel_for(n, num_threads, [&](std::size_t start, std::size_t end) {
        for (std::size_t i = start; i < end; ++i) {
            double acc = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
                    acc += 1.0 / (1.0 + dx * dx + dy * dy);
                }
            }
            row_z[i] = acc;
        }
    });
    double Z = 0;
    for (auto z : row_z) {
        Z += z;
    }

    std::vector<double> row_cross(n, 0.0), row_mass(n, 0.0);
    parallel_for(n, num_threads, [&](std::size_t start, std::size_t end) {
        for (std::size_t i = start; i < end; ++i) {
            double cross = 0, mass = 0, gx = 0, gy = 0;
            const double* prow = P.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
                double d2 = dx * dx + dy * dy;
                double num = 1.0 / (1.0 + d2);
                double p = prow[j];
                if (p > 0) {
                    cross += p * std::log1p(d2);
                    mass += p;
                }
                if (!grad.empty()) {
                    double mult = (exaggeration * p - num / Z) * num;
                    gx += mult * dx;
                    gy += mult * dy;
                }
            }
            row_cross[i] = cross;
            row_mass[i] = mass;
            if (!grad.empty()) {
                grad[2 * i] = 4 * gx;
                grad[2 * i + 1] = 4 * gy;
            }
        }
    });
    double cross = 0, mass = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cross += row_cross[i];
        mass += row_mass[i];
    }
    double e = exaggeration;
    return e * (p_log_p + mass * std::log(e) + cross + mass * std::log(Z));
}

}

/**
 * KL(exaggeration * P || Q) for 2D coordinates `y` (row-major `n * 2`) under the Student-t kernel, and optionally the update gradient
 * \f$4 \sum_j (e P_{ij} - Q_{ij}) (1 + \|y_i - y_j\|^2)^{-1} (y_i - y_j)\f$.
 * With `exaggeration == 1` the value is the usual t-SNE objective and the gradient is its exact derivative.
 * Rows are distributed over workers and partial sums are combined in row order, so the result does not depend on the worker count.
 */
inline double tsne_objective(std::span<const double> P, std::span<const double> y, double exaggeration = 1.0, std::span<double> grad = {}, int num_threads = 1) {
    return tsne_detail::objective(P, tsne_detail::sum_p_log_p(P), y, exaggeration, grad, num_threads);
}

/**
 * @brief Non-finite KL divergence during optimization.
 */
class NonFiniteKlError : public std::runtime_error {
public:
    explicit NonFiniteKlError(int iteration) :
        std::runtime_error("t-SNE: non-finite KL divergence at iteration " + std::to_string(iteration)), iteration(iteration) {}

    int iteration;
};

/**
 * Optimize 2D coordinates with the exact (O(n^2)) t-SNE gradient.
 *
 * Start from isotropic Gaussian coordinates with standard deviation 1e-4, drawn from `cfg.seed`.
 * Each iteration takes a momentum step with per-coordinate adaptive gains; P is exaggerated for the first
 * `cfg.exaggeration_iterations` iterations, and the coordinates are re-centered after every step.
 * No label information is used.
 */
inline ProjectionResult tsne(const EmbeddingDataset& ds, const TsneConfig& cfg = {}) {
    std::size_t n = ds.size();
    if (n < 10) {
        throw PreconditionError("t-SNE needs at least 10 samples, got " + std::to_string(n));
    }
    if (!(cfg.perplexity > 0) || cfg.perplexity >= static_cast<double>(n - 1) / 3.0) {
        throw std::invalid_argument("t-SNE: perplexity must lie in (0, (n - 1) / 3)");
    }
    if (cfg.iterations < cfg.exaggeration_iterations || cfg.exaggeration_iterations < 0) {
        throw std::invalid_argument("t-SNE: iterations must be at least the exaggeration duration");
    }

    ProjectionResult out;
    out.config = cfg;
    auto P = joint_affinities(ds, cfg.perplexity, cfg.num_threads, &out.fallback_rows);

    Rng rng(cfg.seed);
    std::vector<double> y(2 * n), update(2 * n, 0.0), gains(2 * n, 1.0), grad(2 * n);
    for (auto& v : y) {
        v = 1e-4 * rng.normal();
    }

    double p_log_p = tsne_detail::sum_p_log_p(P);
    out.kl_trace.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        double factor = iter < cfg.exaggeration_iterations ? cfg.early_exaggeration : 1.0;
        double objective = tsne_detail::objective(P, p_log_p, y, factor, grad, cfg.num_threads);
        // Undo the exaggeration: KL(eP || Q) = e (KL(P || Q) + log e) when P sums to 1.
        double kl = objective / factor - std::log(factor);
        if (!std::isfinite(kl)) {
            throw NonFiniteKlError(iter);
        }
        out.kl_trace.push_back(std::max(kl, 0.0));

        double momentum = iter < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
        for (std::size_t k = 0; k < 2 * n; ++k) {
            bool same_sign = (grad[k] > 0) == (update[k] > 0);
            gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
            update[k] = momentum * update[k] - cfg.learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += y[2 * i];
            my += y[2 * i + 1];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[2 * i] -= mx;
            y[2 * i + 1] -= my;
        }
    }

    out.coords = std::move(y);
    return out;
}

/**
 * Trustworthiness of a 2D layout at neighborhood size `k`:
 * \f$1 - \frac{2}{n k (2n - 3k - 1)} \sum_i \sum_{j \in U_k(i)} (r(i, j) - k)\f$,
 * where \f$U_k(i)\f$ holds the 2D k-nearest neighbors of `i` that are not among its original-space k-nearest neighbors,
 * and \f$r(i, j)\f$ is the original-space rank of `j`. 2D distances are Euclidean; ties go to the lower index in both spaces.
 */
inline double trustworthiness(const EmbeddingDataset& ds, std::span<const double> coords, std::size_t k, Metric metric = Metric::cosine, int num_threads = 1) {
    std::size_t n = ds.size();
    if (coords.size() != 2 * n) {
        throw std::invalid_argument("trustworthiness: expected n * 2 coordinates");
    }
    if (k < 1 || 2 * k >= n) {
        throw std::invalid_argument("trustworthiness: need 1 <= k < n / 2");
    }
    auto high = build_neighbor_table(ds, NeighborOptions{ metric, false, num_threads });

    std::vector<double> penalty(n, 0.0);
    parallel_for(n, num_threads, [&](std::size_t start, std::size_t end) {
        std::vector<std::size_t> rank(n);
        std::vector<double> d2(n);
        std::vector<std::uint32_t> low(n - 1);
        for (std::size_t i = start; i < end; ++i) {
            auto ord = high.order(i);
            for (std::size_t r = 0; r < ord.size(); ++r) {
                rank[ord[r]] = r + 1;
            }
            std::size_t pos = 0;
            for (std::size_t j = 0; j < n; ++j) {
                double dx = coords[2 * i] - coords[2 * j], dy = coords[2 * i + 1] - coords[2 * j + 1];
                d2[j] = dx * dx + dy * dy;
                if (j != i) {
                    low[pos++] = static_cast<std::uint32_t>(j);
                }
            }
            std::partial_sort(low.begin(), low.begin() + static_cast<std::ptrdiff_t>(k), low.end(), [&](std::uint32_t a, std::uint32_t b) {
                return d2[a] < d2[b] || (d2[a] == d2[b] && a < b);
            });
            double acc = 0;
            for (std::size_t r = 0; r < k; ++r) {
                auto hr = rank[low[r]];
                if (hr > k) {
                    acc += static_cast<double>(hr - k);
                }
            }
            penalty[i] = acc;
        }
    });

    double total = 0;
    for (auto p : penalty) {
        total += p;
    }
    double nn = static_cast<double>(n), kk = static_cast<double>(k);
    return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * total;
}

/**
 * @return Fraction of samples whose nearest label centroid in 2D is their own label's centroid.
 */
inline double nearest_centroid_accuracy(std::span<const double> coords, std::span<const int> labels, std::size_t num_classes) {
    std::size_t n = labels.size();
    std::vector<double> cx(num_classes, 0), cy(num_classes, 0), cnt(num_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        cx[labels[i]] += coords[2 * i];
        cy[labels[i]] += coords[2 * i + 1];
        cnt[labels[i]] += 1;
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (cnt[c] > 0) {
            cx[c] /= cnt[c];
            cy[c] /= cnt[c];
        }
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (cnt[c] == 0) {
                continue;
            }
            double dx = coords[2 * i] - cx[c], dy = coords[2 * i + 1] - cy[c];
            double d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        correct += (static_cast<int>(best) == labels[i]);
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}

#endif
