#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace embrobust;
using testing_helpers::make_dataset;
using testing_helpers::random_dataset;

namespace {

double perplexity_of(const std::vector<double>& p) {
    double h = 0;
    for (auto v : p) {
        if (v > 0) {
            h -= v * std::log2(v);
        }
    }
    return std::exp2(h);
}

// Two Gaussian clusters centered on orthogonal axes; within-cluster variance is concentrated in two directions.
EmbeddingDataset two_clusters(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> v;
    std::vector<std::string> bio, conf;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(50, 0.0);
        int c = i % 2;
        x[c] = 10;
        for (int d = 0; d < 50; ++d) {
            x[d] += (d == 2 || d == 3 ? 1.0 : 0.1) * rng.normal();
        }
        v.push_back(x);
        bio.push_back(c ? "a" : "b");
        conf.push_back(i % 4 < 2 ? "x" : "y");
    }
    return make_dataset(v, bio, conf);
}

// Direct definition: full ranks in both spaces by sorting every pair list.
double oracle_trustworthiness(const EmbeddingDataset& ds, const std::vector<double>& y, std::size_t k) {
    std::size_t n = ds.size();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> hi, lo;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            hi.emplace_back(cosine_distance(ds.vector(i), ds.vector(j)), j);
            lo.emplace_back(std::hypot(y[2 * i] - y[2 * j], y[2 * i + 1] - y[2 * j + 1]), j);
        }
        std::sort(hi.begin(), hi.end());
        std::sort(lo.begin(), lo.end());
        std::vector<std::size_t> rank(n);
        for (std::size_t r = 0; r < hi.size(); ++r) {
            rank[hi[r].second] = r + 1;
        }
        for (std::size_t r = 0; r < k; ++r) {
            auto hr = rank[lo[r].second];
            if (hr > k) {
                total += double(hr - k);
            }
        }
    }
    return 1 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1)) * total;
}

}

TEST(Perplexity, EquidistantIsUniform) {
    std::vector<double> d{ 0.4, 0.4, 0.4 };
    auto row = perplexity_calibration(d, 3);
    for (auto p : row.p) {
        EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
    }
    EXPECT_TRUE(row.fallback);
    EXPECT_TRUE(perplexity_calibration(d, 2).fallback);
}

TEST(Perplexity, RandomRowsHitTarget) {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d(99);
        for (auto& v : d) {
            v = std::pow(rng.uniform() * 2, 2);
        }
        for (double target : { 5.0, 10.0, 30.0 }) {
            auto row = perplexity_calibration(d, target);
            EXPECT_FALSE(row.fallback);
            EXPECT_NEAR(perplexity_of(row.p), target, 1e-3);
            EXPECT_NEAR(row.achieved_perplexity, target, 1e-4);
            double sum = 0;
            for (auto p : row.p) {
                sum += p;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
            EXPECT_GT(row.sigma, 0);
            // Reconstruct the row from sigma.
            double beta = 1 / (2 * row.sigma * row.sigma), z = 0;
            double dmin = *std::min_element(d.begin(), d.end());
            for (auto v : d) {
                z += std::exp(-beta * (v - dmin));
            }
            EXPECT_NEAR(row.p[0], std::exp(-beta * (d[0] - dmin)) / z, 1e-9);
        }
    }
}

TEST(Perplexity, UnreachableTargetFallsBack) {
    std::vector<double> d{ 0.1, 0.5, 0.9, 1.3 };
    auto row = perplexity_calibration(d, 4);
    EXPECT_TRUE(row.fallback);
    EXPECT_NEAR(perplexity_of(row.p), 4.0, 1e-12);
    auto over = perplexity_calibration(d, 10);
    EXPECT_TRUE(over.fallback);
    EXPECT_THROW(perplexity_calibration(d, 0), std::invalid_argument);
}

TEST(Tsne, JointAffinitiesAreAProbabilityMatrix) {
    auto ds = random_dataset(3, 40, 6, 2, 2);
    std::size_t fallback = 99;
    auto P = joint_affinities(ds, 8, 1, &fallback);
    EXPECT_EQ(fallback, 0u);
    double sum = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_EQ(P[i * 40 + i], 0.0);
        for (std::size_t j = 0; j < 40; ++j) {
            EXPECT_EQ(P[i * 40 + j], P[j * 40 + i]);
            EXPECT_GE(P[i * 40 + j], 0.0);
            sum += P[i * 40 + j];
        }
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(joint_affinities(ds, 8, 3), P);
}

TEST(Tsne, GradientMatchesFiniteDifferences) {
    auto ds = random_dataset(8, 20, 5, 2, 2);
    auto P = joint_affinities(ds, 5);
    Rng rng(1);
    std::vector<double> y(40), grad(40);
    for (auto& v : y) {
        v = rng.normal();
    }
    tsne_objective(P, y, 1.0, grad);
    const double h = 1e-5;
    double worst = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        double keep = y[k];
        y[k] = keep + h;
        double up = tsne_objective(P, y);
        y[k] = keep - h;
        double down = tsne_objective(P, y);
        y[k] = keep;
        double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[k]) / std::max(std::abs(fd), std::abs(grad[k])));
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Tsne, ObjectiveMatchesDirectKl) {
    auto ds = random_dataset(9, 15, 4, 2, 2);
    auto P = joint_affinities(ds, 4);
    Rng rng(2);
    std::vector<double> y(30);
    for (auto& v : y) {
        v = rng.normal();
    }
    std::size_t n = 15;
    double Z = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                Z += 1 / (1 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2));
            }
        }
    }
    double kl = 0, kl4 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double p = P[i * n + j];
            if (i != j && p > 0) {
                double q = 1 / (1 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2)) / Z;
                kl += p * std::log(p / q);
                kl4 += 4 * p * std::log(4 * p / q);
            }
        }
    }
    EXPECT_NEAR(tsne_objective(P, y), kl, 1e-12);
    EXPECT_NEAR(tsne_objective(P, y, 4.0), kl4, 1e-11);
}

TEST(Tsne, TwoClustersSeparateAndStayTrustworthy) {
    auto ds = two_clusters(0);
    TsneConfig cfg;
    cfg.seed = 3;
    auto res = tsne(ds, cfg);
    EXPECT_EQ(nearest_centroid_accuracy(res.coords, ds.labels(Axis::bio), 2), 1.0);
    EXPECT_GT(trustworthiness(ds, res.coords, 12), 0.95);
    ASSERT_EQ(res.kl_trace.size(), 1000u);
    for (auto kl : res.kl_trace) {
        ASSERT_TRUE(std::isfinite(kl));
        ASSERT_GE(kl, 0.0);
    }
    EXPECT_LT(res.kl_trace.back(), res.kl_trace[250]);
    for (auto v : res.coords) {
        ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(Tsne, DeterministicAndThreadIndependent) {
    auto ds = random_dataset(5, 60, 8, 3, 3);
    TsneConfig cfg;
    cfg.perplexity = 10;
    cfg.iterations = 300;
    cfg.seed = 11;
    auto a = tsne(ds, cfg);
    auto b = tsne(ds, cfg);
    cfg.num_threads = 4;
    auto c = tsne(ds, cfg);
    EXPECT_EQ(a.coords, b.coords);
    EXPECT_EQ(a.coords, c.coords);
    EXPECT_EQ(a.kl_trace, c.kl_trace);
    EXPECT_EQ(coords_csv(ds, a.coords), coords_csv(ds, b.coords));
    cfg.seed = 12;
    EXPECT_NE(tsne(ds, cfg).coords, a.coords);
}

TEST(Tsne, ConfigValidation) {
    auto small = random_dataset(1, 9, 3, 2, 2);
    EXPECT_THROW(tsne(small), PreconditionError);
    auto ds = random_dataset(1, 40, 3, 2, 2);
    TsneConfig cfg;
    cfg.perplexity = 13;
    EXPECT_THROW(tsne(ds, cfg), std::invalid_argument);
    cfg.perplexity = 5;
    cfg.iterations = 100;
    EXPECT_THROW(tsne(ds, cfg), std::invalid_argument);
}

TEST(Trustworthiness, LosslessProjectionIsOne) {
    Rng rng(6);
    std::vector<std::vector<double>> v;
    std::vector<double> coords;
    for (int i = 0; i < 60; ++i) {
        double a = rng.normal(), b = rng.normal();
        v.push_back({ a, b, 0, 0, 0 });
        coords.push_back(a);
        coords.push_back(b);
    }
    auto ds = make_dataset(v, std::vector<std::string>(60, "a"), std::vector<std::string>(60, "x"));
    EXPECT_EQ(trustworthiness(ds, coords, 12, Metric::euclidean), 1.0);
    EXPECT_THROW(trustworthiness(ds, coords, 30), std::invalid_argument);
}

TEST(Trustworthiness, MatchesDirectDefinition) {
    auto ds = random_dataset(7, 80, 6, 2, 2);
    Rng rng(8);
    std::vector<double> y(160);
    for (std::size_t i = 0; i < 80; ++i) {
        y[2 * i] = ds.vector(i)[0] + 0.3 * rng.normal();
        y[2 * i + 1] = ds.vector(i)[1] + 0.3 * rng.normal();
    }
    for (std::size_t k : { 1, 5, 12, 30 }) {
        EXPECT_NEAR(trustworthiness(ds, y, k), oracle_trustworthiness(ds, y, k), 1e-12) << k;
    }
}

TEST(Trustworthiness, RigidMotionInvariance) {
    auto ds = two_clusters(1);
    TsneConfig cfg;
    cfg.iterations = 400;
    auto res = tsne(ds, cfg);
    double c = std::cos(0.7), s = std::sin(0.7);
    std::vector<double> moved(res.coords.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double x = res.coords[2 * i], y = res.coords[2 * i + 1];
        moved[2 * i] = c * x - s * y + 3.0;
        moved[2 * i + 1] = s * x + c * y - 5.0;
    }
    EXPECT_NEAR(trustworthiness(ds, moved, 12), trustworthiness(ds, res.coords, 12), 1e-12);
    EXPECT_EQ(nearest_centroid_accuracy(moved, ds.labels(Axis::bio), 2), nearest_centroid_accuracy(res.coords, ds.labels(Axis::bio), 2));

    auto flat = [&](const std::vector<double>& xy) {
        std::vector<SampleRecord> r;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            auto rec = ds.record(i);
            rec.vector = { xy[2 * i], xy[2 * i + 1] };
            r.push_back(rec);
        }
        return EmbeddingDataset(r);
    };
    auto a = flat(res.coords), b = flat(moved);
    auto folds = assign_folds(a, 5, 0);
    for (auto axis : { Axis::bio, Axis::conf }) {
        auto ka = knn_predict(a, build_neighbor_table(a, NeighborOptions{ Metric::euclidean, false, 1 }), folds, axis, 3);
        auto kb = knn_predict(b, build_neighbor_table(b, NeighborOptions{ Metric::euclidean, false, 1 }), folds, axis, 3);
        EXPECT_EQ(ka.accuracy_mean, kb.accuracy_mean);
    }
}

TEST(NearestCentroid, SimpleLayout) {
    std::vector<double> coords{ 0, 0, 0.1, 0, 5, 5, 5.1, 5, 0.2, 0.1 };
    std::vector<int> labels{ 0, 0, 1, 1, 1 };
    // Centroid of class 1 is (3.43, 3.37); the last point sits nearer class 0.
    EXPECT_DOUBLE_EQ(nearest_centroid_accuracy(coords, labels, 2), 0.8);
}
