// Acceptance checks: prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include "helpers.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

using namespace embrobust;
using testing_helpers::balanced_spec;
using testing_helpers::make_dataset;
using testing_helpers::random_dataset;
using testing_helpers::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

NeighborTable table(const EmbeddingDataset& ds, Metric metric = Metric::cosine) {
    NeighborOptions opt;
    opt.metric = metric;
    opt.num_threads = 1;
    return build_neighbor_table(ds, opt);
}

double raw_cosine_distance(const EmbeddingDataset& ds, std::size_t a, std::size_t b) {
    double dot = 0, aa = 0, bb = 0;
    for (std::size_t d = 0; d < ds.dim(); ++d) {
        dot += ds.vector(a)[d] * ds.vector(b)[d];
        aa += ds.vector(a)[d] * ds.vector(a)[d];
        bb += ds.vector(b)[d] * ds.vector(b)[d];
    }
    return 1.0 - dot / std::sqrt(aa * bb);
}

// ---------------------------------------------------------------------------------------------
// 1: index against a double loop over raw vectors.

struct PairCounts {
    std::uint64_t num = 0, den = 0;
};

// For every ordered pair (i, j), the number of other samples ranked ahead of j from i.
// j is among the k nearest of i when fewer than k samples are ahead.
std::vector<std::size_t> ahead_counts(const EmbeddingDataset& ds) {
    std::size_t n = ds.size();
    std::vector<std::size_t> ahead(n * n, 0);
    std::vector<double> di(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            di[j] = raw_cosine_distance(ds, i, j);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            std::size_t count = 0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l != i && l != j && (di[l] < di[j] || (di[l] == di[j] && l < j))) {
                    ++count;
                }
            }
            ahead[i * n + j] = count;
        }
    }
    return ahead;
}

PairCounts oracle_counts(const EmbeddingDataset& ds, const std::vector<std::size_t>& ahead, std::size_t k) {
    std::size_t n = ds.size();
    PairCounts out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && ahead[i * n + j] < k) {
                out.num += ds.bio_label(i) == ds.bio_label(j);
                out.den += ds.conf_label(i) == ds.conf_label(j);
            }
        }
    }
    return out;
}

// Random data; odd seeds duplicate a quarter of the rows to force exact distance ties.
EmbeddingDataset criterion1_dataset(std::uint64_t seed) {
    Rng rng(derive_seed(1000, seed));
    std::size_t n = 20 + rng.below(181), dim = 2 + rng.below(15);
    auto base = random_dataset(seed, n, dim, 2 + rng.below(4), 2 + rng.below(4));
    if (seed % 2 == 0) {
        return base;
    }
    std::vector<SampleRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        records.push_back(base.record(i));
    }
    for (std::size_t i = 0; i < n / 4; ++i) {
        records[n - 1 - i].vector = records[rng.below(n / 2)].vector;
    }
    return EmbeddingDataset(std::move(records));
}

void criterion1(Outcome& o) {
    auto start = std::chrono::steady_clock::now();
    std::size_t comparisons = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto ds = criterion1_dataset(seed);
        auto nt = table(ds);
        auto ahead = ahead_counts(ds);
        for (std::size_t k : { std::size_t(1), std::size_t(5), std::size_t(17), std::min<std::size_t>(50, ds.size() - 1), ds.size() - 1 }) {
            PairCounts want = oracle_counts(ds, ahead, k);
            if (want.den == 0) {
                continue;
            }
            auto got = robustness_index(ds, nt, k);
            double want_r = static_cast<double>(want.num) / static_cast<double>(want.den);
            o.require(got.numerator == want.num && got.denominator == want.den && got.r_k == want_r,
                      "seed " + std::to_string(seed) + " k " + std::to_string(k));
            ++comparisons;
        }
    }
    double elapsed = seconds_since(start);
    o.require(elapsed < 5.0, "runtime");
    o.detail << comparisons << " (dataset, k) pairs match the double loop exactly; " << elapsed << " s";
}

// ---------------------------------------------------------------------------------------------
// 2: identical label axes.

void criterion2(Outcome& o) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto base = random_dataset(50 + seed, 120, 8, 4, 4);
        std::vector<SampleRecord> records;
        for (std::size_t i = 0; i < base.size(); ++i) {
            auto r = base.record(i);
            r.conf_label = r.bio_label;
            records.push_back(r);
        }
        EmbeddingDataset ds(std::move(records));
        auto nt = table(ds);
        for (std::size_t k : { 1, 10, 50 }) {
            auto r = robustness_index(ds, nt, k);
            o.require(r.r_k == 1.0, "seed " + std::to_string(seed) + " k " + std::to_string(k));
            ++checked;
        }
    }
    o.detail << checked << " indices equal 1 exactly";
}

// ---------------------------------------------------------------------------------------------
// 3: center-blind data sits at chance.

void criterion3(Outcome& o) {
    auto ds = generate(balanced_spec(5, 5, 40, 32, 0.15, 0.0, 0.2, 1));
    auto restricted = restrict_for_confounders(ds);
    auto nt = table(restricted.data);
    RepeatedKnnOptions opt;
    opt.seed = 1;
    opt.reps = 5;
    auto report = confounder_analysis(restricted.data, nt, opt);
    o.require(restricted.data.size() == 1000, "n = 1000");
    o.require(std::abs(report.chance_level - 0.2) < 1e-15, "chance level 1/5");
    double worst = 0;
    for (std::size_t g = 0; g < report.k_grid.size(); ++g) {
        o.require(report.frac_same_center[g].has_value(), "defined at k " + std::to_string(report.k_grid[g]));
        if (report.frac_same_center[g]) {
            worst = std::max(worst, std::abs(*report.frac_same_center[g] - 0.2));
        }
    }
    o.require(worst <= 0.05, "within 0.05");
    o.detail << report.k_grid.size() << " grid points, max |frac - 0.2| = " << worst;
}

// ---------------------------------------------------------------------------------------------
// 4: index ordering under confounder strength.

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void criterion4(Outcome& o) {
    const double alpha = 1.0, sigma = 0.1;
    auto medians_for = [&](double a, double b, RobustnessBounds* bounds) {
        std::vector<double> values;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto ds = generate(balanced_spec(5, 5, 40, 32, a, b, sigma, 400 + seed));
            values.push_back(robustness_index(ds, table(ds), 50).r_k);
            if (bounds) {
                *bounds = robustness_bounds(ds);
            }
        }
        return median(values);
    };
    RobustnessBounds bounds{};
    double m0 = medians_for(alpha, 0.0, &bounds);
    double m_half = medians_for(alpha, alpha / 2, nullptr);
    double m_two = medians_for(alpha, 2 * alpha, nullptr);
    double m_conf = medians_for(0.0, alpha, nullptr);
    o.require(m0 > m_half && m_half > m_two, "strictly decreasing");
    o.require(std::abs(m0 / bounds.r_max - 1) <= 0.05, "beta = 0 near r_max");
    o.require(std::abs(m_conf / bounds.r_min - 1) <= 0.05, "alpha = 0 near r_min");
    o.detail << "median r_50: beta=0 " << m0 << " (r_max " << bounds.r_max << "), beta=a/2 " << m_half << ", beta=2a " << m_two << "; alpha=0 " << m_conf << " (r_min "
             << bounds.r_min << ")";
}

// ---------------------------------------------------------------------------------------------
// 5: kNN predictions against a per-query recomputation.

int oracle_knn(const EmbeddingDataset& ds, const FoldAssignment& folds, std::size_t i, std::size_t k, Axis axis) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < ds.size(); ++j) {
        if (folds.fold_of[j] != folds.fold_of[i]) {
            cand.emplace_back(raw_cosine_distance(ds, i, j), j);
        }
    }
    std::sort(cand.begin(), cand.end());
    auto labels = ds.labels(axis);
    std::map<int, int> votes;
    int top = 0;
    for (std::size_t r = 0; r < k; ++r) {
        top = std::max(top, ++votes[labels[cand[r].second]]);
    }
    for (std::size_t r = 0; r < k; ++r) {
        if (votes[labels[cand[r].second]] == top) {
            return labels[cand[r].second];
        }
    }
    return -1;
}

void criterion5(Outcome& o) {
    std::size_t compared = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto ds = random_dataset(500 + seed, 60, 6, 3, 4);
        auto folds = assign_folds(ds, 5, seed);
        auto nt = table(ds);
        for (auto axis : { Axis::bio, Axis::conf }) {
            auto r = knn_predict(ds, nt, folds, axis, 3);
            for (std::size_t i = 0; i < ds.size(); ++i) {
                o.require(r.predictions[0][i] == oracle_knn(ds, folds, i, 3, axis), "seed " + std::to_string(seed) + " sample " + std::to_string(i));
                ++compared;
            }
        }
    }
    o.detail << compared << " validation predictions equal the recomputation";
}

// ---------------------------------------------------------------------------------------------
// 6: logistic regression.

void criterion6(Outcome& o) {
    Rng rng(6);
    const std::size_t n = 40, dim = 10, C = 5;
    std::vector<double> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        y.push_back(static_cast<int>(i % C));
        for (std::size_t d = 0; d < dim; ++d) {
            x.push_back(rng.normal() + (d == i % C ? 1.0 : 0.0));
        }
    }
    std::vector<double> w(C * dim), b(C), gw(C * dim), gb(C);
    for (auto& v : w) {
        v = 0.5 * rng.normal();
    }
    for (auto& v : b) {
        v = 0.5 * rng.normal();
    }
    const double lambda = 1e-3, h = 1e-5;
    logreg_objective(x, dim, y, C, lambda, w, b, gw, gb);
    double worst = 0;
    auto check = [&](std::vector<double>& param, std::size_t k, double analytic) {
        double keep = param[k];
        param[k] = keep + h;
        double up = logreg_objective(x, dim, y, C, lambda, w, b);
        param[k] = keep - h;
        double down = logreg_objective(x, dim, y, C, lambda, w, b);
        param[k] = keep;
        double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(fd), std::abs(analytic)));
    };
    for (std::size_t k = 0; k < w.size(); ++k) {
        check(w, k, gw[k]);
    }
    for (std::size_t c = 0; c < C; ++c) {
        check(b, c, gb[c]);
    }
    o.require(worst < 1e-4, "gradient");

    auto model = logreg_fit(x, dim, y, C);
    bool monotone = model.loss_trace.size() > 1;
    for (std::size_t t = 1; t < model.loss_trace.size(); ++t) {
        monotone = monotone && model.loss_trace[t] <= model.loss_trace[t - 1];
    }
    o.require(monotone, "loss non-increasing");

    std::vector<double> sx{ 0, 0, 0.2, 0.1, 0.1, 0.3, 0.3, 0.2, 1, 1, 1.2, 0.9, 0.9, 1.3, 1.1, 1.1 };
    std::vector<int> sy{ 0, 0, 0, 0, 1, 1, 1, 1 };
    auto sep = logreg_fit(sx, 2, sy, 2);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < sy.size(); ++i) {
        correct += sep.predict(std::span<const double>(sx).subspan(2 * i, 2)) == sy[i];
    }
    o.require(correct == sy.size(), "separable training accuracy");

    auto clusters = generate(balanced_spec(4, 3, 15, 20, 3.0, 0.0, 0.1, 6));
    auto cv = logreg_cv(clusters, assign_folds(clusters, 5, 0), Axis::bio);
    o.require(cv.accuracy_mean[0] == 1.0 && cv.accuracy_std[0] == 0.0, "cross-validated accuracy");
    o.detail << "max FD rel. error " << worst << "; " << model.loss_trace.size() << " monotone losses; separable " << correct << "/" << sy.size()
             << "; CV accuracy " << cv.accuracy_mean[0] << " +- " << cv.accuracy_std[0];
}

// ---------------------------------------------------------------------------------------------
// 7: t-SNE.

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

void criterion7(Outcome& o) {
    auto ds = two_clusters(0);
    const double perplexity = 30;
    double worst_h = 0;
    std::size_t fallbacks = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::vector<double> d;
        for (std::size_t j = 0; j < ds.size(); ++j) {
            if (j != i) {
                double c = raw_cosine_distance(ds, i, j);
                d.push_back(c * c);
            }
        }
        auto row = perplexity_calibration(d, perplexity);
        fallbacks += row.fallback;
        double h = 0;
        for (auto p : row.p) {
            h -= p > 0 ? p * std::log2(p) : 0;
        }
        worst_h = std::max(worst_h, std::abs(h - std::log2(perplexity)));
    }
    o.require(fallbacks == 0 && worst_h < 1e-3, "perplexity calibration");

    auto small = random_dataset(8, 20, 5, 2, 2);
    auto P = joint_affinities(small, 5);
    Rng rng(1);
    std::vector<double> y(40), grad(40);
    for (auto& v : y) {
        v = rng.normal();
    }
    tsne_objective(P, y, 1.0, grad);
    double worst_g = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double h = 1e-5;
        double keep = y[k];
        y[k] = keep + h;
        double up = tsne_objective(P, y);
        y[k] = keep - h;
        double down = tsne_objective(P, y);
        y[k] = keep;
        double fd = (up - down) / (2 * h);
        worst_g = std::max(worst_g, std::abs(fd - grad[k]) / std::max(std::abs(fd), std::abs(grad[k])));
    }
    o.require(worst_g < 1e-4, "KL gradient");

    TsneConfig cfg;
    cfg.seed = 3;
    auto a = tsne(ds, cfg);
    auto b = tsne(ds, cfg);
    double nca = nearest_centroid_accuracy(a.coords, ds.labels(Axis::bio), 2);
    double trust = trustworthiness(ds, a.coords, 12);
    bool identical = coords_csv(ds, a.coords) == coords_csv(ds, b.coords);
    o.require(nca == 1.0, "nearest-centroid accuracy");
    o.require(trust > 0.95, "trustworthiness");
    o.require(identical, "byte-identical coords");
    o.detail << "max entropy error " << worst_h << " bits; max FD rel. error " << worst_g << "; centroid accuracy " << nca << "; T(12) " << trust
             << "; reruns identical " << (identical ? "yes" : "no");
}

// ---------------------------------------------------------------------------------------------
// 8: curves and label swap.

void criterion8(Outcome& o) {
    double worst_curve = 0, worst_swap = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto ds = seed < 5 ? random_dataset(800 + seed, 150, 12, 3, 5) : generate(balanced_spec(3, 4, 12, 16, 1.0, 0.7, 0.3, seed));
        auto nt = table(ds);
        auto fc = frequency_curves(ds, nt);
        for (std::size_t k : { 1, 7, 50 }) {
            auto r = robustness_index(ds, nt, k);
            double num = 0, den = 0;
            for (std::size_t j = 0; j < k; ++j) {
                num += fc.f_bio[j];
                den += fc.f_conf[j];
            }
            worst_curve = std::max(worst_curve, std::abs(num / den - r.r_k) / r.r_k);

            std::vector<SampleRecord> swapped;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                auto rec = ds.record(i);
                std::swap(rec.bio_label, rec.conf_label);
                swapped.push_back(rec);
            }
            EmbeddingDataset sw(std::move(swapped));
            auto rs = robustness_index(sw, table(sw), k);
            worst_swap = std::max(worst_swap, std::abs(rs.r_k * r.r_k - 1));
        }
    }
    o.require(worst_curve <= 1e-12, "curves");
    o.require(worst_swap <= 1e-12, "label swap");
    o.detail << "max rel. error from curves " << worst_curve << "; max |r * r_swapped - 1| " << worst_swap;
}

// ---------------------------------------------------------------------------------------------
// 9: end to end through the command line.

int run_cli(const std::string& args) {
    std::string cmd = std::string(EMBROBUST_CLI_PATH) + " " + args + " > /dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    return io_detail::read_file(p);
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t out = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) {
        ++out;
    }
    return out;
}

std::vector<std::string> point_positions(const std::string& text, std::vector<std::string>* colors) {
    std::regex re("class=\"point\" cx=\"([^\"]*)\" cy=\"([^\"]*)\" r=\"[^\"]*\" fill=\"([^\"]*)\"");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back((*it)[1].str() + "," + (*it)[2].str());
        if (colors) {
            colors->push_back((*it)[3]);
        }
    }
    return out;
}

bool pipeline(const fs::path& root, Outcome& o) {
    auto data = root / "data";
    if (run_cli("synth --layout tcga2k --per-cell 100 --dim 768 --seed 7 --out-dir " + data.string()) != 0) {
        o.require(false, "synth");
        return false;
    }
    std::string in = "--manifest " + (data / "manifest.csv").string() + " --embeddings " + (data / "embeddings.bin").string() + " --seed 7";
    struct Step {
        std::string name, args;
    };
    std::vector<Step> steps{
        { "index", "index " + in },
        { "curves", "curves " + in },
        { "confounders", "confounders " + in },
        { "tsne", "tsne " + in },
        { "eval", "eval " + in + " --coords " + (root / "tsne" / "tsne_coords.csv").string() },
        { "relation", "relation " + in },
    };
    for (const auto& s : steps) {
        int code = run_cli(s.args + " --out-dir " + (root / s.name).string());
        if (code != 0) {
            o.require(false, s.name + " exited with " + std::to_string(code));
            return false;
        }
    }
    return true;
}

void criterion9(Outcome& o) {
    TempDir dir("acceptance_e2e");
    auto start = std::chrono::steady_clock::now();
    bool ok = pipeline(dir.path / "a", o);
    double elapsed = seconds_since(start);
    if (!ok) {
        return;
    }
    o.require(elapsed < 600, "runtime under 10 minutes");
    if (!pipeline(dir.path / "b", o)) {
        return;
    }

    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir.path / "a")) {
        auto ext = entry.path().extension();
        if (!entry.is_regular_file() || (ext != ".json" && ext != ".csv" && ext != ".bin")) {
            continue;
        }
        auto other = dir.path / "b" / fs::relative(entry.path(), dir.path / "a");
        auto text_a = slurp(entry.path());
        auto text_b = slurp(other);
        // Input paths differ between the two runs by the run directory only.
        const std::string from = (dir.path / "b").string(), to = (dir.path / "a").string();
        for (auto pos = text_b.find(from); pos != std::string::npos; pos = text_b.find(from, pos + to.size())) {
            text_b.replace(pos, from.size(), to);
        }
        ++compared;
        if (text_a != text_b) {
            ++differing;
            o.require(false, "rerun differs: " + fs::relative(entry.path(), dir.path / "a").string());
        }
    }

    auto root = dir.path / "a";
    auto ds = load_dataset(root / "data" / "manifest.csv", root / "data" / "embeddings.bin");
    o.require(ds.size() == 2000 && ds.dim() == 768, "n = 2000, d = 768");

    auto index_svg = slurp(root / "index" / "robustness_index.svg");
    o.require(count(index_svg, "class=\"bar\"") == 1 && count(index_svg, "class=\"rule\"") == 1, "index chart");
    auto curves_svg = slurp(root / "curves" / "frequency_curves.svg");
    o.require(count(curves_svg, "class=\"series\"") == 2 && count(curves_svg, "class=\"rule\"") == 2 && count(curves_svg, "#1f77b4") >= 1 &&
                  count(curves_svg, "#ff7f0e") >= 1,
              "frequency curve chart");
    o.require(count(slurp(root / "curves" / "frequency_curves.csv"), "\n") == 2000, "frequency curve rows");
    auto conf_svg = slurp(root / "confounders" / "confounders.svg");
    o.require(count(conf_svg, "class=\"series\"") == 3 && count(conf_svg, "class=\"rule\"") == 1, "confounder chart");
    for (const char* name : { "accuracy_knn.svg", "accuracy_logreg.svg", "accuracy_knn_2d.svg", "accuracy_logreg_2d.svg" }) {
        o.require(count(slurp(root / "eval" / name), "class=\"point\"") == 1, name);
    }
    o.require(count(slurp(root / "relation" / "relation.svg"), "class=\"series\"") == 1, "relation chart");

    std::vector<std::string> bio_colors, conf_colors;
    auto bio_pos = point_positions(slurp(root / "tsne" / "tsne_bio.svg"), &bio_colors);
    auto conf_pos = point_positions(slurp(root / "tsne" / "tsne_conf.svg"), &conf_colors);
    o.require(bio_pos.size() == 2000 && bio_pos == conf_pos, "t-SNE charts share positions");
    o.require(bio_colors != conf_colors, "t-SNE charts differ in coloring");

    o.detail << "pipeline " << elapsed << " s; " << compared << " JSON/CSV/data files compared, " << differing << " differ; charts structurally checked";
}

// ---------------------------------------------------------------------------------------------
// 10: permutation nulls.

void criterion10(Outcome& o) {
    auto spec = tcga2k_layout(100);
    spec.dim = 64;
    spec.bio_strength = 1;
    spec.conf_strength = 1;
    spec.noise_sigma = 0.3;
    spec.seed = 10;
    auto ds = generate(spec);
    auto nt = table(ds);
    const std::size_t k = 50;
    double p_conf = chance_levels(ds).conf;
    double n = static_cast<double>(ds.size());
    double expected = n * k * p_conf, sd = std::sqrt(n * k * p_conf * (1 - p_conf));
    double original = static_cast<double>(robustness_index(ds, nt, k).denominator);

    double worst_z = 0;
    for (std::uint64_t perm = 0; perm < 5; ++perm) {
        std::vector<std::string> conf;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            conf.push_back(ds.conf_label(i));
        }
        Rng rng(derive_seed(10, perm));
        rng.shuffle(conf);
        std::vector<SampleRecord> records;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            auto r = ds.record(i);
            r.conf_label = conf[i];
            records.push_back(std::move(r));
        }
        EmbeddingDataset permuted(std::move(records));
        auto r = robustness_index(permuted, nt, k);
        worst_z = std::max(worst_z, std::abs(static_cast<double>(r.denominator) - expected) / sd);
    }
    o.require(worst_z <= 3, "denominator within 3 binomial sd");

    auto small = random_dataset(11, 200, 16, 3, 3);
    Rng rng(12);
    std::vector<double> coords(400);
    for (auto& v : coords) {
        v = rng.normal();
    }
    double t = trustworthiness(small, coords, 12);
    std::vector<double> null;
    std::vector<std::size_t> perm(200);
    for (std::size_t i = 0; i < 200; ++i) {
        perm[i] = i;
    }
    for (int s = 0; s < 100; ++s) {
        rng.shuffle(perm);
        std::vector<double> shuffled(400);
        for (std::size_t i = 0; i < 200; ++i) {
            shuffled[2 * i] = coords[2 * perm[i]];
            shuffled[2 * i + 1] = coords[2 * perm[i] + 1];
        }
        null.push_back(trustworthiness(small, shuffled, 12));
    }
    double mean = 0, var = 0;
    for (auto v : null) {
        mean += v;
    }
    mean /= null.size();
    for (auto v : null) {
        var += (v - mean) * (v - mean);
    }
    double null_sd = std::sqrt(var / (null.size() - 1));
    double tz = std::abs(t - mean) / null_sd;
    o.require(tz <= 3, "trustworthiness within 3 sd of the null mean");
    o.detail << "denominator: unpermuted " << original << ", expected " << expected << ", max |z| over 5 permutations " << worst_z << "; T(12) random " << t
             << " vs null " << mean << " +- " << null_sd << " (|z| " << tz << ")";
}

}

int main() {
    std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        { "index equals the double-loop oracle", criterion1 },
        { "identical label axes give index 1", criterion2 },
        { "center-blind data at chance level", criterion3 },
        { "index ordering over confounder strength", criterion4 },
        { "kNN probe equals per-query recomputation", criterion5 },
        { "logistic regression", criterion6 },
        { "t-SNE", criterion7 },
        { "curves and label swap consistency", criterion8 },
        { "end-to-end command line", criterion9 },
        { "permutation nulls", criterion10 },
    };
    int failed = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        Outcome o;
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[c].second(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (c + 1) << " (" << criteria[c].first << "): " << o.detail.str() << " [" << seconds_since(start) << " s]"
                  << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
