#ifndef EMBROBUST_TEST_HELPERS_HPP
#define EMBROBUST_TEST_HELPERS_HPP

#include "embrobust/embrobust.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace testing_helpers {

using namespace embrobust;

inline EmbeddingDataset make_dataset(const std::vector<std::vector<double>>& vectors, const std::vector<std::string>& bio, const std::vector<std::string>& conf,
                                     const std::vector<std::string>& groups = {}) {
    std::vector<SampleRecord> records;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        records.push_back(SampleRecord{ "s" + std::to_string(i), vectors[i], bio[i], conf[i], groups.empty() ? "" : groups[i] });
    }
    return EmbeddingDataset(std::move(records));
}

// Gaussian vectors with uniformly drawn labels; every class id is in range.
inline EmbeddingDataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t num_bio, std::size_t num_conf) {
    Rng rng(seed);
    std::vector<SampleRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        SampleRecord r;
        r.id = "r" + std::to_string(i);
        r.vector.resize(dim);
        for (auto& v : r.vector) {
            v = rng.normal();
        }
        r.bio_label = "b" + std::to_string(rng.below(num_bio));
        r.conf_label = "c" + std::to_string(rng.below(num_conf));
        records.push_back(std::move(r));
    }
    return EmbeddingDataset(std::move(records));
}

inline SynthSpec balanced_spec(std::size_t nb, std::size_t nc, std::size_t per_cell, std::size_t dim, double alpha, double beta, double sigma, std::uint64_t seed) {
    SynthSpec s;
    s.per_cell = balanced_cells(nb, nc, per_cell);
    s.dim = dim;
    s.bio_strength = alpha;
    s.conf_strength = beta;
    s.noise_sigma = sigma;
    s.seed = seed;
    return s;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("embrobust_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::filesystem::path path;
};

}

#endif
