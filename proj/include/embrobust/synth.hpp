#ifndef EMBROBUST_SYNTH_HPP
#define EMBROBUST_SYNTH_HPP

#include "dataset.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file synth.hpp
 *
 * @brief Synthetic embeddings with separately tunable biological and confounder signal.
 */

namespace embrobust {

/**
 * @brief Parameters of a synthetic dataset.
 *
 * Each sample of biological class `b` and confounder class `c` is
 * `bio_strength * u_b + conf_strength * v_c + noise`, where all `u_b`, `v_c` are mutually orthonormal
 * and the noise is isotropic Gaussian.
 */
struct SynthSpec {
    /** `per_cell[b][c]` samples for each cell; zeros leave a cell empty. */
    std::vector<std::vector<std::size_t>> per_cell;
    std::size_t dim = 64;
    double bio_strength = 1;
    double conf_strength = 1;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;

    /** Labels; generated as `bio0, bio1, ...` / `conf0, ...` when empty. */
    std::vector<std::string> bio_names;
    std::vector<std::string> conf_names;

    /** Consecutive samples of a cell share a group id in runs of this size; 0 leaves samples ungrouped. */
    std::size_t group_size = 10;

    std::size_t num_bio() const { return per_cell.size(); }
    std::size_t num_conf() const { return per_cell.empty() ? 0 : per_cell.front().size(); }
};

/**
 * @return A cell layout with `count` samples in every one of `num_bio * num_conf` cells.
 */
inline std::vector<std::vector<std::size_t>> balanced_cells(std::size_t num_bio, std::size_t num_conf, std::size_t count) {
    return std::vector<std::vector<std::size_t>>(num_bio, std::vector<std::size_t>(num_conf, count));
}

/**
 * TCGA-2k composition: cancer types BRCA, COAD, LIHC, LUSC, STAD against centers Asterand, GPCC, IGC, ILSBio, MSKCC,
 * with 20 populated cells. With `count = 100` this yields 2000 samples.
 */
inline SynthSpec tcga2k_layout(std::size_t count) {
    SynthSpec spec;
    spec.bio_names = { "BRCA", "COAD", "LIHC", "LUSC", "STAD" };
    spec.conf_names = { "Asterand", "GPCC", "IGC", "ILSBio", "MSKCC" };
    const int present[5][5] = {
        // Asterand GPCC IGC ILSBio MSKCC
        { 1, 1, 1, 1, 1 }, // BRCA
        { 1, 1, 1, 1, 1 }, // COAD
        { 1, 0, 1, 1, 0 }, // LIHC
        { 1, 0, 1, 0, 1 }, // LUSC
        { 1, 1, 1, 1, 0 }, // STAD
    };
    spec.per_cell.assign(5, std::vector<std::size_t>(5));
    for (int b = 0; b < 5; ++b) {
        for (int c = 0; c < 5; ++c) {
            spec.per_cell[b][c] = present[b][c] ? count : 0;
        }
    }
    return spec;
}

/**
 * @return `count` orthonormal directions in `dim` dimensions, from Gaussian draws by twice-repeated Gram-Schmidt.
 */
inline std::vector<std::vector<double>> orthonormal_directions(std::size_t count, std::size_t dim, Rng& rng) {
    if (count > dim) {
        throw std::invalid_argument("cannot orthogonalize " + std::to_string(count) + " directions in " + std::to_string(dim) + " dimensions");
    }
    std::vector<std::vector<double>> out;
    out.reserve(count);
    while (out.size() < count) {
        std::vector<double> v(dim);
        for (auto& x : v) {
            x = rng.normal();
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : out) {
                double dot = 0;
                for (std::size_t d = 0; d < dim; ++d) {
                    dot += u[d] * v[d];
                }
                for (std::size_t d = 0; d < dim; ++d) {
                    v[d] -= dot * u[d];
                }
            }
        }
        double norm = 0;
        for (auto x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-8) {
            continue;
        }
        for (auto& x : v) {
            x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

/**
 * @brief Generated dataset together with the signal directions used.
 */
struct SynthOutput {
    EmbeddingDataset data;
    std::vector<std::vector<double>> bio_directions;
    std::vector<std::vector<double>> conf_directions;
};

/**
 * Generate a dataset from `spec`; identical specs give bit-identical output.
 * Values are rounded to float32 precision so the dataset survives the on-disk format unchanged.
 * Samples are ordered by cell (biological class major).
 */
inline SynthOutput generate_with_directions(const SynthSpec& spec) {
    std::size_t nb = spec.num_bio(), nc = spec.num_conf();
    if (nb == 0 || nc == 0) {
        throw std::invalid_argument("synth: need at least one biological and one confounder class");
    }
    for (const auto& row : spec.per_cell) {
        if (row.size() != nc) {
            throw std::invalid_argument("synth: ragged cell layout");
        }
    }
    if (spec.dim < 2) {
        throw std::invalid_argument("synth: dim must be at least 2");
    }
    if (!(spec.bio_strength >= 0) || !(spec.conf_strength >= 0) || !(spec.noise_sigma > 0)) {
        throw std::invalid_argument("synth: strengths must be >= 0 and noise_sigma > 0");
    }
    if ((!spec.bio_names.empty() && spec.bio_names.size() != nb) || (!spec.conf_names.empty() && spec.conf_names.size() != nc)) {
        throw std::invalid_argument("synth: label name count does not match the cell layout");
    }

    Rng rng(spec.seed);
    auto dirs = orthonormal_directions(nb + nc, spec.dim, rng);
    SynthOutput out;
    out.bio_directions.assign(dirs.begin(), dirs.begin() + static_cast<std::ptrdiff_t>(nb));
    out.conf_directions.assign(dirs.begin() + static_cast<std::ptrdiff_t>(nb), dirs.end());

    auto name = [](const std::vector<std::string>& names, const char* prefix, std::size_t i) {
        return names.empty() ? prefix + std::to_string(i) : names[i];
    };

    std::vector<SampleRecord> records;
    std::size_t counter = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t c = 0; c < nc; ++c) {
            for (std::size_t s = 0; s < spec.per_cell[b][c]; ++s) {
                SampleRecord rec;
                rec.id = "s" + std::to_string(counter++);
                rec.bio_label = name(spec.bio_names, "bio", b);
                rec.conf_label = name(spec.conf_names, "conf", c);
                if (spec.group_size > 0) {
                    rec.group_id = "g" + std::to_string(b) + "_" + std::to_string(c) + "_" + std::to_string(s / spec.group_size);
                }
                rec.vector.resize(spec.dim);
                for (std::size_t d = 0; d < spec.dim; ++d) {
                    double v = spec.bio_strength * out.bio_directions[b][d] + spec.conf_strength * out.conf_directions[c][d] + spec.noise_sigma * rng.normal();
                    rec.vector[d] = static_cast<double>(static_cast<float>(v));
                }
                records.push_back(std::move(rec));
            }
        }
    }
    if (records.empty()) {
        throw std::invalid_argument("synth: no populated cell");
    }
    out.data = EmbeddingDataset(std::move(records));
    return out;
}

inline EmbeddingDataset generate(const SynthSpec& spec) {
    return generate_with_directions(spec).data;
}

}

#endif
