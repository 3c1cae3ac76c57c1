#ifndef EMBROBUST_DATASET_HPP
#define EMBROBUST_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

/**
 * @file dataset.hpp
 *
 * @brief Labeled embedding dataset shared by every analysis.
 */

namespace embrobust {

/**
 * @brief Input data failed validation, or could not be read.
 */
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief An analysis precondition does not hold for otherwise valid input.
 */
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Which label axis an analysis refers to.
 */
enum class Axis { bio, conf };

inline const char* axis_name(Axis axis) {
    return axis == Axis::bio ? "bio" : "conf";
}

/**
 * @brief One embedded sample with its labels.
 */
struct SampleRecord {
    std::string id;
    std::vector<double> vector;
    std::string bio_label;
    std::string conf_label;
    /** Empty means ungrouped. */
    std::string group_id;
};

/**
 * @brief Immutable, validated collection of labeled embeddings.
 *
 * Vectors are held row-major in double precision.
 * Label sets are sorted byte-wise, and each sample carries the index of its label in that set.
 * Group identifiers are mapped to integers, with -1 for ungrouped samples.
 */
class EmbeddingDataset {
public:
    EmbeddingDataset() = default;

    /**
     * @param records Samples in their canonical order.
     * Throws `DatasetError` naming the offending row if any invariant is violated.
     */
    explicit EmbeddingDataset(std::vector<SampleRecord> records) {
        if (records.size() < 2) {
            throw DatasetError("dataset needs at least 2 samples, got " + std::to_string(records.size()));
        }
        num_dim = records.front().vector.size();
        if (num_dim == 0) {
            throw DatasetError("row 0: empty embedding vector");
        }

        std::unordered_set<std::string> seen;
        values.reserve(records.size() * num_dim);
        for (std::size_t r = 0; r < records.size(); ++r) {
            const auto& rec = records[r];
            if (rec.vector.size() != num_dim) {
                throw DatasetError("row " + std::to_string(r) + ": dimension mismatch (" + std::to_string(rec.vector.size()) + " vs " + std::to_string(num_dim) + ")");
            }
            if (!seen.insert(rec.id).second) {
                throw DatasetError("row " + std::to_string(r) + ": duplicate sample id '" + rec.id + "'");
            }
            bool nonzero = false;
            for (auto v : rec.vector) {
                if (!std::isfinite(v)) {
                    throw DatasetError("row " + std::to_string(r) + ": non-finite value in embedding");
                }
                nonzero |= (v != 0);
            }
            if (!nonzero) {
                throw DatasetError("row " + std::to_string(r) + ": zero embedding vector");
            }
            values.insert(values.end(), rec.vector.begin(), rec.vector.end());
        }

        bio_names = sorted_unique(records, &SampleRecord::bio_label);
        conf_names = sorted_unique(records, &SampleRecord::conf_label);
        bio_index = map_labels(records, &SampleRecord::bio_label, bio_names);
        conf_index = map_labels(records, &SampleRecord::conf_label, conf_names);

        std::unordered_map<std::string, int> group_codes;
        groups.reserve(records.size());
        for (const auto& rec : records) {
            if (rec.group_id.empty()) {
                groups.push_back(-1);
            } else {
                auto it = group_codes.try_emplace(rec.group_id, static_cast<int>(group_codes.size())).first;
                groups.push_back(it->second);
            }
        }

        for (auto& rec : records) {
            rec.vector.clear();
            rec.vector.shrink_to_fit();
        }
        meta = std::move(records);
    }

    std::size_t size() const { return meta.size(); }

    std::size_t dim() const { return num_dim; }

    std::span<const double> vector(std::size_t i) const {
        return std::span<const double>(values.data() + i * num_dim, num_dim);
    }

    /** Row-major `size() * dim()` matrix of all vectors. */
    std::span<const double> matrix() const { return values; }

    const std::string& id(std::size_t i) const { return meta[i].id; }
    const std::string& bio_label(std::size_t i) const { return meta[i].bio_label; }
    const std::string& conf_label(std::size_t i) const { return meta[i].conf_label; }
    const std::string& group_id(std::size_t i) const { return meta[i].group_id; }

    const std::vector<std::string>& bio_classes() const { return bio_names; }
    const std::vector<std::string>& conf_classes() const { return conf_names; }

    const std::vector<std::string>& classes(Axis axis) const {
        return axis == Axis::bio ? bio_names : conf_names;
    }

    /** Label indices into `classes(axis)`, one per sample. */
    std::span<const int> labels(Axis axis) const {
        return axis == Axis::bio ? std::span<const int>(bio_index) : std::span<const int>(conf_index);
    }

    /** Group code per sample, -1 when ungrouped. */
    std::span<const int> group_codes() const { return groups; }

    /**
     * @return Whether samples `i` and `j` share a (non-empty) group id.
     */
    bool same_group(std::size_t i, std::size_t j) const {
        return groups[i] >= 0 && groups[i] == groups[j];
    }

    /**
     * @return Full record of sample `i`, with its vector.
     */
    SampleRecord record(std::size_t i) const {
        SampleRecord out = meta[i];
        auto v = vector(i);
        out.vector.assign(v.begin(), v.end());
        return out;
    }

    /**
     * @return New dataset holding the samples at `indices`, in that order.
     */
    EmbeddingDataset subset(std::span<const std::size_t> indices) const {
        std::vector<SampleRecord> out;
        out.reserve(indices.size());
        for (auto i : indices) {
            out.push_back(record(i));
        }
        return EmbeddingDataset(std::move(out));
    }

    /**
     * @return Copy with a new label assignment on one axis (labels given per sample).
     */
    EmbeddingDataset relabeled(Axis axis, std::span<const std::string> new_labels) const {
        if (new_labels.size() != size()) {
            throw DatasetError("relabel: expected " + std::to_string(size()) + " labels, got " + std::to_string(new_labels.size()));
        }
        std::vector<SampleRecord> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) {
            auto rec = record(i);
            (axis == Axis::bio ? rec.bio_label : rec.conf_label) = new_labels[i];
            out.push_back(std::move(rec));
        }
        return EmbeddingDataset(std::move(out));
    }

    friend bool operator==(const EmbeddingDataset& a, const EmbeddingDataset& b) {
        if (a.size() != b.size() || a.dim() != b.dim() || a.values != b.values) {
            return false;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& x = a.meta[i];
            const auto& y = b.meta[i];
            if (x.id != y.id || x.bio_label != y.bio_label || x.conf_label != y.conf_label || x.group_id != y.group_id) {
                return false;
            }
        }
        return true;
    }

private:
    static std::vector<std::string> sorted_unique(const std::vector<SampleRecord>& records, std::string SampleRecord::* field) {
        std::vector<std::string> out;
        out.reserve(records.size());
        for (const auto& rec : records) {
            out.push_back(rec.*field);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    static std::vector<int> map_labels(const std::vector<SampleRecord>& records, std::string SampleRecord::* field, const std::vector<std::string>& names) {
        std::vector<int> out;
        out.reserve(records.size());
        for (const auto& rec : records) {
            auto it = std::lower_bound(names.begin(), names.end(), rec.*field);
            out.push_back(static_cast<int>(it - names.begin()));
        }
        return out;
    }

    std::vector<SampleRecord> meta;
    std::vector<double> values;
    std::size_t num_dim = 0;
    std::vector<std::string> bio_names, conf_names;
    std::vector<int> bio_index, conf_index;
    std::vector<int> groups;
};

/**
 * @brief Sample counts per (biological class, confounder class) cell.
 */
struct ClassCountMatrix {
    std::vector<std::string> bio_classes;
    std::vector<std::string> conf_classes;
    /** `counts[b][c]`, indexed like the class vectors. */
    std::vector<std::vector<std::size_t>> counts;

    std::size_t total() const {
        std::size_t out = 0;
        for (const auto& row : counts) {
            for (auto c : row) {
                out += c;
            }
        }
        return out;
    }

    std::size_t populated_cells() const {
        std::size_t out = 0;
        for (const auto& row : counts) {
            out += std::count_if(row.begin(), row.end(), [](std::size_t c) { return c > 0; });
        }
        return out;
    }
};

inline ClassCountMatrix class_count_matrix(const EmbeddingDataset& ds) {
    ClassCountMatrix out;
    out.bio_classes = ds.bio_classes();
    out.conf_classes = ds.conf_classes();
    out.counts.assign(out.bio_classes.size(), std::vector<std::size_t>(out.conf_classes.size()));
    auto bio = ds.labels(Axis::bio);
    auto conf = ds.labels(Axis::conf);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ++out.counts[bio[i]][conf[i]];
    }
    return out;
}

/**
 * @return Number of samples in each class along `axis`.
 */
inline std::vector<std::size_t> class_sizes(const EmbeddingDataset& ds, Axis axis) {
    std::vector<std::size_t> out(ds.classes(axis).size());
    for (auto l : ds.labels(axis)) {
        ++out[l];
    }
    return out;
}

/**
 * @brief Probability that a uniformly drawn other sample shares a label.
 */
struct ChanceLevels {
    double bio;
    double conf;
};

/**
 * Computes, for each axis, \f$\sum_b m_b (m_b - 1) / (n (n - 1))\f$ where \f$m_b\f$ is the size of class \f$b\f$.
 */
inline ChanceLevels chance_levels(const EmbeddingDataset& ds) {
    auto level = [&](Axis axis) {
        double n = static_cast<double>(ds.size());
        double pairs = 0;
        for (auto m : class_sizes(ds, axis)) {
            pairs += static_cast<double>(m) * static_cast<double>(m - (m > 0 ? 1 : 0));
        }
        return pairs / (n * (n - 1));
    };
    return ChanceLevels{ level(Axis::bio), level(Axis::conf) };
}

}

#endif
