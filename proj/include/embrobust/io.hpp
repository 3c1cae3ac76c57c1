#ifndef EMBROBUST_IO_HPP
#define EMBROBUST_IO_HPP

#include "dataset.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file io.hpp
 *
 * @brief Manifest and embedding file formats.
 *
 * A dataset on disk is a manifest CSV with the header `sample_id,bio_label,conf_label,group_id`
 * plus an embedding file whose row `i` belongs to manifest row `i`.
 * The embedding file is either CSV (one row of floats per sample) or the `EMB1` binary format:
 * magic `EMB1`, little-endian u32 version (1), u64 n, u64 d, then `n * d` little-endian float32 values, row-major.
 */

namespace embrobust {

inline constexpr std::string_view manifest_header = "sample_id,bio_label,conf_label,group_id";

namespace io_detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/**
 * Split text into lines, accepting LF or CRLF; a trailing empty line is dropped.
 */
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        out.push_back(line);
        start = end + 1;
    }
    while (!out.empty() && out.back().empty()) {
        out.pop_back();
    }
    return out;
}

/**
 * Split one CSV line into fields; double-quoted fields may contain commas and doubled quotes.
 */
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline std::string quote_csv(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

template<typename T>
void put_le(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    auto bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(U); ++b) {
        out += static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
}

template<typename T>
T get_le(const char* ptr) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
        bits |= static_cast<U>(static_cast<unsigned char>(ptr[b])) << (8 * b);
    }
    return std::bit_cast<T>(bits);
}

inline float parse_float(std::string_view text, std::size_t row) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    float value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw DatasetError("row " + std::to_string(row) + ": cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

inline std::string format_float(float value) {
    std::array<char, 64> buffer{};
    auto res = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), res.ptr);
}

}

/**
 * @brief Metadata columns of a manifest file.
 */
struct ManifestRow {
    std::string sample_id;
    std::string bio_label;
    std::string conf_label;
    std::string group_id;
};

inline std::vector<ManifestRow> parse_manifest(std::string_view text) {
    auto lines = io_detail::split_lines(text);
    if (lines.empty() || lines.front() != manifest_header) {
        throw DatasetError("manifest header must be exactly '" + std::string(manifest_header) + "'");
    }
    std::vector<ManifestRow> out;
    out.reserve(lines.size() - 1);
    for (std::size_t l = 1; l < lines.size(); ++l) {
        auto fields = io_detail::split_csv(lines[l]);
        if (fields.size() != 4) {
            throw DatasetError("manifest row " + std::to_string(l - 1) + ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        out.push_back(ManifestRow{ std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), std::move(fields[3]) });
    }
    return out;
}

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    return parse_manifest(io_detail::read_file(path));
}

/**
 * @brief Dense row-major float32 matrix, as stored on disk.
 */
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;
};

inline bool is_binary_embeddings(std::string_view bytes) {
    return bytes.size() >= 4 && bytes.substr(0, 4) == "EMB1";
}

inline EmbeddingMatrix parse_embeddings_binary(std::string_view bytes) {
    constexpr std::size_t header = 4 + 4 + 8 + 8;
    if (bytes.size() < header || !is_binary_embeddings(bytes)) {
        throw DatasetError("binary embeddings: truncated header or bad magic");
    }
    auto version = io_detail::get_le<std::uint32_t>(bytes.data() + 4);
    if (version != 1) {
        throw DatasetError("binary embeddings: unsupported version " + std::to_string(version));
    }
    EmbeddingMatrix out;
    out.rows = io_detail::get_le<std::uint64_t>(bytes.data() + 8);
    out.cols = io_detail::get_le<std::uint64_t>(bytes.data() + 16);
    if (out.cols != 0 && out.rows > (bytes.size() - header) / 4 / out.cols) {
        throw DatasetError("binary embeddings: payload shorter than header declares");
    }
    std::size_t expected = header + out.rows * out.cols * 4;
    if (bytes.size() != expected) {
        throw DatasetError("binary embeddings: expected " + std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
    }
    out.values.resize(out.rows * out.cols);
    const char* ptr = bytes.data() + header;
    for (auto& v : out.values) {
        v = io_detail::get_le<float>(ptr);
        ptr += 4;
    }
    return out;
}

inline EmbeddingMatrix parse_embeddings_csv(std::string_view text) {
    EmbeddingMatrix out;
    auto lines = io_detail::split_lines(text);
    out.rows = lines.size();
    for (std::size_t r = 0; r < lines.size(); ++r) {
        auto fields = io_detail::split_csv(lines[r]);
        if (r == 0) {
            out.cols = fields.size();
            out.values.reserve(out.rows * out.cols);
        } else if (fields.size() != out.cols) {
            throw DatasetError("row " + std::to_string(r) + ": dimension mismatch (" + std::to_string(fields.size()) + " vs " + std::to_string(out.cols) + ")");
        }
        for (const auto& f : fields) {
            out.values.push_back(io_detail::parse_float(f, r));
        }
    }
    return out;
}

/**
 * Reads either embedding format, detected by the `EMB1` magic.
 */
inline EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
    auto bytes = io_detail::read_file(path);
    if (is_binary_embeddings(bytes)) {
        return parse_embeddings_binary(bytes);
    }
    return parse_embeddings_csv(bytes);
}

/**
 * Bind manifest rows to embedding rows and validate.
 */
inline EmbeddingDataset assemble_dataset(std::vector<ManifestRow> manifest, const EmbeddingMatrix& emb) {
    if (manifest.size() != emb.rows) {
        throw DatasetError("row count mismatch (" + std::to_string(manifest.size()) + " vs " + std::to_string(emb.rows) + ")");
    }
    std::vector<SampleRecord> records;
    records.reserve(manifest.size());
    for (std::size_t r = 0; r < manifest.size(); ++r) {
        SampleRecord rec;
        rec.id = std::move(manifest[r].sample_id);
        rec.bio_label = std::move(manifest[r].bio_label);
        rec.conf_label = std::move(manifest[r].conf_label);
        rec.group_id = std::move(manifest[r].group_id);
        auto row = emb.values.begin() + static_cast<std::ptrdiff_t>(r * emb.cols);
        rec.vector.assign(row, row + static_cast<std::ptrdiff_t>(emb.cols));
        records.push_back(std::move(rec));
    }
    return EmbeddingDataset(std::move(records));
}

/**
 * Load and validate a dataset from a manifest and an embedding file (CSV or binary).
 */
inline EmbeddingDataset load_dataset(const std::filesystem::path& manifest_path, const std::filesystem::path& embeddings_path) {
    auto manifest = read_manifest(manifest_path);
    auto emb = read_embeddings(embeddings_path);
    return assemble_dataset(std::move(manifest), emb);
}

inline std::string format_manifest(const EmbeddingDataset& ds) {
    std::string out(manifest_header);
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += io_detail::quote_csv(ds.id(i)) + ',' + io_detail::quote_csv(ds.bio_label(i)) + ',' +
            io_detail::quote_csv(ds.conf_label(i)) + ',' + io_detail::quote_csv(ds.group_id(i)) + '\n';
    }
    return out;
}

/**
 * Vectors are narrowed to float32; datasets whose values are float-representable round-trip bit-exactly.
 */
inline std::string format_embeddings_binary(const EmbeddingDataset& ds) {
    std::string out = "EMB1";
    out.reserve(24 + ds.size() * ds.dim() * 4);
    io_detail::put_le<std::uint32_t>(out, 1);
    io_detail::put_le<std::uint64_t>(out, ds.size());
    io_detail::put_le<std::uint64_t>(out, ds.dim());
    for (auto v : ds.matrix()) {
        io_detail::put_le<float>(out, static_cast<float>(v));
    }
    return out;
}

inline std::string format_embeddings_csv(const EmbeddingDataset& ds) {
    std::string out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto v = ds.vector(i);
        for (std::size_t d = 0; d < v.size(); ++d) {
            if (d) {
                out += ',';
            }
            out += io_detail::format_float(static_cast<float>(v[d]));
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DatasetError("cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw DatasetError("failed writing '" + path.string() + "'");
    }
}

enum class EmbeddingFormat { binary, csv };

inline void save_dataset(const EmbeddingDataset& ds, const std::filesystem::path& manifest_path, const std::filesystem::path& embeddings_path, EmbeddingFormat format = EmbeddingFormat::binary) {
    write_text(manifest_path, format_manifest(ds));
    write_text(embeddings_path, format == EmbeddingFormat::binary ? format_embeddings_binary(ds) : format_embeddings_csv(ds));
}

/**
 * @brief 2D coordinates keyed by sample id, e.g. from a t-SNE run.
 */
struct CoordsTable {
    std::vector<std::string> ids;
    std::vector<double> xy;
};

/**
 * Parses `sample_id,x,y` CSV (with that header).
 */
inline CoordsTable read_coords_csv(const std::filesystem::path& path) {
    auto text = io_detail::read_file(path);
    auto lines = io_detail::split_lines(text);
    if (lines.empty() || lines.front() != "sample_id,x,y") {
        throw DatasetError("coords file '" + path.string() + "' must start with header 'sample_id,x,y'");
    }
    CoordsTable out;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        auto fields = io_detail::split_csv(lines[l]);
        if (fields.size() != 3) {
            throw DatasetError("coords row " + std::to_string(l - 1) + ": expected 3 fields");
        }
        out.ids.push_back(fields[0]);
        for (int c = 1; c <= 2; ++c) {
            double value = 0;
            auto res = std::from_chars(fields[c].data(), fields[c].data() + fields[c].size(), value);
            if (res.ec != std::errc() || !std::isfinite(value)) {
                throw DatasetError("coords row " + std::to_string(l - 1) + ": bad coordinate '" + fields[c] + "'");
            }
            out.xy.push_back(value);
        }
    }
    return out;
}

/**
 * Dataset with the same samples and labels but 2D coordinates as vectors, matched by sample id.
 */
inline EmbeddingDataset with_coords(const EmbeddingDataset& ds, const CoordsTable& coords) {
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t r = 0; r < coords.ids.size(); ++r) {
        where.emplace(coords.ids[r], r);
    }
    std::vector<SampleRecord> records;
    records.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto it = where.find(ds.id(i));
        if (it == where.end()) {
            throw DatasetError("coords: missing sample '" + ds.id(i) + "'");
        }
        SampleRecord rec{ ds.id(i), { coords.xy[2 * it->second], coords.xy[2 * it->second + 1] }, ds.bio_label(i), ds.conf_label(i), ds.group_id(i) };
        records.push_back(std::move(rec));
    }
    return EmbeddingDataset(std::move(records));
}

}

#endif
