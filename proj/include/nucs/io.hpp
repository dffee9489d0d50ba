#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"

namespace nucs {

namespace detail {

inline std::string shortest_repr(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Splits at the first comma. Ids therefore must not contain commas.
inline std::pair<std::string, std::string> split_two(const std::string& line,
                                                     const std::string& path) {
    const auto pos = line.find(',');
    if (pos == std::string::npos)
        throw data_error(path + ": expected two comma-separated fields, got '" + line + "'");
    return {line.substr(0, pos), line.substr(pos + 1)};
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "' for reading");
    return in;
}

} // namespace detail

/// Writes content to path atomically (temp file in the same directory, then rename).
inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw data_error("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw data_error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

/// Reads a two-column CSV with the given header, returning rows in file order.
inline std::vector<std::pair<std::string, std::string>> read_id_value_csv(
    const std::string& path, const std::string& expected_header) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file");
    detail::strip_cr(line);
    if (line != expected_header)
        throw data_error(path + ": expected header '" + expected_header + "', got '" + line + "'");
    std::vector<std::pair<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        detail::strip_cr(line);
        if (line.empty()) continue;
        rows.push_back(detail::split_two(line, path));
    }
    return rows;
}

inline double parse_score(const std::string& text, const std::string& path) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw data_error(path + ": malformed score '" + text + "'");
    if (!std::isfinite(v)) throw data_error(path + ": non-finite score '" + text + "'");
    return v;
}

/// Feature matrix file: magic, row/column counts as little-endian u64, then
/// row-major little-endian f32 values. Row order comes from the `<path>.ids` sidecar.
inline constexpr char kFeatureMagic[8] = {'N', 'U', 'C', 'S', 'F', 'M', '0', '1'};

inline void write_features(const std::string& path, const Eigen::MatrixXf& m,
                           const std::vector<std::string>& ids) {
    if (static_cast<Eigen::Index>(ids.size()) != m.rows())
        throw data_error("feature id count does not match row count");
    std::string blob;
    blob.reserve(8 + 16 + static_cast<std::size_t>(m.size()) * 4);
    blob.append(kFeatureMagic, 8);
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                   static_cast<std::uint64_t>(m.cols())};
    blob.append(reinterpret_cast<const char*>(dims), 16);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            float v = m(r, c);
            char bytes[4];
            std::memcpy(bytes, &v, 4);
            blob.append(bytes, 4);
        }
    atomic_write(path, blob);

    std::string sidecar;
    for (const auto& id : ids) {
        sidecar += id;
        sidecar += '\n';
    }
    atomic_write(path + ".ids", sidecar);
}

inline std::pair<Eigen::MatrixXf, std::vector<std::string>> read_features(
    const std::string& path) {
    auto in = detail::open_input(path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kFeatureMagic, 8) != 0)
        throw data_error(path + ": bad feature file magic");
    std::uint64_t dims[2];
    if (!in.read(reinterpret_cast<char*>(dims), 16))
        throw data_error(path + ": truncated feature header");
    if (dims[0] == 0 || dims[1] == 0 || dims[0] > (1ull << 40) || dims[1] > (1ull << 32))
        throw data_error(path + ": implausible feature dimensions");
    Eigen::MatrixXf m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
    std::vector<float> row(dims[1]);
    for (std::uint64_t r = 0; r < dims[0]; ++r) {
        if (!in.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(row.size() * 4)))
            throw data_error(path + ": truncated feature data");
        for (std::uint64_t c = 0; c < dims[1]; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }

    const std::string sidecar_path = path + ".ids";
    auto sidecar = detail::open_input(sidecar_path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(sidecar, line)) {
        detail::strip_cr(line);
        if (line.empty()) continue;
        ids.push_back(line);
    }
    if (ids.size() != dims[0])
        throw data_error(sidecar_path + ": id count does not match feature rows");
    return {std::move(m), std::move(ids)};
}

/// Loads and validates a dataset. Labels are densified to [0, Y) in order of
/// first appearance in the labels file; scores and features are joined by id
/// and must cover exactly the same id set.
inline ScoredDataset load_dataset(const std::string& labels_path, const std::string& scores_path,
                                  const std::optional<std::string>& features_path = std::nullopt) {
    const auto label_rows = read_id_value_csv(labels_path, "id,label");
    if (label_rows.empty()) throw data_error(labels_path + ": no samples");

    ScoredDataset ds;
    std::unordered_map<std::string, int> token_to_class;
    std::unordered_set<std::string> seen;
    for (const auto& [id, token] : label_rows) {
        if (!seen.insert(id).second) throw data_error(labels_path + ": duplicate id '" + id + "'");
        auto [it, inserted] =
            token_to_class.emplace(token, static_cast<int>(token_to_class.size()));
        ds.ids.push_back(id);
        ds.labels.push_back(it->second);
    }
    ds.num_classes = static_cast<int>(token_to_class.size());

    const auto score_rows = read_id_value_csv(scores_path, "id,score");
    std::unordered_map<std::string, double> score_by_id;
    score_by_id.reserve(score_rows.size());
    for (const auto& [id, text] : score_rows) {
        if (!score_by_id.emplace(id, parse_score(text, scores_path)).second)
            throw data_error(scores_path + ": duplicate id '" + id + "'");
    }
    if (score_by_id.size() != ds.ids.size())
        throw data_error("id set mismatch between '" + labels_path + "' and '" + scores_path + "'");
    ds.scores.reserve(ds.ids.size());
    for (const auto& id : ds.ids) {
        auto it = score_by_id.find(id);
        if (it == score_by_id.end())
            throw data_error("id set mismatch: '" + id + "' missing from '" + scores_path + "'");
        ds.scores.push_back(it->second);
    }

    if (features_path) {
        auto [matrix, feat_ids] = read_features(*features_path);
        if (feat_ids.size() != ds.ids.size())
            throw data_error("id set mismatch between '" + labels_path + "' and '" +
                             *features_path + "'");
        std::unordered_map<std::string, Eigen::Index> row_of;
        row_of.reserve(feat_ids.size());
        for (std::size_t r = 0; r < feat_ids.size(); ++r) {
            if (!row_of.emplace(feat_ids[r], static_cast<Eigen::Index>(r)).second)
                throw data_error(*features_path + ": duplicate id '" + feat_ids[r] + "'");
        }
        Eigen::MatrixXf ordered(matrix.rows(), matrix.cols());
        for (std::size_t i = 0; i < ds.ids.size(); ++i) {
            auto it = row_of.find(ds.ids[i]);
            if (it == row_of.end())
                throw data_error("id set mismatch: '" + ds.ids[i] + "' missing from '" +
                                 *features_path + "'");
            ordered.row(static_cast<Eigen::Index>(i)) = matrix.row(it->second);
        }
        ds.features = std::move(ordered);
    }

    ds.finalize();
    return ds;
}

/// Writes labels in dataset order. Classes are written as their integer value;
/// the loader assigns dense labels by first appearance, so the values round-trip
/// whenever class c first appears before class c+1.
inline void write_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                             const std::vector<int>& labels) {
    if (ids.size() != labels.size()) throw data_error("ids and labels must have equal length");
    std::string content = "id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        content += ids[i];
        content += ',';
        content += std::to_string(labels[i]);
        content += '\n';
    }
    atomic_write(path, content);
}

/// Writes scores with shortest round-trip formatting, so reading them back
/// reproduces the exact double values.
inline void write_scores_csv(const std::string& path, const std::vector<std::string>& ids,
                             const std::vector<double>& scores) {
    if (ids.size() != scores.size()) throw data_error("ids and scores must have equal length");
    std::string content = "id,score\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        content += ids[i];
        content += ',';
        content += detail::shortest_repr(scores[i]);
        content += '\n';
    }
    atomic_write(path, content);
}

/// Writes selected ids, one per row, in selection order.
inline void save_selection(const CoresetSelection& sel, const std::string& out_path) {
    if (sel.selected_ids.empty()) throw data_error("refusing to write an empty selection");
    std::string content = "id\n";
    for (const auto& id : sel.selected_ids) {
        content += id;
        content += '\n';
    }
    atomic_write(out_path, content);
}

inline std::vector<std::string> read_selection(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file");
    detail::strip_cr(line);
    if (line != "id") throw data_error(path + ": expected header 'id'");
    std::vector<std::string> ids;
    while (std::getline(in, line)) {
        detail::strip_cr(line);
        if (line.empty()) continue;
        ids.push_back(line);
    }
    return ids;
}

/// Machine-readable summary of one selection run.
struct RunReport {
    std::vector<std::int64_t> class_counts;
    std::vector<double> class_difficulty;
    std::vector<std::int64_t> class_budgets;
    std::optional<double> chosen_k;
    std::vector<std::pair<double, double>> proxy_scores; // (k, accuracy) in grid order
    std::optional<std::pair<double, double>> metrics;    // (wca, diff)
    nlohmann::ordered_json params;
};

inline std::string render_report(const RunReport& report) {
    nlohmann::ordered_json j;
    auto table = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < report.class_counts.size(); ++c) {
        if (report.class_budgets[c] > report.class_counts[c])
            throw data_error("report budget exceeds class size");
        table.push_back({{"class", c},
                         {"count", report.class_counts[c]},
                         {"difficulty", report.class_difficulty[c]},
                         {"budget", report.class_budgets[c]}});
    }
    j["class_table"] = std::move(table);
    if (report.chosen_k)
        j["chosen_k"] = *report.chosen_k;
    else
        j["chosen_k"] = nullptr;
    if (report.proxy_scores.empty()) {
        j["proxy_scores"] = nullptr;
    } else {
        nlohmann::ordered_json scores;
        for (const auto& [k, acc] : report.proxy_scores)
            scores[detail::shortest_repr(k)] = acc;
        j["proxy_scores"] = std::move(scores);
    }
    if (report.metrics)
        j["metrics"] = {{"wca", report.metrics->first}, {"diff", report.metrics->second}};
    else
        j["metrics"] = nullptr;
    j["params"] = report.params;
    return j.dump(2) + "\n";
}

inline void save_report(const RunReport& report, const std::string& path) {
    atomic_write(path, render_report(report));
}

} // namespace nucs
