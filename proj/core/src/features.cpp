#include "rbmc/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rbmc/errors.hpp"
#include "io_util.hpp"

namespace rbmc {

std::size_t Dataset::dim() const {
    for (const auto& item : items) {
        if (!item.frames.empty()) return item.frames.front().size();
    }
    return 0;
}

std::size_t Dataset::total_frames() const {
    std::size_t n = 0;
    for (const auto& item : items) n += item.frames.size();
    return n;
}

void validate_dataset(const Dataset& dataset) {
    if (dataset.items.empty()) throw EmptyInput("dataset has no items");
    const std::size_t d = dataset.dim();
    if (d == 0) throw EmptyInput("dataset has no frames");

    std::set<std::string> seen;
    for (const auto& item : dataset.items) {
        if (!seen.insert(item.item_id).second) {
            throw DataError("duplicate item_id '" + item.item_id + "'");
        }
        if (item.frames.empty()) {
            throw EmptyInput("item '" + item.item_id + "' has no frames");
        }
        for (const auto& frame : item.frames) {
            if (frame.size() != d) {
                throw ShapeError("item '" + item.item_id + "': frame dimension " +
                                 std::to_string(frame.size()) + " != " + std::to_string(d));
            }
            for (const double v : frame) {
                if (!std::isfinite(v)) {
                    throw DataError("item '" + item.item_id + "' contains a non-finite value");
                }
            }
        }
    }
    if (dataset.labels) {
        if (dataset.labels->size() != dataset.items.size()) {
            throw KeyError("labels cover " + std::to_string(dataset.labels->size()) +
                           " ids, dataset has " + std::to_string(dataset.items.size()));
        }
        for (const auto& item : dataset.items) {
            if (!dataset.labels->count(item.item_id)) {
                throw KeyError("labels missing item_id '" + item.item_id + "'");
            }
        }
    }
}

MvnStats mvn_fit(const Dataset& training) {
    validate_dataset(training);
    const std::size_t d = training.dim();
    const std::size_t n = training.total_frames();

    MvnStats stats;
    stats.mean.assign(d, 0.0);
    stats.std.assign(d, 0.0);

    for (const auto& item : training.items) {
        for (const auto& frame : item.frames) {
            for (std::size_t k = 0; k < d; ++k) stats.mean[k] += frame[k];
        }
    }
    for (std::size_t k = 0; k < d; ++k) stats.mean[k] /= static_cast<double>(n);

    for (const auto& item : training.items) {
        for (const auto& frame : item.frames) {
            for (std::size_t k = 0; k < d; ++k) {
                const double c = frame[k] - stats.mean[k];
                stats.std[k] += c * c;
            }
        }
    }
    for (std::size_t k = 0; k < d; ++k) {
        stats.std[k] = std::max(std::sqrt(stats.std[k] / static_cast<double>(n)), kStdFloor);
    }
    return stats;
}

Dataset mvn_apply(const MvnStats& stats, const Dataset& data) {
    const std::size_t d = stats.dim();
    if (stats.std.size() != d) {
        throw ShapeError("MVN stats mean/std dimensions differ");
    }
    Dataset out = data;
    for (auto& item : out.items) {
        for (auto& frame : item.frames) {
            if (frame.size() != d) {
                throw ShapeError("item '" + item.item_id + "': frame dimension " +
                                 std::to_string(frame.size()) +
                                 " != stats dimension " + std::to_string(d));
            }
            for (std::size_t k = 0; k < d; ++k) {
                frame[k] = (frame[k] - stats.mean[k]) / stats.std[k];
            }
        }
    }
    return out;
}

FeatureFormat parse_feature_format(const std::string& name) {
    if (name == "csv") return FeatureFormat::csv;
    if (name == "binary") return FeatureFormat::binary;
    throw InvalidConfig("unknown feature format '" + name + "' (expected csv or binary)");
}

namespace {

constexpr char kFeatureMagic[4] = {'R', 'B', 'F', 'V'};
constexpr std::uint32_t kFeatureVersion = 1;

void check_item_id(const std::string& id, const std::string& context) {
    if (id.empty()) throw FormatError(context + ": empty item_id");
    if (id.find_first_of(",;\r\n") != std::string::npos) {
        throw FormatError(context + ": item_id '" + id + "' contains a reserved character");
    }
}

/// Appends one frame, grouping rows that share an item_id into one item.
class DatasetBuilder {
public:
    void add_frame(const std::string& id, std::vector<double> frame) {
        const auto it = index_.find(id);
        if (it == index_.end()) {
            index_.emplace(id, dataset_.items.size());
            dataset_.items.push_back({id, {std::move(frame)}});
        } else {
            dataset_.items[it->second].frames.push_back(std::move(frame));
        }
    }

    Dataset take() { return std::move(dataset_); }

private:
    Dataset dataset_;
    std::map<std::string, std::size_t> index_;
};

Dataset load_features_csv(const std::filesystem::path& path) {
    auto in = io::open_input(path, false);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(path.string() + ": empty file");
    }
    const auto header = io::split(io::strip_cr(line), ',');
    if (header.size() < 2 || header[0] != "item_id") {
        throw FormatError(path.string() + ":1: expected header item_id,f0,...");
    }
    const std::size_t d = header.size() - 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (header[k + 1] != "f" + std::to_string(k)) {
            throw FormatError(path.string() + ":1: bad feature column name '" +
                              std::string(header[k + 1]) + "'");
        }
    }

    DatasetBuilder builder;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto stripped = io::strip_cr(line);
        if (stripped.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(lineno);
        const auto fields = io::split(stripped, ',');
        if (fields.size() != d + 1) {
            throw ShapeError(context + ": expected " + std::to_string(d + 1) +
                             " fields, got " + std::to_string(fields.size()));
        }
        std::string id(fields[0]);
        check_item_id(id, context);
        std::vector<double> frame(d);
        for (std::size_t k = 0; k < d; ++k) {
            frame[k] = io::parse_double(fields[k + 1], context);
        }
        builder.add_frame(id, std::move(frame));
    }
    Dataset dataset = builder.take();
    if (dataset.items.empty()) throw EmptyInput(path.string() + ": no feature rows");
    return dataset;
}

void save_features_csv(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    const std::size_t d = dataset.dim();
    out << "item_id";
    for (std::size_t k = 0; k < d; ++k) out << ",f" << k;
    out << "\n";
    for (const auto& item : dataset.items) {
        check_item_id(item.item_id, path.string());
        for (const auto& frame : item.frames) {
            out << item.item_id;
            for (const double v : frame) out << ',' << io::format_double(v);
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_features_binary(const std::filesystem::path& path) {
    auto in = io::open_input(path, true);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kFeatureMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad magic (expected RBFV)");
    }
    std::uint32_t version = 0, d32 = 0;
    std::uint64_t count = 0;
    if (!io::read_le(in, version) || !io::read_le(in, d32) || !io::read_le(in, count)) {
        throw FormatError(path.string() + ": truncated header");
    }
    if (version != kFeatureVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    }
    if (d32 == 0) throw FormatError(path.string() + ": dimension 0");

    DatasetBuilder builder;
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::string context = path.string() + ": frame record " + std::to_string(r);
        std::uint16_t id_len = 0;
        if (!io::read_le(in, id_len)) throw FormatError(context + ": truncated");
        std::string id(id_len, '\0');
        if (!in.read(id.data(), id_len)) throw FormatError(context + ": truncated item_id");
        check_item_id(id, context);
        std::vector<double> frame(d32);
        for (std::uint32_t k = 0; k < d32; ++k) {
            if (!io::read_f64_le(in, frame[k])) throw FormatError(context + ": truncated values");
        }
        builder.add_frame(id, std::move(frame));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(path.string() + ": trailing bytes after last record");
    }
    Dataset dataset = builder.take();
    if (dataset.items.empty()) throw EmptyInput(path.string() + ": no frame records");
    return dataset;
}

void save_features_binary(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = io::open_output(path, true);
    const std::size_t d = dataset.dim();
    io::write_bytes(out, kFeatureMagic, 4);
    io::write_le<std::uint32_t>(out, kFeatureVersion);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    io::write_le<std::uint64_t>(out, dataset.total_frames());
    for (const auto& item : dataset.items) {
        check_item_id(item.item_id, path.string());
        if (item.item_id.size() > UINT16_MAX) {
            throw FormatError(path.string() + ": item_id longer than 65535 bytes");
        }
        for (const auto& frame : item.frames) {
            io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(item.item_id.size()));
            io::write_bytes(out, item.item_id.data(), item.item_id.size());
            for (const double v : frame) io::write_f64_le(out, v);
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

Dataset load_features(const std::filesystem::path& path, FeatureFormat format) {
    Dataset dataset = format == FeatureFormat::csv ? load_features_csv(path)
                                                   : load_features_binary(path);
    validate_dataset(dataset);
    return dataset;
}

void save_features(const Dataset& dataset, const std::filesystem::path& path,
                   FeatureFormat format) {
    validate_dataset(dataset);
    if (format == FeatureFormat::csv) {
        save_features_csv(dataset, path);
    } else {
        save_features_binary(dataset, path);
    }
}

std::map<std::string, std::string> load_labels(const std::filesystem::path& path) {
    auto in = io::open_input(path, false);
    std::string line;
    if (!std::getline(in, line) || io::strip_cr(line) != "item_id,class_id") {
        throw FormatError(path.string() + ":1: expected header item_id,class_id");
    }
    std::map<std::string, std::string> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto stripped = io::strip_cr(line);
        if (stripped.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(lineno);
        const auto fields = io::split(stripped, ',');
        if (fields.size() != 2) {
            throw FormatError(context + ": expected 2 fields, got " +
                              std::to_string(fields.size()));
        }
        std::string id(fields[0]);
        check_item_id(id, context);
        if (!labels.emplace(std::move(id), std::string(fields[1])).second) {
            throw FormatError(context + ": duplicate item_id '" + std::string(fields[0]) + "'");
        }
    }
    if (labels.empty()) throw EmptyInput(path.string() + ": no label rows");
    return labels;
}

void save_labels(const std::vector<std::pair<std::string, std::string>>& labels,
                 const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "item_id,class_id\n";
    for (const auto& [id, cls] : labels) {
        check_item_id(id, path.string());
        out << id << ',' << cls << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void save_mvn_stats(const MvnStats& stats, const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "dim,mean,std\n";
    for (std::size_t k = 0; k < stats.dim(); ++k) {
        out << k << ',' << io::format_double(stats.mean[k]) << ','
            << io::format_double(stats.std[k]) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

MvnStats load_mvn_stats(const std::filesystem::path& path) {
    auto in = io::open_input(path, false);
    std::string line;
    if (!std::getline(in, line) || io::strip_cr(line) != "dim,mean,std") {
        throw FormatError(path.string() + ":1: expected header dim,mean,std");
    }
    MvnStats stats;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto stripped = io::strip_cr(line);
        if (stripped.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(lineno);
        const auto fields = io::split(stripped, ',');
        if (fields.size() != 3) throw FormatError(context + ": expected 3 fields");
        if (io::parse_u64(fields[0], context) != stats.mean.size()) {
            throw FormatError(context + ": dimension rows out of order");
        }
        stats.mean.push_back(io::parse_double(fields[1], context));
        stats.std.push_back(io::parse_double(fields[2], context));
    }
    if (stats.mean.empty()) throw EmptyInput(path.string() + ": no stat rows");
    return stats;
}

}  // namespace rbmc
