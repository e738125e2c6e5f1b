#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include <cobbkit/cobb.hpp>
#include <cobbkit/errors.hpp>
#include <cobbkit/geometry.hpp>
#include <cobbkit/metrics.hpp>

namespace cobbkit {

// ============================================================================
// Records
// ============================================================================

/// One dataset row: an image with landmarks and/or ground-truth angles.
struct DatasetRecord {
    std::string image_id;
    ImageDims dims{};
    std::optional<SpineLandmarks> landmarks;
    std::optional<CobbTriple> gt_angles;
    std::vector<std::string> warnings;
};

/// Detector output for one image: boxes plus the normalized landmark quad
/// regressed inside each box (TL, TR, BL, BR order, coordinates in [0,1]).
/// dims are the original image dimensions; crop_offset is the number of
/// rows that were removed from the top before detection, so boxes live in
/// cropped-image coordinates.
struct PredictionRecord {
    std::string image_id;
    ImageDims dims{};
    int crop_offset = 0;
    std::vector<Detection> detections;
    std::vector<std::array<Point2, 4>> landmarks_norm;
};

/// Coordinate column order of a landmark CSV.
enum class LandmarkLayout {
    xy_interleaved,   ///< x0,y0,x1,y1,...
    x_block_y_block,  ///< x0..x67,y0..y67
};

/// Ground-truth angle column order.
enum class AngleOrder {
    mt_pt_tl,
    pt_mt_tl,
};

/// Corner order of the quads in a landmark file, as a permutation onto the
/// canonical TL, TR, BL, BR storage order.
struct CornerOrder {
    std::array<int, 4> to_canonical{0, 1, 2, 3};

    static CornerOrder canonical() { return {}; }

    /// Parses an order like "tl,tr,bl,br" (case-insensitive, each corner
    /// exactly once).
    static CornerOrder parse(std::string_view text) {
        CornerOrder order;
        std::array<bool, 4> seen{};
        std::size_t slot = 0;
        std::string token;
        std::istringstream stream{std::string(text)};
        while (std::getline(stream, token, ',')) {
            int canonical = -1;
            std::string lower;
            for (char c : token) {
                if (c != ' ' && c != '\t') lower.push_back(static_cast<char>(std::tolower(c)));
            }
            if (lower == "tl") canonical = kTopLeft;
            else if (lower == "tr") canonical = kTopRight;
            else if (lower == "bl") canonical = kBottomLeft;
            else if (lower == "br") canonical = kBottomRight;
            if (canonical < 0 || slot >= 4 || seen[canonical]) {
                throw ConfigError("invalid corner order '" + std::string(text) +
                                  "': expected a permutation of tl,tr,bl,br");
            }
            seen[canonical] = true;
            order.to_canonical[slot++] = canonical;
        }
        if (slot != 4) {
            throw ConfigError("invalid corner order '" + std::string(text) +
                              "': expected 4 corners");
        }
        return order;
    }
};

// ============================================================================
// Low-level helpers
// ============================================================================

namespace detail {

/// Shortest decimal representation that round-trips to the same double.
inline std::string fmt_double(double value) {
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

inline std::vector<std::string> split_csv(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline double parse_double(std::string_view field, std::size_t row, std::size_t column) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(column) +
                         ": non-numeric value '" + std::string(field) + "'");
    }
    return value;
}

inline bool looks_numeric(std::string_view field) {
    double value = 0.0;
    const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
    return result.ec == std::errc{} && result.ptr == field.data() + field.size();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

}  // namespace detail

/// Writes text to a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        if (!out.flush()) {
            throw ConfigError("failed to write '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

// ============================================================================
// Landmark CSV
// ============================================================================

/// Reads a landmark CSV. Each row is an image id followed by either
/// width,height and 136 coordinates, or the 136 coordinates alone. The
/// layout flag selects interleaved vs blocked coordinate columns and the
/// corner order maps the file's quad corner order onto TL, TR, BL, BR.
///
/// Coordinates that are all within [0, 1] are treated as normalized and
/// scaled up by the image dims, which must then be present in the row; the
/// choice is flagged in the record's warnings. Rows that parse but violate
/// spine invariants are kept, with the violations recorded as warnings.
inline std::vector<DatasetRecord> read_landmark_csv(
    const std::filesystem::path& path, LandmarkLayout layout = LandmarkLayout::xy_interleaved,
    CornerOrder corner_order = CornerOrder::canonical()) {
    auto in = detail::open_input(path);

    std::vector<DatasetRecord> records;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = detail::split_csv(line);
        if (row == 1 && fields.size() >= 2 && !detail::looks_numeric(fields[1])) {
            continue;  // header
        }
        const bool with_dims = fields.size() == 1 + 2 + 2 * kNumLandmarks;
        if (!with_dims && fields.size() != 1 + 2 * kNumLandmarks) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(1 + 2 * kNumLandmarks) + " or " +
                             std::to_string(3 + 2 * kNumLandmarks) + " fields, got " +
                             std::to_string(fields.size()));
        }
        DatasetRecord record;
        record.image_id = fields[0];
        if (record.image_id.empty()) {
            throw ParseError("row " + std::to_string(row) + ": missing image id");
        }

        std::size_t column = 1;
        if (with_dims) {
            record.dims.width =
                static_cast<int>(detail::parse_double(fields[column], row, column + 1));
            ++column;
            record.dims.height =
                static_cast<int>(detail::parse_double(fields[column], row, column + 1));
            ++column;
        }

        std::array<double, 2 * kNumLandmarks> values{};
        for (std::size_t i = 0; i < values.size(); ++i, ++column) {
            values[i] = detail::parse_double(fields[column], row, column + 1);
        }

        std::array<Point2, kNumLandmarks> points{};
        for (int p = 0; p < kNumLandmarks; ++p) {
            if (layout == LandmarkLayout::xy_interleaved) {
                points[p] = {values[2 * p], values[2 * p + 1]};
            } else {
                points[p] = {values[p], values[kNumLandmarks + p]};
            }
        }

        bool normalized = true;
        for (const auto& p : points) {
            if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
                normalized = false;
                break;
            }
        }
        if (normalized) {
            if (!with_dims) {
                throw ValidationError("row " + std::to_string(row) +
                                      ": coordinates look normalized but the row carries no "
                                      "image dims to denormalize with");
            }
            for (auto& p : points) {
                p.x *= record.dims.width;
                p.y *= record.dims.height;
            }
            record.warnings.emplace_back(
                "coordinates were normalized; denormalized using image dims");
        }

        SpineLandmarks spine;
        spine.vertebrae.resize(kNumVertebrae);
        for (int v = 0; v < kNumVertebrae; ++v) {
            for (int s = 0; s < 4; ++s) {
                spine.vertebrae[v].corners[corner_order.to_canonical[s]] = points[4 * v + s];
            }
        }
        if (!with_dims) {
            double max_x = 0.0, max_y = 0.0;
            for (const auto& p : points) {
                max_x = std::max(max_x, p.x);
                max_y = std::max(max_y, p.y);
            }
            record.dims = {static_cast<int>(std::ceil(max_x)), static_cast<int>(std::ceil(max_y))};
            record.warnings.emplace_back("image dims estimated from landmark extents");
        }
        for (auto& issue : validate(spine)) {
            record.warnings.push_back("validation: " + issue);
        }
        record.landmarks = std::move(spine);
        records.push_back(std::move(record));
    }
    return records;
}

/// Writes records with landmarks back out, dims included, in canonical
/// corner order.
inline void write_landmark_csv(const std::vector<DatasetRecord>& records,
                               const std::filesystem::path& path,
                               LandmarkLayout layout = LandmarkLayout::xy_interleaved) {
    std::ostringstream out;
    out << "image_id,width,height";
    if (layout == LandmarkLayout::xy_interleaved) {
        for (int p = 0; p < kNumLandmarks; ++p) out << ",x" << p << ",y" << p;
    } else {
        for (int p = 0; p < kNumLandmarks; ++p) out << ",x" << p;
        for (int p = 0; p < kNumLandmarks; ++p) out << ",y" << p;
    }
    out << '\n';
    for (const auto& record : records) {
        if (!record.landmarks) {
            throw ValidationError("record '" + record.image_id + "' has no landmarks to write");
        }
        out << record.image_id << ',' << record.dims.width << ',' << record.dims.height;
        std::array<Point2, kNumLandmarks> points{};
        for (int v = 0; v < kNumVertebrae; ++v) {
            for (int s = 0; s < 4; ++s) {
                points[4 * v + s] = record.landmarks->vertebrae[v].corners[s];
            }
        }
        if (layout == LandmarkLayout::xy_interleaved) {
            for (const auto& p : points) {
                out << ',' << detail::fmt_double(p.x) << ',' << detail::fmt_double(p.y);
            }
        } else {
            for (const auto& p : points) out << ',' << detail::fmt_double(p.x);
            for (const auto& p : points) out << ',' << detail::fmt_double(p.y);
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

// ============================================================================
// Angle CSV
// ============================================================================

/// Reads ground-truth or predicted angles: image id plus at least three
/// numeric columns, reordered into canonical (MT, PT, TL). Extra columns
/// (e.g. the selected vertebra indices written by the angles command) are
/// ignored.
inline std::map<std::string, CobbTriple> read_angles_csv(const std::filesystem::path& path,
                                                         AngleOrder order = AngleOrder::mt_pt_tl) {
    auto in = detail::open_input(path);
    std::map<std::string, CobbTriple> angles;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = detail::split_csv(line);
        if (row == 1 && fields.size() >= 2 && !detail::looks_numeric(fields[1])) {
            continue;
        }
        if (fields.size() < 4) {
            throw ParseError("row " + std::to_string(row) +
                             ": expected image id and 3 angle columns, got " +
                             std::to_string(fields.size()) + " fields");
        }
        if (fields[0].empty()) {
            throw ParseError("row " + std::to_string(row) + ": missing image id");
        }
        std::array<double, 3> a{};
        for (int i = 0; i < 3; ++i) {
            a[i] = detail::parse_double(fields[1 + i], row, 2 + i);
        }
        CobbTriple triple;
        if (order == AngleOrder::mt_pt_tl) {
            triple.mt = a[0];
            triple.pt = a[1];
            triple.tl = a[2];
        } else {
            triple.pt = a[0];
            triple.mt = a[1];
            triple.tl = a[2];
        }
        if (!angles.emplace(fields[0], triple).second) {
            throw ParseError("row " + std::to_string(row) + ": duplicate image id '" + fields[0] +
                             "'");
        }
    }
    return angles;
}

/// Writes angles in canonical order plus the selected vertebra pair and the
/// S-shape flag for audit.
inline void write_angles_csv(const std::vector<std::pair<std::string, CobbTriple>>& angles,
                             const std::filesystem::path& path) {
    std::ostringstream out;
    out << "image_id,mt,pt,tl,upper_idx,lower_idx,s_shaped\n";
    for (const auto& [id, t] : angles) {
        out << id << ',' << detail::fmt_double(t.mt) << ',' << detail::fmt_double(t.pt) << ','
            << detail::fmt_double(t.tl) << ',' << t.upper_idx << ',' << t.lower_idx << ','
            << (t.s_shaped ? 1 : 0) << '\n';
    }
    write_text_atomic(path, out.str());
}

// ============================================================================
// Detection interchange (versioned JSON)
// ============================================================================

inline constexpr std::string_view kPredictionFormat = "cobbkit-predictions";
inline constexpr int kPredictionVersion = 1;

inline void validate_prediction(const PredictionRecord& record) {
    if (record.image_id.empty()) {
        throw ValidationError("prediction record with empty image id");
    }
    if (record.detections.size() != record.landmarks_norm.size()) {
        throw ValidationError("image '" + record.image_id + "': " +
                              std::to_string(record.detections.size()) + " detections but " +
                              std::to_string(record.landmarks_norm.size()) + " landmark quads");
    }
    for (const auto& det : record.detections) {
        if (det.score < 0.0 || det.score > 1.0) {
            throw ValidationError("image '" + record.image_id + "': detection score outside [0,1]");
        }
        if (!(det.box.x_min < det.box.x_max) || !(det.box.y_min < det.box.y_max)) {
            throw ValidationError("image '" + record.image_id + "': empty detection box");
        }
    }
    for (const auto& quad : record.landmarks_norm) {
        for (const auto& p : quad) {
            if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
                throw ValidationError("image '" + record.image_id +
                                      "': normalized landmark outside [0,1]");
            }
        }
    }
}

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
    try {
        if (doc.value("format", "") != kPredictionFormat) {
            throw ParseError("'" + path.string() + "': not a " + std::string(kPredictionFormat) +
                             " file");
        }
        if (doc.value("version", -1) != kPredictionVersion) {
            throw ParseError("'" + path.string() + "': schema version " +
                             doc.at("version").dump() + " != supported version " +
                             std::to_string(kPredictionVersion));
        }
        std::vector<PredictionRecord> records;
        for (const auto& image : doc.at("images")) {
            PredictionRecord record;
            record.image_id = image.at("image_id").get<std::string>();
            record.dims.width = image.at("width").get<int>();
            record.dims.height = image.at("height").get<int>();
            record.crop_offset = image.value("crop_offset", 0);
            for (const auto& det : image.at("detections")) {
                const auto& box = det.at("box");
                record.detections.push_back(
                    {{box.at(0).get<double>(), box.at(1).get<double>(), box.at(2).get<double>(),
                      box.at(3).get<double>()},
                     det.value("score", 1.0)});
                std::array<Point2, 4> quad{};
                const auto& lm = det.at("landmarks");
                if (lm.size() != 4) {
                    throw ValidationError("image '" + record.image_id +
                                          "': expected 4 landmarks per detection");
                }
                for (int s = 0; s < 4; ++s) {
                    quad[s] = {lm.at(s).at(0).get<double>(), lm.at(s).at(1).get<double>()};
                }
                record.landmarks_norm.push_back(quad);
            }
            validate_prediction(record);
            records.push_back(std::move(record));
        }
        return records;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

inline void write_predictions(const std::vector<PredictionRecord>& records,
                              const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["format"] = kPredictionFormat;
    doc["version"] = kPredictionVersion;
    auto& images = doc["images"] = nlohmann::json::array();
    for (const auto& record : records) {
        validate_prediction(record);
        nlohmann::json image;
        image["image_id"] = record.image_id;
        image["width"] = record.dims.width;
        image["height"] = record.dims.height;
        image["crop_offset"] = record.crop_offset;
        auto& dets = image["detections"] = nlohmann::json::array();
        for (std::size_t i = 0; i < record.detections.size(); ++i) {
            const auto& det = record.detections[i];
            nlohmann::json entry;
            entry["box"] = {det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max};
            entry["score"] = det.score;
            auto& lm = entry["landmarks"] = nlohmann::json::array();
            for (const auto& p : record.landmarks_norm[i]) {
                lm.push_back({p.x, p.y});
            }
            dets.push_back(std::move(entry));
        }
        images.push_back(std::move(image));
    }
    write_text_atomic(path, doc.dump(2) + "\n");
}

// ============================================================================
// Evaluation reports and boxes
// ============================================================================

inline void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["smape"] = report.smape;
    doc["variant"] = report.variant == SmapeVariant::challenge ? "challenge" : "textbook";
    doc["n_images"] = report.n_images;
    doc["n_excluded"] = report.n_excluded;
    doc["mae_per_angle"] = {{"mt", report.mae_per_angle[0]},
                            {"pt", report.mae_per_angle[1]},
                            {"tl", report.mae_per_angle[2]}};
    auto& rows = doc["per_image"] = nlohmann::json::array();
    for (const auto& e : report.per_image) {
        rows.push_back({{"image_id", e.image_id},
                        {"numerator", e.numerator},
                        {"denominator", e.denominator},
                        {"ratio", e.ratio},
                        {"excluded", e.excluded}});
    }
    write_text_atomic(path, doc.dump(2) + "\n");
}

inline void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "image_id,numerator,denominator,ratio,excluded\n";
    for (const auto& e : report.per_image) {
        out << e.image_id << ',' << detail::fmt_double(e.numerator) << ','
            << detail::fmt_double(e.denominator) << ',' << detail::fmt_double(e.ratio) << ','
            << (e.excluded ? 1 : 0) << '\n';
    }
    write_text_atomic(path, out.str());
}

inline void write_boxes_csv(
    const std::vector<std::pair<std::string, std::vector<BoundingBox>>>& boxes,
    const std::filesystem::path& path) {
    std::ostringstream out;
    out << "image_id,vertebra,x_min,y_min,x_max,y_max\n";
    for (const auto& [id, image_boxes] : boxes) {
        for (std::size_t v = 0; v < image_boxes.size(); ++v) {
            const auto& b = image_boxes[v];
            out << id << ',' << v << ',' << detail::fmt_double(b.x_min) << ','
                << detail::fmt_double(b.y_min) << ',' << detail::fmt_double(b.x_max) << ','
                << detail::fmt_double(b.y_max) << '\n';
        }
    }
    write_text_atomic(path, out.str());
}

}  // namespace cobbkit
