#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <cobbkit/cobb.hpp>
#include <cobbkit/errors.hpp>
#include <cobbkit/geometry.hpp>
#include <cobbkit/io.hpp>
#include <cobbkit/postprocess.hpp>

namespace cobbkit {

// ============================================================================
// Spine generation
// ============================================================================

/// Horizontal midline offset x(t) from the image center, parameterized by
/// t in [-1, 1] spanning the vertebra centers top to bottom.
struct MidlineSpec {
    enum class Kind { polynomial, sinusoid };

    Kind kind = Kind::polynomial;
    std::vector<double> coeffs{0.0};  ///< polynomial in t, ascending powers
    double amplitude = 0.0;           ///< sinusoid: amplitude * sin(pi*periods*t + phase)
    double periods = 1.0;
    double phase = 0.0;

    [[nodiscard]] double offset_at(double t) const {
        if (kind == Kind::polynomial) {
            double acc = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 0;) acc = coeffs[i] + t * acc;
            return acc;
        }
        return amplitude * std::sin(std::numbers::pi * periods * t + phase);
    }

    /// d(offset)/dt.
    [[nodiscard]] double slope_at(double t) const {
        if (kind == Kind::polynomial) {
            double acc = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 1;) {
                acc = static_cast<double>(i) * coeffs[i] + t * acc;
            }
            return acc;
        }
        return amplitude * std::numbers::pi * periods *
               std::cos(std::numbers::pi * periods * t + phase);
    }
};

struct SpineParams {
    ImageDims dims{900, 3000};
    double vertebra_width = 120.0;
    double vertebra_height = 90.0;
    double top_margin_frac = 0.08;     ///< image fraction above the first center
    double bottom_margin_frac = 0.08;  ///< image fraction below the last center
    MidlineSpec midline{};
    /// Prescribed per-vertebra tilts in degrees (17 values); empty means
    /// derive tilts from the midline tangent.
    std::vector<double> tilts_deg;
    double noise_sigma = 0.0;  ///< Gaussian pixel noise on every landmark coordinate
    std::uint64_t seed = 0;
};

/// A generated spine with its analytically known ground truth. The oracle
/// triple is computed from the prescribed tilts and the noise-free geometry;
/// noise applies to the landmarks only.
struct SynthSpine {
    SpineLandmarks spine;
    ImageDims dims;
    CobbTriple oracle;
    std::array<double, kNumVertebrae> tilts_deg{};
};

// ============================================================================
// Reference Cobb computation (test oracle)
// ============================================================================
//
// A deliberately separate brute-force implementation of the angle algorithm:
// global all-pairs maximum instead of row-maxima, literal pairwise residual
// sums in the S-test, and directly evaluated branches. The cobb module is
// tested against this path, never against itself.

namespace reference {

inline double pair_angle_deg(const Vec2& a, double norm_a, const Vec2& b, double norm_b) {
    const double cosine = (a.x * b.x + a.y * b.y) / (norm_a * norm_b);
    return std::acos(std::clamp(cosine, 0.0, 1.0)) * (180.0 / std::numbers::pi);
}

inline bool midline_crosses_chord(std::span<const Point2> midline, double eps = 1e-4) {
    const Point2& first = midline.front();
    const Point2& last = midline.back();
    const std::size_t n = midline.size() - 2;
    std::vector<double> residuals(n);
    if (first.x - last.x != 0.0 && first.y - last.y != 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            residuals[k] = (midline[k].y - last.y) / (first.y - last.y) -
                           (midline[k].x - last.x) / (first.x - last.x);
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            residuals[k] = (last.x - first.x) * (midline[k].y - first.y) -
                           (last.y - first.y) * (midline[k].x - first.x);
        }
    }
    double pair_sum = 0.0;
    double abs_pair_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            pair_sum += residuals[k] * residuals[l];
            abs_pair_sum += std::abs(residuals[k] * residuals[l]);
        }
    }
    return std::abs(pair_sum - abs_pair_sum) > eps;
}

/// Brute-force Cobb triple from slope vectors and the 34-point midline.
inline CobbTriple cobb_brute_force(std::span<const Vec2> dirs, std::span<const Point2> midline,
                                   const ImageDims& dims) {
    const int n = static_cast<int>(dirs.size());
    std::vector<double> norms(dirs.size());
    for (int i = 0; i < n; ++i) norms[i] = std::sqrt(dirs[i].x * dirs[i].x + dirs[i].y * dirs[i].y);

    auto angle = [&](int i, int j) {
        if (i > j) std::swap(i, j);  // evaluate pairs exactly as the matrix fills them
        return pair_angle_deg(dirs[i], norms[i], dirs[j], norms[j]);
    };

    CobbTriple out;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = angle(i, j);
            if (a > best) {
                best = a;
                out.upper_idx = i;
                out.lower_idx = j;
            }
        }
    }
    out.mt = best;
    out.s_shaped = midline_crosses_chord(midline);

    const int upper = out.upper_idx;
    const int lower = out.lower_idx;
    if (!out.s_shaped) {
        out.pt = angle(0, upper);
        out.tl = angle(n - 1, lower);
        return out;
    }
    const double y_sum = midline[2 * static_cast<std::size_t>(upper)].y +
                         midline[2 * static_cast<std::size_t>(lower)].y;
    if (y_sum < static_cast<double>(dims.height)) {
        for (int j = 0; j <= upper; ++j) out.pt = std::max(out.pt, angle(upper, j));
        for (int j = lower; j < n; ++j) out.tl = std::max(out.tl, angle(lower, j));
    } else {
        int k = 0;
        for (int j = 0; j <= upper; ++j) {
            if (angle(upper, j) > out.pt) {
                out.pt = angle(upper, j);
                k = j;
            }
        }
        for (int j = 0; j <= k; ++j) out.tl = std::max(out.tl, angle(k, j));
    }
    return out;
}

/// Brute-force triple straight from landmarks, with its own midpoint math.
inline CobbTriple cobb_from_landmarks(const SpineLandmarks& spine, const ImageDims& dims) {
    std::vector<Vec2> dirs;
    std::vector<Point2> midline;
    dirs.reserve(spine.vertebrae.size());
    midline.reserve(2 * spine.vertebrae.size());
    for (const auto& q : spine.vertebrae) {
        const auto& c = q.corners;
        dirs.push_back({(c[kTopRight].x + c[kBottomRight].x) / 2.0 -
                            (c[kTopLeft].x + c[kBottomLeft].x) / 2.0,
                        (c[kTopRight].y + c[kBottomRight].y) / 2.0 -
                            (c[kTopLeft].y + c[kBottomLeft].y) / 2.0});
        midline.push_back(
            {(c[kTopLeft].x + c[kTopRight].x) / 2.0, (c[kTopLeft].y + c[kTopRight].y) / 2.0});
        midline.push_back(
            {(c[kBottomLeft].x + c[kBottomRight].x) / 2.0,
             (c[kBottomLeft].y + c[kBottomRight].y) / 2.0});
    }
    return cobb_brute_force(dirs, midline, dims);
}

}  // namespace reference

// ============================================================================
// generate_spine
// ============================================================================

inline SynthSpine generate_spine(const SpineParams& params) {
    if (params.dims.width <= 0 || params.dims.height <= 0) {
        throw ConfigError("image dimensions must be positive");
    }
    if (params.vertebra_width <= 0.0 || params.vertebra_height <= 0.0) {
        throw ConfigError("vertebra size must be positive");
    }
    if (!params.tilts_deg.empty() &&
        params.tilts_deg.size() != static_cast<std::size_t>(kNumVertebrae)) {
        throw ConfigError("tilt profile must have " + std::to_string(kNumVertebrae) + " entries");
    }

    const double height = params.dims.height;
    const double y_first = params.top_margin_frac * height;
    const double y_last = (1.0 - params.bottom_margin_frac) * height;
    const double spacing = (y_last - y_first) / (kNumVertebrae - 1);
    if (spacing < params.vertebra_height) {
        throw ConfigError("overlapping vertebrae: spacing " + std::to_string(spacing) +
                          " px < vertebra height " + std::to_string(params.vertebra_height) +
                          " px");
    }
    const double y_half = (y_last - y_first) / 2.0;
    const double center_x = params.dims.width / 2.0;

    SynthSpine out;
    out.dims = params.dims;
    out.spine.vertebrae.resize(kNumVertebrae);

    std::array<Vec2, kNumVertebrae> tilt_dirs;
    std::vector<Point2> midline;
    midline.reserve(2 * kNumVertebrae);

    for (int i = 0; i < kNumVertebrae; ++i) {
        const double t = -1.0 + 2.0 * i / (kNumVertebrae - 1);
        const double cx = center_x + params.midline.offset_at(t);
        const double cy = y_first + i * spacing;

        double tilt_deg;
        if (!params.tilts_deg.empty()) {
            tilt_deg = params.tilts_deg[i];
        } else {
            // Endplates sit perpendicular to the midline tangent.
            const double dx_dy = params.midline.slope_at(t) / y_half;
            tilt_deg = -std::atan(dx_dy) * (180.0 / std::numbers::pi);
        }
        out.tilts_deg[i] = tilt_deg;

        const double rad = tilt_deg * (std::numbers::pi / 180.0);
        const double c = std::cos(rad);
        const double s = std::sin(rad);
        const double hw = params.vertebra_width / 2.0;
        const double hh = params.vertebra_height / 2.0;
        auto rotated = [&](double dx, double dy) {
            return Point2{cx + c * dx - s * dy, cy + s * dx + c * dy};
        };
        auto& quad = out.spine.vertebrae[i];
        quad.corners[kTopLeft] = rotated(-hw, -hh);
        quad.corners[kTopRight] = rotated(hw, -hh);
        quad.corners[kBottomLeft] = rotated(-hw, hh);
        quad.corners[kBottomRight] = rotated(hw, hh);

        tilt_dirs[i] = {std::cos(rad), std::sin(rad)};
        midline.push_back({cx + s * hh, cy - c * hh});  // top edge midpoint
        midline.push_back({cx - s * hh, cy + c * hh});  // bottom edge midpoint
    }

    for (const auto& quad : out.spine.vertebrae) {
        for (const auto& corner : quad.corners) {
            if (corner.x < 0.0 || corner.x > params.dims.width || corner.y < 0.0 ||
                corner.y > params.dims.height) {
                throw ConfigError("generated vertebra falls outside the image; widen the image "
                                  "or shrink the midline amplitude");
            }
        }
    }

    out.oracle = reference::cobb_brute_force(tilt_dirs, midline, params.dims);

    if (params.noise_sigma > 0.0) {
        std::mt19937_64 rng(params.seed);
        std::normal_distribution<double> noise(0.0, params.noise_sigma);
        for (auto& quad : out.spine.vertebrae) {
            for (auto& corner : quad.corners) {
                corner.x += noise(rng);
                corner.y += noise(rng);
            }
        }
    }
    return out;
}

// ============================================================================
// perturb_to_detections
// ============================================================================

/// Simulated detector degradations applied on top of a clean spine.
struct PerturbParams {
    std::string image_id = "synth";
    double pad_w = 50.0;
    double pad_h = 10.0;
    std::optional<CropSpec> crop;  ///< simulate inference-time cropping
    int n_outliers = 0;            ///< spurious boxes injected off the spine
    double outlier_offset = 300.0; ///< x displacement of injected boxes, px
    int n_drop = 0;                ///< detections removed at random
    std::uint64_t seed = 0;
};

/// Converts a spine into detector-style output: padded boxes with normalized
/// landmark quads, optionally cropped, with seeded outlier injection and
/// box drops. With default params the conversion is lossless: denormalizing
/// recovers the input landmarks up to floating error.
inline PredictionRecord perturb_to_detections(const SpineLandmarks& spine, const ImageDims& dims,
                                              const PerturbParams& params = {}) {
    PredictionRecord record;
    record.image_id = params.image_id;
    record.dims = dims;

    ImageDims det_dims = dims;
    if (params.crop) {
        const CropResult cropped = apply_crop(dims, *params.crop);
        det_dims = cropped.dims;
        record.crop_offset = cropped.top_offset;
    }

    for (const auto& quad : spine.vertebrae) {
        VertebraQuad shifted = quad;
        for (auto& corner : shifted.corners) corner.y -= record.crop_offset;
        const BoundingBox box = quad_to_gt_box(shifted, params.pad_w, params.pad_h, det_dims);
        record.detections.push_back({box, 1.0});
        record.landmarks_norm.push_back(normalize_landmarks(shifted, box));
    }

    std::mt19937_64 rng(params.seed);

    for (int d = 0; d < params.n_drop && record.detections.size() > 1; ++d) {
        std::uniform_int_distribution<std::size_t> pick(0, record.detections.size() - 1);
        const std::size_t victim = pick(rng);
        record.detections.erase(record.detections.begin() + static_cast<std::ptrdiff_t>(victim));
        record.landmarks_norm.erase(record.landmarks_norm.begin() +
                                    static_cast<std::ptrdiff_t>(victim));
    }

    for (int o = 0; o < params.n_outliers && !record.detections.empty(); ++o) {
        std::size_t at = 0;
        if (record.detections.size() >= 3) {
            std::uniform_int_distribution<std::size_t> pick(1, record.detections.size() - 2);
            at = pick(rng);
        }
        Detection spur = record.detections[at];
        double shift = params.outlier_offset;
        if (spur.box.x_max + shift > det_dims.width) shift = -shift;
        spur.box.x_min += shift;
        spur.box.x_max += shift;
        spur.box.x_min = std::max(spur.box.x_min, 0.0);
        spur.score = 0.5;
        record.detections.push_back(spur);
        record.landmarks_norm.push_back(
            {Point2{0.25, 0.25}, Point2{0.75, 0.25}, Point2{0.25, 0.75}, Point2{0.75, 0.75}});
    }

    // Detector output convention: top to bottom.
    std::vector<std::size_t> order(record.detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (record.detections[a].box.y_center() != record.detections[b].box.y_center())
            return record.detections[a].box.y_center() < record.detections[b].box.y_center();
        return record.detections[a].box.x_center() < record.detections[b].box.x_center();
    });
    PredictionRecord sorted = record;
    sorted.detections.clear();
    sorted.landmarks_norm.clear();
    for (std::size_t idx : order) {
        sorted.detections.push_back(record.detections[idx]);
        sorted.landmarks_norm.push_back(record.landmarks_norm[idx]);
    }
    return sorted;
}

}  // namespace cobbkit
