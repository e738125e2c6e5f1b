#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <cobbkit/errors.hpp>

namespace cobbkit {

/// Number of vertebrae annotated per AP image (12 thoracic + 5 lumbar).
inline constexpr int kNumVertebrae = 17;
/// Corner landmarks per image: 4 per vertebra.
inline constexpr int kNumLandmarks = 4 * kNumVertebrae;

// ============================================================================
// Primitive types
// ============================================================================

/// A point in image pixels. Origin top-left, x grows rightward, y grows
/// downward, so the topmost vertebra has the smallest y.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

/// Displacement between two points.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y); }

    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator+(const Point2& p, const Vec2& v) { return {p.x + v.x, p.y + v.y}; }
inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 2D cross product.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Canonical corner slots of a vertebra quad.
enum Corner : int {
    kTopLeft = 0,
    kTopRight = 1,
    kBottomLeft = 2,
    kBottomRight = 3,
};

/// Four corner landmarks of one vertebra, always stored in TL, TR, BL, BR
/// order. Readers for datasets with a different corner order must reorder
/// at ingestion.
struct VertebraQuad {
    std::array<Point2, 4> corners{};

    [[nodiscard]] const Point2& tl() const { return corners[kTopLeft]; }
    [[nodiscard]] const Point2& tr() const { return corners[kTopRight]; }
    [[nodiscard]] const Point2& bl() const { return corners[kBottomLeft]; }
    [[nodiscard]] const Point2& br() const { return corners[kBottomRight]; }

    bool operator==(const VertebraQuad&) const = default;
};

/// Ordered landmark set for one image, index 0 = topmost vertebra.
/// A validated spine has exactly 17 quads with strictly descending top
/// midpoints; see validate().
struct SpineLandmarks {
    std::vector<VertebraQuad> vertebrae;

    bool operator==(const SpineLandmarks&) const = default;
};

/// Axis-aligned box in image pixels; x_min < x_max, y_min < y_max when valid.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    [[nodiscard]] double width() const { return x_max - x_min; }
    [[nodiscard]] double height() const { return y_max - y_min; }
    [[nodiscard]] double x_center() const { return (x_min + x_max) / 2.0; }
    [[nodiscard]] double y_center() const { return (y_min + y_max) / 2.0; }

    [[nodiscard]] bool contains(const Point2& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }

    bool operator==(const BoundingBox&) const = default;
};

/// A detector output: box plus confidence in [0, 1].
struct Detection {
    BoundingBox box;
    double score = 1.0;
};

/// Width and height of an image in pixels.
struct ImageDims {
    int width = 0;
    int height = 0;

    [[nodiscard]] double aspect() const { return static_cast<double>(width) / height; }

    bool operator==(const ImageDims&) const = default;
};

// ============================================================================
// Validation
// ============================================================================

/// Returns a list of human-readable invariant violations; empty means valid.
inline std::vector<std::string> validate(const VertebraQuad& quad) {
    std::vector<std::string> issues;
    for (const auto& c : quad.corners) {
        if (!is_finite(c)) {
            issues.emplace_back("non-finite corner coordinate");
            return issues;
        }
    }
    if (!(quad.tl().x < quad.tr().x)) issues.emplace_back("top-left corner not left of top-right");
    if (!(quad.bl().x < quad.br().x)) issues.emplace_back("bottom-left corner not left of bottom-right");
    const double top_y = (quad.tl().y + quad.tr().y) / 2.0;
    const double bottom_y = (quad.bl().y + quad.br().y) / 2.0;
    if (!(top_y < bottom_y)) issues.emplace_back("top edge not above bottom edge");
    return issues;
}

/// Validates the whole spine: 17 quads, each quad valid, and top-edge
/// midpoints strictly increasing in y from index 0 to 16.
inline std::vector<std::string> validate(const SpineLandmarks& spine) {
    std::vector<std::string> issues;
    if (spine.vertebrae.size() != static_cast<std::size_t>(kNumVertebrae)) {
        issues.push_back("expected " + std::to_string(kNumVertebrae) + " vertebrae, got " +
                         std::to_string(spine.vertebrae.size()));
    }
    for (std::size_t i = 0; i < spine.vertebrae.size(); ++i) {
        for (const auto& issue : validate(spine.vertebrae[i])) {
            issues.push_back("vertebra " + std::to_string(i) + ": " + issue);
        }
    }
    for (std::size_t i = 1; i < spine.vertebrae.size(); ++i) {
        const auto& prev = spine.vertebrae[i - 1];
        const auto& cur = spine.vertebrae[i];
        const double prev_y = (prev.tl().y + prev.tr().y) / 2.0;
        const double cur_y = (cur.tl().y + cur.tr().y) / 2.0;
        if (!(prev_y < cur_y)) {
            issues.push_back("vertebra " + std::to_string(i) +
                             ": top midpoint not below vertebra " + std::to_string(i - 1));
        }
    }
    return issues;
}

// ============================================================================
// Operations
// ============================================================================

/// Midpoints of the four edges of a vertebra quad. Degenerate quads are
/// allowed here; callers that need a nonzero slope use direction_vector().
struct Midpoints {
    Point2 top;
    Point2 bottom;
    Point2 left;
    Point2 right;
};

inline Midpoints vertebra_midpoints(const VertebraQuad& q) {
    return {
        {(q.tl().x + q.tr().x) / 2.0, (q.tl().y + q.tr().y) / 2.0},
        {(q.bl().x + q.br().x) / 2.0, (q.bl().y + q.br().y) / 2.0},
        {(q.tl().x + q.bl().x) / 2.0, (q.tl().y + q.bl().y) / 2.0},
        {(q.tr().x + q.br().x) / 2.0, (q.tr().y + q.br().y) / 2.0},
    };
}

/// Slope vector of a vertebra: right edge midpoint minus left edge midpoint.
/// Throws ValidationError for a degenerate (zero-slope-vector) quad.
inline Vec2 direction_vector(const VertebraQuad& q) {
    const Midpoints m = vertebra_midpoints(q);
    const Vec2 v = m.right - m.left;
    if (v.x == 0.0 && v.y == 0.0) {
        throw ValidationError("degenerate vertebra: left and right edge midpoints coincide");
    }
    return v;
}

/// Builds the ground-truth box of a vertebra: the tight axis-aligned box of
/// the four corners, grown by pad_w total in width and pad_h total in height
/// (half on each side), clamped to the image. The AASCE convention uses
/// pad_w = 50 and pad_h = 10.
inline BoundingBox quad_to_gt_box(const VertebraQuad& quad, double pad_w, double pad_h,
                                  const ImageDims& dims) {
    if (pad_w < 0.0 || pad_h < 0.0) {
        throw ConfigError("box padding must be non-negative");
    }
    if (dims.width <= 0 || dims.height <= 0) {
        throw ConfigError("image dimensions must be positive");
    }
    BoundingBox tight{quad.corners[0].x, quad.corners[0].y, quad.corners[0].x, quad.corners[0].y};
    for (const auto& c : quad.corners) {
        tight.x_min = std::min(tight.x_min, c.x);
        tight.y_min = std::min(tight.y_min, c.y);
        tight.x_max = std::max(tight.x_max, c.x);
        tight.y_max = std::max(tight.y_max, c.y);
    }
    if (tight.width() == 0.0 || tight.height() == 0.0) {
        throw ValidationError("degenerate quad: zero-area tight box");
    }
    BoundingBox box{tight.x_min - pad_w / 2.0, tight.y_min - pad_h / 2.0,
                    tight.x_max + pad_w / 2.0, tight.y_max + pad_h / 2.0};
    box.x_min = std::max(box.x_min, 0.0);
    box.y_min = std::max(box.y_min, 0.0);
    box.x_max = std::min(box.x_max, static_cast<double>(dims.width));
    box.y_max = std::min(box.y_max, static_cast<double>(dims.height));
    if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max)) {
        throw ValidationError("padded box collapsed after clamping to image bounds");
    }
    return box;
}

/// Maps the quad corners into the box-local [0,1]x[0,1] frame.
/// All corners must lie inside the box.
inline std::array<Point2, 4> normalize_landmarks(const VertebraQuad& quad, const BoundingBox& box) {
    if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max)) {
        throw ValidationError("invalid bounding box");
    }
    std::array<Point2, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        const Point2& c = quad.corners[i];
        if (!box.contains(c)) {
            throw ValidationError("corner outside its bounding box");
        }
        out[i] = {(c.x - box.x_min) / box.width(), (c.y - box.y_min) / box.height()};
    }
    return out;
}

/// Inverse of normalize_landmarks, then shifts y down by crop_offset (the
/// number of rows removed from the top of the image before detection) so the
/// result lives in original-image coordinates.
inline VertebraQuad denormalize_landmarks(const std::array<Point2, 4>& norm, const BoundingBox& box,
                                          double crop_offset = 0.0) {
    if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max)) {
        throw ValidationError("invalid bounding box");
    }
    VertebraQuad quad;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point2& p = norm[i];
        if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
            throw ValidationError("normalized coordinate outside [0, 1]");
        }
        quad.corners[i] = {box.x_min + p.x * box.width(),
                           box.y_min + p.y * box.height() + crop_offset};
    }
    return quad;
}

/// The 34-point midline: top and bottom edge midpoints of each vertebra,
/// ordered [top_0, bottom_0, top_1, bottom_1, ...]. Input to the S-shape test.
inline std::vector<Point2> spine_midline(const SpineLandmarks& spine) {
    std::vector<Point2> midline;
    midline.reserve(2 * spine.vertebrae.size());
    for (const auto& quad : spine.vertebrae) {
        const Midpoints m = vertebra_midpoints(quad);
        midline.push_back(m.top);
        midline.push_back(m.bottom);
    }
    return midline;
}

}  // namespace cobbkit
