#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <cobbkit/errors.hpp>
#include <cobbkit/geometry.hpp>

namespace cobbkit {

/// Pairwise tilt angles between vertebrae, in degrees. Symmetric, zero
/// diagonal, every entry in [0, 90].
using AngleMatrix = std::array<std::array<double, kNumVertebrae>, kNumVertebrae>;

/// The three Cobb angles of one image plus the vertebra pair selected for the
/// main curve. upper_idx/lower_idx are the row/column argmax of the angle
/// matrix and are reported as selected, without reordering top-to-bottom.
struct CobbTriple {
    double mt = 0.0;  ///< Main Thoracic, degrees
    double pt = 0.0;  ///< Proximal Thoracic, degrees
    double tl = 0.0;  ///< Thoracolumbar/Lumbar, degrees
    int upper_idx = 0;
    int lower_idx = 0;
    bool s_shaped = false;
};

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;

/// Angle in degrees between two slope vectors, with the cosine clipped to
/// [0, 1] so anti-parallel vectors read as 90 degrees.
inline double slope_angle_deg(const Vec2& a, double norm_a, const Vec2& b, double norm_b) {
    const double cosine = dot(a, b) / (norm_a * norm_b);
    return std::acos(std::clamp(cosine, 0.0, 1.0)) * kDegPerRad;
}

/// Pairwise angles between all vertebra slope vectors.
/// Requires a 17-vertebra spine with nonzero slopes.
inline AngleMatrix angle_matrix(const SpineLandmarks& spine) {
    if (spine.vertebrae.size() != static_cast<std::size_t>(kNumVertebrae)) {
        throw ValidationError("angle matrix requires exactly " + std::to_string(kNumVertebrae) +
                              " vertebrae, got " + std::to_string(spine.vertebrae.size()));
    }
    std::array<Vec2, kNumVertebrae> dirs;
    std::array<double, kNumVertebrae> norms;
    for (int i = 0; i < kNumVertebrae; ++i) {
        dirs[i] = direction_vector(spine.vertebrae[i]);
        norms[i] = dirs[i].norm();
    }
    AngleMatrix m{};
    for (int i = 0; i < kNumVertebrae; ++i) {
        m[i][i] = 0.0;
        for (int j = i + 1; j < kNumVertebrae; ++j) {
            const double angle = slope_angle_deg(dirs[i], norms[i], dirs[j], norms[j]);
            m[i][j] = angle;
            m[j][i] = angle;
        }
    }
    return m;
}

/// Whether the spine midline crosses the chord between its endpoints.
///
/// For each of the first 32 midline points, the residual
///   r_k = (y_k - y_33)/(y_0 - y_33) - (x_k - x_33)/(x_0 - x_33)
/// measures which side of the chord the point falls on. The midline is
/// S-shaped iff the residuals carry mixed signs, detected by comparing the
/// pairwise sum of products against the sum of their absolute values.
///
/// When the chord is degenerate in x or y the ratio form divides by zero;
/// the residuals fall back to the signed cross product of the chord with
/// each point, which preserves the one-side test.
inline bool is_s_shape(std::span<const Point2> midline, double eps = 1e-4) {
    if (midline.size() < 4) {
        throw ValidationError("midline too short for the S-shape test");
    }
    const Point2& first = midline.front();
    const Point2& last = midline.back();
    const double dx = first.x - last.x;
    const double dy = first.y - last.y;

    const std::size_t n = midline.size() - 2;
    std::vector<double> residuals(n);
    if (dx != 0.0 && dy != 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            residuals[k] = (midline[k].y - last.y) / dy - (midline[k].x - last.x) / dx;
        }
    } else {
        const Vec2 chord = last - first;
        for (std::size_t k = 0; k < n; ++k) {
            residuals[k] = cross(chord, midline[k] - first);
        }
    }

    double sum = 0.0;
    double abs_sum = 0.0;
    for (double r : residuals) {
        sum += r;
        abs_sum += std::abs(r);
    }
    // sum_{k,l} r_k r_l == (sum r)^2 and sum_{k,l} |r_k r_l| == (sum |r|)^2
    return std::abs(sum * sum - abs_sum * abs_sum) > eps;
}

/// Computes the MT, PT and TL/L Cobb angles of a validated spine.
///
/// MT is the largest entry of the angle matrix, located by taking each row's
/// maximum and then the maximal row (ties resolved to the lowest index). For
/// a C-shaped spine PT and TL are the angles between the selected pair and
/// the top/bottom vertebrae. For an S-shaped spine the branch depends on
/// whether the selected pair sits in the upper half of the image: if the sum
/// of its top-midpoint y values is below the image height, PT is the largest
/// angle between the upper vertebra and anything above it, and TL the
/// largest between the lower vertebra and anything below it; otherwise both
/// secondary angles are searched above the selected pair.
inline CobbTriple cobb_angles(const SpineLandmarks& spine, const ImageDims& dims) {
    const AngleMatrix m = angle_matrix(spine);

    std::array<int, kNumVertebrae> row_argmax{};
    std::array<double, kNumVertebrae> row_max{};
    for (int i = 0; i < kNumVertebrae; ++i) {
        int best_j = 0;
        for (int j = 1; j < kNumVertebrae; ++j) {
            if (m[i][j] > m[i][best_j]) best_j = j;
        }
        row_argmax[i] = best_j;
        row_max[i] = m[i][best_j];
    }
    int upper = 0;
    for (int i = 1; i < kNumVertebrae; ++i) {
        if (row_max[i] > row_max[upper]) upper = i;
    }
    const int lower = row_argmax[upper];

    CobbTriple out;
    out.mt = m[upper][lower];
    out.upper_idx = upper;
    out.lower_idx = lower;
    out.s_shaped = is_s_shape(spine_midline(spine));

    if (!out.s_shaped) {
        out.pt = m[0][upper];
        out.tl = m[kNumVertebrae - 1][lower];
        return out;
    }

    const double upper_top_y = vertebra_midpoints(spine.vertebrae[upper]).top.y;
    const double lower_top_y = vertebra_midpoints(spine.vertebrae[lower]).top.y;
    if (upper_top_y + lower_top_y < static_cast<double>(dims.height)) {
        // Curve in the upper half: search above the upper vertebra and below
        // the lower one.
        for (int j = 0; j <= upper; ++j) out.pt = std::max(out.pt, m[upper][j]);
        for (int j = lower; j < kNumVertebrae; ++j) out.tl = std::max(out.tl, m[lower][j]);
    } else {
        // Curve in the lower half: both secondary angles live above the pair.
        int k = 0;
        for (int j = 0; j <= upper; ++j) {
            if (m[upper][j] > out.pt) {
                out.pt = m[upper][j];
                k = j;
            }
        }
        for (int j = 0; j <= k; ++j) out.tl = std::max(out.tl, m[k][j]);
    }
    return out;
}

}  // namespace cobbkit
