#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <cobbkit/errors.hpp>
#include <cobbkit/geometry.hpp>

namespace cobbkit {

// ============================================================================
// Cropping
// ============================================================================

/// Fractions of the image height to remove from the top and bottom.
struct CropSpec {
    double c_t = 0.0;
    double c_b = 0.0;
};

/// Scales the reference crop fractions by the ratio of this image's aspect
/// ratio (width/height) to the reference image's. The reference fractions
/// default to the hand-tuned 0.18 (top) and 0.21 (bottom); the reference
/// aspect ratio has no default and must come from configuration.
inline CropSpec compute_crop(double aspect, double ref_aspect, double ct0 = 0.18,
                             double cb0 = 0.21) {
    if (aspect <= 0.0 || ref_aspect <= 0.0) {
        throw ConfigError("aspect ratios must be positive");
    }
    if (ct0 < 0.0 || cb0 < 0.0) {
        throw ConfigError("crop fractions must be non-negative");
    }
    const CropSpec crop{ct0 * aspect / ref_aspect, cb0 * aspect / ref_aspect};
    if (crop.c_t + crop.c_b >= 1.0) {
        throw ConfigError("crop fractions remove the whole image: c_t=" +
                          std::to_string(crop.c_t) + " c_b=" + std::to_string(crop.c_b));
    }
    return crop;
}

struct CropResult {
    ImageDims dims;      ///< dimensions after cropping
    int top_offset = 0;  ///< rows removed from the top
};

/// Applies a crop spec to image dimensions. Offsets are rounded to whole
/// pixels; width is unchanged.
inline CropResult apply_crop(const ImageDims& dims, const CropSpec& crop) {
    if (dims.width <= 0 || dims.height <= 0) {
        throw ConfigError("image dimensions must be positive");
    }
    if (crop.c_t < 0.0 || crop.c_b < 0.0) {
        throw ConfigError("crop fractions must be non-negative");
    }
    const int top = static_cast<int>(std::lround(crop.c_t * dims.height));
    const int bottom = static_cast<int>(std::lround(crop.c_b * dims.height));
    const int new_height = dims.height - top - bottom;
    if (new_height <= 0) {
        throw ConfigError("crop leaves an empty image: height " + std::to_string(dims.height) +
                          ", removed " + std::to_string(top + bottom));
    }
    return {{dims.width, new_height}, top};
}

// ============================================================================
// Outlier rejection
// ============================================================================

/// Which width the half-width outlier threshold uses. The candidate box's
/// own width is the default reading; neighbor_mean uses the mean width of
/// the neighbors it is tested against.
enum class OutlierWidthRule {
    own_width,
    neighbor_mean,
};

/// Result of outlier rejection. All index lists refer to the caller's input
/// vector; order lists them sorted by box y-center (the canonical order the
/// test runs in).
struct OutlierSplit {
    std::vector<std::size_t> order;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> rejected;
};

/// Flags detections whose x-center is more than half a box width away from
/// the x-centers of both vertical neighbors; the first and last boxes are
/// tested against their single neighbor. All marks are computed against the
/// original neighbor set in one pass, then applied at once, so removals do
/// not cascade. A single detection has no neighbors and is always kept.
inline OutlierSplit reject_outliers(std::span<const Detection> dets,
                                    OutlierWidthRule rule = OutlierWidthRule::own_width) {
    if (dets.empty()) {
        throw ValidationError("outlier rejection requires at least one detection");
    }
    OutlierSplit split;
    split.order.resize(dets.size());
    std::iota(split.order.begin(), split.order.end(), std::size_t{0});
    std::stable_sort(split.order.begin(), split.order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a].box.y_center() != dets[b].box.y_center())
            return dets[a].box.y_center() < dets[b].box.y_center();
        return dets[a].box.x_center() < dets[b].box.x_center();
    });

    const std::size_t n = split.order.size();
    auto far_from = [&](std::size_t k, std::size_t neighbor) {
        const Detection& det = dets[split.order[k]];
        const Detection& other = dets[split.order[neighbor]];
        const double width = rule == OutlierWidthRule::own_width
                                 ? det.box.width()
                                 : (n >= 3 && k > 0 && k + 1 < n)
                                       ? (dets[split.order[k - 1]].box.width() +
                                          dets[split.order[k + 1]].box.width()) / 2.0
                                       : other.box.width();
        return std::abs(det.box.x_center() - other.box.x_center()) > width / 2.0;
    };

    for (std::size_t k = 0; k < n; ++k) {
        bool outlier;
        if (n == 1) {
            outlier = false;
        } else if (k == 0) {
            outlier = far_from(k, k + 1);
        } else if (k + 1 == n) {
            outlier = far_from(k, k - 1);
        } else {
            outlier = far_from(k, k - 1) && far_from(k, k + 1);
        }
        (outlier ? split.rejected : split.kept).push_back(split.order[k]);
    }
    return split;
}

// ============================================================================
// Vertebra count enforcement
// ============================================================================

/// Forces a top-to-bottom ordered list to the target length: extra elements
/// are dropped starting from the bottom, missing ones are filled by
/// duplicating the bottom element.
template <typename T>
std::vector<T> enforce_count(std::vector<T> items, std::size_t target = kNumVertebrae) {
    if (items.empty()) {
        throw ValidationError("count enforcement requires at least one element");
    }
    if (items.size() > target) {
        items.resize(target);
    } else {
        while (items.size() < target) items.push_back(items.back());
    }
    return items;
}

// ============================================================================
// Polynomial smoothing
// ============================================================================

/// Least-squares polynomial x = P((y - y_center)/y_scale). Coefficients are
/// stored in ascending powers of the centered, scaled variable; raw pixel y
/// at degree 6 is far too ill-conditioned to fit directly.
struct PolyFit {
    int degree = 0;
    std::vector<double> coeffs;
    double y_center = 0.0;
    double y_scale = 1.0;
    double residual_norm = 0.0;

    /// Evaluates the fitted polynomial at a raw pixel y.
    [[nodiscard]] double operator()(double y) const {
        const double t = (y - y_center) / y_scale;
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            acc = coeffs[i] + t * acc;
        }
        return acc;
    }
};

/// Fits x as a polynomial of y by least squares over the given points,
/// solved with a rank-revealing QR decomposition of the Vandermonde matrix
/// in the centered/scaled variable. Requires at least degree+1 points with
/// at least degree+1 distinct y values.
inline PolyFit fit_polynomial(std::span<const Point2> points, int degree) {
    if (degree < 1) {
        throw ConfigError("polynomial degree must be at least 1");
    }
    const std::size_t need = static_cast<std::size_t>(degree) + 1;
    if (points.size() < need) {
        throw ValidationError("need at least " + std::to_string(need) + " points for degree " +
                              std::to_string(degree) + ", got " + std::to_string(points.size()));
    }
    std::set<double> distinct;
    for (const auto& p : points) distinct.insert(p.y);
    if (distinct.size() < need) {
        throw ValidationError("rank deficiency: degree " + std::to_string(degree) +
                              " fit needs " + std::to_string(need) + " distinct y values, got " +
                              std::to_string(distinct.size()));
    }

    PolyFit fit;
    fit.degree = degree;
    double mean = 0.0;
    for (const auto& p : points) mean += p.y;
    mean /= static_cast<double>(points.size());
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, std::abs(p.y - mean));
    fit.y_center = mean;
    fit.y_scale = scale > 0.0 ? scale : 1.0;

    const auto rows = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd vand(rows, degree + 1);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double t = (points[i].y - fit.y_center) / fit.y_scale;
        double power = 1.0;
        for (int j = 0; j <= degree; ++j) {
            vand(i, j) = power;
            power *= t;
        }
        rhs(i) = points[i].x;
    }
    const Eigen::VectorXd solution = vand.colPivHouseholderQr().solve(rhs);
    fit.coeffs.assign(solution.data(), solution.data() + solution.size());
    fit.residual_norm = (vand * solution - rhs).norm();
    return fit;
}

/// How smoothing groups landmarks for fitting. all_points regresses one
/// curve through all 68 points, the literal reading of the published
/// procedure; left_right_split fits the 34 left and 34 right corners
/// separately, which preserves vertebra width.
enum class SmoothMode {
    all_points,
    left_right_split,
};

struct SmoothResult {
    SpineLandmarks spine;
    std::vector<PolyFit> fits;             ///< one fit, or {left, right} when split
    std::vector<std::size_t> collapsed;    ///< quads whose left x >= right x after smoothing
    std::vector<std::string> warnings;     ///< re-validation findings
};

/// Replaces every landmark's x coordinate with the fitted polynomial value
/// at its (unchanged) y coordinate. Quads collapsed by the all-points mode
/// are flagged in the result rather than rejected.
inline SmoothResult smooth_landmarks(const SpineLandmarks& spine, int degree = 6,
                                     SmoothMode mode = SmoothMode::all_points) {
    SmoothResult result;
    result.spine = spine;

    if (mode == SmoothMode::all_points) {
        std::vector<Point2> all;
        all.reserve(spine.vertebrae.size() * 4);
        for (const auto& quad : spine.vertebrae) {
            all.insert(all.end(), quad.corners.begin(), quad.corners.end());
        }
        const PolyFit fit = fit_polynomial(all, degree);
        for (auto& quad : result.spine.vertebrae) {
            for (auto& corner : quad.corners) corner.x = fit(corner.y);
        }
        result.fits.push_back(fit);
    } else {
        std::vector<Point2> left, right;
        left.reserve(spine.vertebrae.size() * 2);
        right.reserve(spine.vertebrae.size() * 2);
        for (const auto& quad : spine.vertebrae) {
            left.push_back(quad.tl());
            left.push_back(quad.bl());
            right.push_back(quad.tr());
            right.push_back(quad.br());
        }
        const PolyFit left_fit = fit_polynomial(left, degree);
        const PolyFit right_fit = fit_polynomial(right, degree);
        for (auto& quad : result.spine.vertebrae) {
            quad.corners[kTopLeft].x = left_fit(quad.tl().y);
            quad.corners[kBottomLeft].x = left_fit(quad.bl().y);
            quad.corners[kTopRight].x = right_fit(quad.tr().y);
            quad.corners[kBottomRight].x = right_fit(quad.br().y);
        }
        result.fits.push_back(left_fit);
        result.fits.push_back(right_fit);
    }

    for (std::size_t i = 0; i < result.spine.vertebrae.size(); ++i) {
        const auto& quad = result.spine.vertebrae[i];
        if (quad.tl().x >= quad.tr().x || quad.bl().x >= quad.br().x) {
            result.collapsed.push_back(i);
        }
    }
    result.warnings = validate(result.spine);
    return result;
}

}  // namespace cobbkit
