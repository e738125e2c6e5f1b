#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <cobbkit/cobb.hpp>
#include <cobbkit/errors.hpp>

namespace cobbkit {

/// Which SMAPE definition to report. The challenge variant divides the sum
/// of absolute angle errors by the sum of angle magnitudes per image, with
/// no factor of 2; the textbook variant averages 2|g-p|/(g+p) over every
/// (image, angle) pair.
enum class SmapeVariant {
    challenge,
    textbook,
};

struct ImageError {
    std::string image_id;
    double numerator = 0.0;    ///< sum of |a_g - a_p| over the 3 angles
    double denominator = 0.0;  ///< sum of (a_g + a_p) over the 3 angles
    double ratio = 0.0;
    bool excluded = false;     ///< zero denominator with nonzero numerator
};

struct EvalReport {
    double smape = 0.0;                    ///< percent
    std::array<double, 3> mae_per_angle{}; ///< degrees, in MT, PT, TL order
    std::size_t n_images = 0;
    std::size_t n_excluded = 0;
    SmapeVariant variant = SmapeVariant::challenge;
    std::vector<ImageError> per_image;
};

namespace detail {

inline std::array<double, 3> angles_of(const CobbTriple& t) { return {t.mt, t.pt, t.tl}; }

inline void check_pairing(const std::map<std::string, CobbTriple>& gt,
                          const std::map<std::string, CobbTriple>& pred) {
    if (gt.empty()) {
        throw ValidationError("evaluation requires at least one image");
    }
    if (gt.size() != pred.size()) {
        throw ValidationError("ground truth has " + std::to_string(gt.size()) +
                              " images but predictions have " + std::to_string(pred.size()));
    }
    for (const auto& [id, angles] : gt) {
        if (!pred.contains(id)) {
            throw ValidationError("no prediction for image '" + id + "'");
        }
        const auto check_nonneg = [&](const CobbTriple& t, const char* which) {
            for (double a : angles_of(t)) {
                if (a < 0.0 || !std::isfinite(a)) {
                    throw ValidationError(std::string(which) + " angle out of range for image '" +
                                          id + "'");
                }
            }
        };
        check_nonneg(angles, "ground-truth");
        check_nonneg(pred.at(id), "predicted");
    }
}

}  // namespace detail

/// Symmetric mean absolute percentage error over paired angle triples, plus
/// per-image terms and per-angle mean absolute error. Images where both
/// triples are all-zero contribute a ratio of 0; images with a zero
/// denominator but nonzero numerator are excluded from the mean and flagged
/// in the per-image list.
inline EvalReport smape(const std::map<std::string, CobbTriple>& gt,
                        const std::map<std::string, CobbTriple>& pred,
                        SmapeVariant variant = SmapeVariant::challenge) {
    detail::check_pairing(gt, pred);

    EvalReport report;
    report.variant = variant;
    report.n_images = gt.size();

    double ratio_sum = 0.0;
    std::size_t included = 0;
    for (const auto& [id, gt_triple] : gt) {
        const auto g = detail::angles_of(gt_triple);
        const auto p = detail::angles_of(pred.at(id));

        ImageError err;
        err.image_id = id;
        for (int a = 0; a < 3; ++a) {
            err.numerator += std::abs(g[a] - p[a]);
            err.denominator += g[a] + p[a];
            report.mae_per_angle[a] += std::abs(g[a] - p[a]);
        }

        if (variant == SmapeVariant::challenge) {
            if (err.denominator > 0.0) {
                err.ratio = err.numerator / err.denominator;
            } else if (err.numerator == 0.0) {
                err.ratio = 0.0;
            } else {
                err.excluded = true;
            }
        } else {
            // Textbook form: mean of per-angle terms 2|g-p|/(g+p).
            double term_sum = 0.0;
            int terms = 0;
            bool bad = false;
            for (int a = 0; a < 3; ++a) {
                const double den = g[a] + p[a];
                if (den > 0.0) {
                    term_sum += 2.0 * std::abs(g[a] - p[a]) / den;
                } else if (g[a] != p[a]) {
                    bad = true;
                }
                ++terms;
            }
            if (bad) {
                err.excluded = true;
            } else {
                err.ratio = term_sum / terms;
            }
        }

        if (err.excluded) {
            ++report.n_excluded;
        } else {
            ratio_sum += err.ratio;
            ++included;
        }
        report.per_image.push_back(std::move(err));
    }

    if (included == 0) {
        throw ValidationError("every image was excluded from SMAPE (all zero denominators)");
    }
    report.smape = 100.0 * ratio_sum / static_cast<double>(included);
    for (auto& mae : report.mae_per_angle) mae /= static_cast<double>(report.n_images);
    return report;
}

/// Mean absolute error per angle, in canonical MT, PT, TL order.
inline std::array<double, 3> mae_per_angle(const std::map<std::string, CobbTriple>& gt,
                                           const std::map<std::string, CobbTriple>& pred) {
    detail::check_pairing(gt, pred);
    std::array<double, 3> mae{};
    for (const auto& [id, gt_triple] : gt) {
        const auto g = detail::angles_of(gt_triple);
        const auto p = detail::angles_of(pred.at(id));
        for (int a = 0; a < 3; ++a) mae[a] += std::abs(g[a] - p[a]);
    }
    for (auto& v : mae) v /= static_cast<double>(gt.size());
    return mae;
}

}  // namespace cobbkit
