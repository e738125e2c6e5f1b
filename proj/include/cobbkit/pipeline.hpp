#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <cobbkit/cobb.hpp>
#include <cobbkit/errors.hpp>
#include <cobbkit/geometry.hpp>
#include <cobbkit/io.hpp>
#include <cobbkit/postprocess.hpp>

namespace cobbkit {

/// Knobs of the prediction-to-angles chain.
struct PipelineOptions {
    bool outlier_rejection = true;
    OutlierWidthRule width_rule = OutlierWidthRule::own_width;
    bool smooth = false;
    SmoothMode smooth_mode = SmoothMode::all_points;
    int poly_degree = 6;
    int jobs = 1;
};

/// Per-image pipeline result, with enough of an audit trail to render the
/// stages and dump intermediates.
struct AngleOutcome {
    std::string image_id;
    CobbTriple angles;
    std::vector<std::string> warnings;

    std::vector<Detection> kept;
    std::vector<Detection> rejected;
    SpineLandmarks landmarks;                 ///< landmarks the angles were computed from
    std::optional<SpineLandmarks> presmooth;  ///< pre-smoothing landmarks, when smoothing ran
    std::vector<PolyFit> fits;                ///< fitted smoothing curves
};

namespace detail {

inline void apply_smoothing(AngleOutcome& outcome, SpineLandmarks& spine,
                            const PipelineOptions& opt) {
    outcome.presmooth = spine;
    SmoothResult smoothed = smooth_landmarks(spine, opt.poly_degree, opt.smooth_mode);
    for (std::size_t idx : smoothed.collapsed) {
        outcome.warnings.push_back("smoothing collapsed vertebra " + std::to_string(idx) +
                                   " (left x >= right x)");
    }
    spine = std::move(smoothed.spine);
    outcome.fits = std::move(smoothed.fits);
}

}  // namespace detail

/// Full inference-side chain for one image: canonical sort, outlier
/// rejection, count enforcement on (detection, landmark-quad) pairs, mapping
/// back to original-image coordinates, optional smoothing, Cobb angles.
inline AngleOutcome angles_from_prediction(const PredictionRecord& record,
                                           const PipelineOptions& opt) {
    validate_prediction(record);
    if (record.detections.empty()) {
        throw ValidationError("image '" + record.image_id + "' has no detections");
    }

    AngleOutcome outcome;
    outcome.image_id = record.image_id;

    const OutlierSplit split = reject_outliers(record.detections, opt.width_rule);
    const std::vector<std::size_t>& kept_idx = opt.outlier_rejection ? split.kept : split.order;
    if (opt.outlier_rejection) {
        for (std::size_t idx : split.rejected) outcome.rejected.push_back(record.detections[idx]);
    }
    if (kept_idx.empty()) {
        throw ValidationError("image '" + record.image_id +
                              "': every detection was rejected as an outlier");
    }

    struct Pair {
        Detection det;
        std::array<Point2, 4> quad;
    };
    std::vector<Pair> pairs;
    pairs.reserve(kept_idx.size());
    for (std::size_t idx : kept_idx) {
        pairs.push_back({record.detections[idx], record.landmarks_norm[idx]});
    }
    pairs = enforce_count(std::move(pairs));

    SpineLandmarks spine;
    spine.vertebrae.reserve(pairs.size());
    for (const auto& pair : pairs) {
        outcome.kept.push_back(pair.det);
        spine.vertebrae.push_back(
            denormalize_landmarks(pair.quad, pair.det.box, record.crop_offset));
    }
    for (auto& issue : validate(spine)) {
        outcome.warnings.push_back("validation: " + issue);
    }

    if (opt.smooth) detail::apply_smoothing(outcome, spine, opt);

    outcome.angles = cobb_angles(spine, record.dims);
    outcome.landmarks = std::move(spine);
    return outcome;
}

/// Angle computation straight from annotated landmarks (no detector stage).
inline AngleOutcome angles_from_landmarks(const DatasetRecord& record,
                                          const PipelineOptions& opt) {
    if (!record.landmarks) {
        throw ValidationError("record '" + record.image_id + "' has no landmarks");
    }
    AngleOutcome outcome;
    outcome.image_id = record.image_id;
    outcome.warnings = record.warnings;

    SpineLandmarks spine = *record.landmarks;
    if (opt.smooth) detail::apply_smoothing(outcome, spine, opt);

    outcome.angles = cobb_angles(spine, record.dims);
    outcome.landmarks = std::move(spine);
    return outcome;
}

/// Runs fn(i) for i in [0, n) on opt.jobs threads. Results must be written
/// into pre-sized slots by index, which keeps batch output deterministic
/// regardless of scheduling. The first exception wins and is rethrown after
/// all workers drain.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, jobs);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int w = 0; w < spawn; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& worker : pool) worker.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::vector<AngleOutcome> angles_from_predictions(std::span<const PredictionRecord> records,
                                                         const PipelineOptions& opt) {
    std::vector<AngleOutcome> outcomes(records.size());
    parallel_for(records.size(), opt.jobs,
                 [&](std::size_t i) { outcomes[i] = angles_from_prediction(records[i], opt); });
    return outcomes;
}

inline std::vector<AngleOutcome> angles_from_dataset(std::span<const DatasetRecord> records,
                                                     const PipelineOptions& opt) {
    std::vector<AngleOutcome> outcomes(records.size());
    parallel_for(records.size(), opt.jobs,
                 [&](std::size_t i) { outcomes[i] = angles_from_landmarks(records[i], opt); });
    return outcomes;
}

}  // namespace cobbkit
