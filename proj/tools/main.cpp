// cobbkit: batch toolkit for Cobb-angle estimation from spinal landmarks.
//
// Subcommands: boxes, angles, evaluate, render, synth. Shared options may
// come from a config file (--config); command-line flags win. The output
// directory can also be set through the COBBKIT_OUT_DIR environment
// variable. Every run persists its resolved configuration next to its
// outputs as config_used.json.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <cobbkit/cobbkit.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes, also documented in the README.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitConfig = 4;

struct CliConfig {
    std::string out_dir = ".";
    std::string layout = "interleaved";
    std::string corner_order = "tl,tr,bl,br";
    std::string angle_order = "mt-pt-tl";
    double pad_w = 50.0;
    double pad_h = 10.0;
    double ct0 = 0.18;
    double cb0 = 0.21;
    double ref_aspect = 0.0;  // 0 = unset; required whenever cropping is requested
    int poly_degree = 6;
    std::string smooth_mode = "all-points";
    std::string outlier_width_rule = "own";
    int jobs = 1;
};

cobbkit::LandmarkLayout parse_layout(const std::string& name) {
    if (name == "interleaved") return cobbkit::LandmarkLayout::xy_interleaved;
    if (name == "block") return cobbkit::LandmarkLayout::x_block_y_block;
    throw cobbkit::ConfigError("unknown layout '" + name + "' (interleaved|block)");
}

cobbkit::AngleOrder parse_angle_order(const std::string& name) {
    if (name == "mt-pt-tl") return cobbkit::AngleOrder::mt_pt_tl;
    if (name == "pt-mt-tl") return cobbkit::AngleOrder::pt_mt_tl;
    throw cobbkit::ConfigError("unknown angle order '" + name + "' (mt-pt-tl|pt-mt-tl)");
}

cobbkit::SmoothMode parse_smooth_mode(const std::string& name) {
    if (name == "all-points") return cobbkit::SmoothMode::all_points;
    if (name == "left-right-split") return cobbkit::SmoothMode::left_right_split;
    throw cobbkit::ConfigError("unknown smooth mode '" + name +
                               "' (all-points|left-right-split)");
}

cobbkit::OutlierWidthRule parse_width_rule(const std::string& name) {
    if (name == "own") return cobbkit::OutlierWidthRule::own_width;
    if (name == "neighbor-mean") return cobbkit::OutlierWidthRule::neighbor_mean;
    throw cobbkit::ConfigError("unknown outlier width rule '" + name + "' (own|neighbor-mean)");
}

void write_config_used(const CliConfig& cfg, const std::string& subcommand, const json& extra) {
    json doc;
    doc["subcommand"] = subcommand;
    doc["out_dir"] = cfg.out_dir;
    doc["layout"] = cfg.layout;
    doc["corner_order"] = cfg.corner_order;
    doc["angle_order"] = cfg.angle_order;
    doc["pad_w"] = cfg.pad_w;
    doc["pad_h"] = cfg.pad_h;
    doc["ct0"] = cfg.ct0;
    doc["cb0"] = cfg.cb0;
    if (cfg.ref_aspect > 0.0) doc["ref_aspect"] = cfg.ref_aspect;
    doc["poly_degree"] = cfg.poly_degree;
    doc["smooth_mode"] = cfg.smooth_mode;
    doc["outlier_width_rule"] = cfg.outlier_width_rule;
    doc["jobs"] = cfg.jobs;
    doc.update(extra);
    cobbkit::write_text_atomic(fs::path(cfg.out_dir) / "config_used.json", doc.dump(2) + "\n");
}

fs::path ensure_out_dir(const CliConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

cobbkit::PipelineOptions pipeline_options(const CliConfig& cfg, bool smooth, bool no_outliers) {
    cobbkit::PipelineOptions opt;
    opt.outlier_rejection = !no_outliers;
    opt.width_rule = parse_width_rule(cfg.outlier_width_rule);
    opt.smooth = smooth;
    opt.smooth_mode = parse_smooth_mode(cfg.smooth_mode);
    opt.poly_degree = cfg.poly_degree;
    opt.jobs = cfg.jobs;
    return opt;
}

std::vector<cobbkit::DatasetRecord> load_landmarks(const CliConfig& cfg, const std::string& path) {
    return cobbkit::read_landmark_csv(path, parse_layout(cfg.layout),
                                      cobbkit::CornerOrder::parse(cfg.corner_order));
}

void print_warnings(const std::string& image_id, const std::vector<std::string>& warnings) {
    for (const auto& warning : warnings) {
        std::cerr << "warning: " << image_id << ": " << warning << '\n';
    }
}

// ----------------------------------------------------------------------------
// boxes
// ----------------------------------------------------------------------------

int run_boxes(const CliConfig& cfg, const std::string& landmarks_path) {
    const auto records = load_landmarks(cfg, landmarks_path);
    if (records.empty()) {
        throw cobbkit::ValidationError("'" + landmarks_path + "' contains no records");
    }
    std::vector<std::pair<std::string, std::vector<cobbkit::BoundingBox>>> all_boxes;
    for (const auto& record : records) {
        print_warnings(record.image_id, record.warnings);
        std::vector<cobbkit::BoundingBox> boxes;
        for (const auto& quad : record.landmarks->vertebrae) {
            boxes.push_back(cobbkit::quad_to_gt_box(quad, cfg.pad_w, cfg.pad_h, record.dims));
        }
        all_boxes.emplace_back(record.image_id, std::move(boxes));
    }
    const fs::path out = ensure_out_dir(cfg);
    cobbkit::write_boxes_csv(all_boxes, out / "boxes.csv");
    write_config_used(cfg, "boxes", {{"landmarks", landmarks_path}});
    std::cout << "wrote " << (out / "boxes.csv").string() << " (" << all_boxes.size()
              << " images)\n";
    return kExitOk;
}

// ----------------------------------------------------------------------------
// angles
// ----------------------------------------------------------------------------

void dump_stages(const fs::path& out, const std::vector<cobbkit::AngleOutcome>& outcomes,
                 const std::vector<cobbkit::ImageDims>& dims, bool smoothed) {
    const fs::path stage_dir = out / "stages";
    fs::create_directories(stage_dir);

    std::ostringstream det;
    det << "image_id,x_min,y_min,x_max,y_max,score,status\n";
    for (const auto& outcome : outcomes) {
        auto row = [&](const cobbkit::Detection& d, const char* status) {
            det << outcome.image_id << ',' << d.box.x_min << ',' << d.box.y_min << ','
                << d.box.x_max << ',' << d.box.y_max << ',' << d.score << ',' << status << '\n';
        };
        for (const auto& d : outcome.kept) row(d, "kept");
        for (const auto& d : outcome.rejected) row(d, "rejected");
    }
    cobbkit::write_text_atomic(stage_dir / "detections.csv", det.str());

    auto as_records = [&](bool presmooth) {
        std::vector<cobbkit::DatasetRecord> records;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            cobbkit::DatasetRecord record;
            record.image_id = outcomes[i].image_id;
            record.dims = dims[i];
            record.landmarks =
                presmooth ? *outcomes[i].presmooth : outcomes[i].landmarks;
            records.push_back(std::move(record));
        }
        return records;
    };
    if (smoothed) {
        cobbkit::write_landmark_csv(as_records(true), stage_dir / "landmarks_presmooth.csv");
    }
    cobbkit::write_landmark_csv(as_records(false), stage_dir / "landmarks_final.csv");
}

int run_angles(const CliConfig& cfg, const std::string& predictions_path,
               const std::string& landmarks_path, bool smooth, bool no_outliers,
               bool want_stage_dump) {
    const cobbkit::PipelineOptions opt = pipeline_options(cfg, smooth, no_outliers);

    std::vector<cobbkit::AngleOutcome> outcomes;
    std::vector<cobbkit::ImageDims> dims;
    if (!predictions_path.empty()) {
        const auto records = cobbkit::read_predictions(predictions_path);
        outcomes = cobbkit::angles_from_predictions(records, opt);
        for (const auto& record : records) dims.push_back(record.dims);
    } else {
        const auto records = load_landmarks(cfg, landmarks_path);
        outcomes = cobbkit::angles_from_dataset(records, opt);
        for (const auto& record : records) dims.push_back(record.dims);
    }
    if (outcomes.empty()) {
        throw cobbkit::ValidationError("no images to process");
    }

    std::vector<std::pair<std::string, cobbkit::CobbTriple>> rows;
    for (const auto& outcome : outcomes) {
        print_warnings(outcome.image_id, outcome.warnings);
        rows.emplace_back(outcome.image_id, outcome.angles);
    }
    const fs::path out = ensure_out_dir(cfg);
    cobbkit::write_angles_csv(rows, out / "angles.csv");
    if (want_stage_dump) dump_stages(out, outcomes, dims, smooth);
    write_config_used(cfg, "angles",
                      {{"predictions", predictions_path},
                       {"landmarks", landmarks_path},
                       {"smooth", smooth},
                       {"outlier_rejection", !no_outliers},
                       {"dump_stages", want_stage_dump}});
    std::cout << "wrote " << (out / "angles.csv").string() << " (" << rows.size()
              << " images)\n";
    return kExitOk;
}

// ----------------------------------------------------------------------------
// evaluate
// ----------------------------------------------------------------------------

int run_evaluate(const CliConfig& cfg, const std::string& gt_path, const std::string& pred_path,
                 const std::string& variant_name) {
    const auto order = parse_angle_order(cfg.angle_order);
    const auto gt = cobbkit::read_angles_csv(gt_path, order);
    const auto pred = cobbkit::read_angles_csv(pred_path, order);
    cobbkit::SmapeVariant variant;
    if (variant_name == "challenge") variant = cobbkit::SmapeVariant::challenge;
    else if (variant_name == "textbook") variant = cobbkit::SmapeVariant::textbook;
    else throw cobbkit::ConfigError("unknown SMAPE variant '" + variant_name + "'");

    const cobbkit::EvalReport report = cobbkit::smape(gt, pred, variant);
    const fs::path out = ensure_out_dir(cfg);
    cobbkit::write_report_json(report, out / "report.json");
    cobbkit::write_report_csv(report, out / "report.csv");
    write_config_used(cfg, "evaluate",
                      {{"gt", gt_path}, {"pred", pred_path}, {"variant", variant_name}});

    std::printf("SMAPE: %.4f%% over %zu images (%zu excluded)\n", report.smape, report.n_images,
                report.n_excluded);
    std::printf("MAE (deg): MT %.4f  PT %.4f  TL %.4f\n", report.mae_per_angle[0],
                report.mae_per_angle[1], report.mae_per_angle[2]);
    return kExitOk;
}

// ----------------------------------------------------------------------------
// render
// ----------------------------------------------------------------------------

int run_render(const CliConfig& cfg, const std::string& predictions_path,
               const std::string& landmarks_path, const std::string& only_image, bool smooth,
               bool no_outliers) {
    const fs::path out = ensure_out_dir(cfg);
    std::size_t rendered = 0;

    auto emit = [&](const cobbkit::RenderInput& input, const std::string& image_id) {
        cobbkit::write_text_atomic(out / (image_id + ".svg"), cobbkit::render_svg(input));
        ++rendered;
    };

    if (!landmarks_path.empty()) {
        for (const auto& record : load_landmarks(cfg, landmarks_path)) {
            if (!only_image.empty() && record.image_id != only_image) continue;
            cobbkit::RenderInput input;
            input.title = record.image_id;
            input.dims = record.dims;
            for (const auto& quad : record.landmarks->vertebrae) {
                input.gt_boxes.push_back(
                    cobbkit::quad_to_gt_box(quad, cfg.pad_w, cfg.pad_h, record.dims));
                for (const auto& corner : quad.corners) input.landmarks.push_back(corner);
            }
            if (smooth) {
                const auto smoothed = cobbkit::smooth_landmarks(
                    *record.landmarks, cfg.poly_degree, parse_smooth_mode(cfg.smooth_mode));
                input.curves = smoothed.fits;
            }
            input.warnings = record.warnings;
            emit(input, record.image_id);
        }
    } else {
        const cobbkit::PipelineOptions opt = pipeline_options(cfg, smooth, no_outliers);
        for (const auto& record : cobbkit::read_predictions(predictions_path)) {
            if (!only_image.empty() && record.image_id != only_image) continue;
            cobbkit::RenderInput input;
            input.title = record.image_id;
            input.dims = record.dims;
            if (record.detections.empty()) {
                input.warnings.push_back("no detections for this image");
                emit(input, record.image_id);
                continue;
            }
            const cobbkit::AngleOutcome outcome = cobbkit::angles_from_prediction(record, opt);
            input.kept = outcome.kept;
            input.rejected = outcome.rejected;
            for (const auto& quad : outcome.landmarks.vertebrae) {
                for (const auto& corner : quad.corners) input.landmarks.push_back(corner);
            }
            input.curves = outcome.fits;
            input.warnings = outcome.warnings;
            emit(input, record.image_id);
        }
    }
    if (rendered == 0) {
        throw cobbkit::ValidationError(only_image.empty() ? "no records to render"
                                                          : "image '" + only_image +
                                                                "' not found in the input");
    }
    write_config_used(cfg, "render",
                      {{"predictions", predictions_path},
                       {"landmarks", landmarks_path},
                       {"image_id", only_image},
                       {"smooth", smooth}});
    std::cout << "rendered " << rendered << " SVG file(s) into " << out.string() << '\n';
    return kExitOk;
}

// ----------------------------------------------------------------------------
// synth
// ----------------------------------------------------------------------------

int run_synth(const CliConfig& cfg, int n_images, std::uint64_t seed, const std::string& curve,
              double amplitude, double noise, int n_outliers, double outlier_offset, int n_drop,
              bool with_crop) {
    if (n_images <= 0) throw cobbkit::ConfigError("--n-images must be positive");
    if (with_crop && cfg.ref_aspect <= 0.0) {
        throw cobbkit::ConfigError("--crop requires --ref-aspect (no default exists)");
    }

    std::mt19937_64 rng(seed);
    std::vector<cobbkit::DatasetRecord> dataset;
    std::vector<cobbkit::PredictionRecord> predictions;
    std::vector<std::pair<std::string, cobbkit::CobbTriple>> oracle_rows;
    json oracle_doc;
    oracle_doc["format"] = "cobbkit-oracle";
    oracle_doc["version"] = 1;
    auto& images = oracle_doc["images"] = json::array();

    for (int i = 0; i < n_images; ++i) {
        cobbkit::SpineParams params;
        params.seed = seed + static_cast<std::uint64_t>(i);
        params.noise_sigma = noise;

        std::string kind = curve;
        if (curve == "random") {
            kind = (rng() % 2 == 0) ? "c" : "s";
        }
        if (kind == "straight") {
            params.midline.kind = cobbkit::MidlineSpec::Kind::polynomial;
            params.midline.coeffs = {0.0};
        } else if (kind == "c") {
            params.midline.kind = cobbkit::MidlineSpec::Kind::sinusoid;
            params.midline.amplitude = amplitude;
            params.midline.periods = 0.5;
            params.midline.phase = std::numbers::pi / 2.0;
        } else if (kind == "s") {
            params.midline.kind = cobbkit::MidlineSpec::Kind::sinusoid;
            params.midline.amplitude = amplitude;
            params.midline.periods = 1.0;
            params.midline.phase = 0.0;
        } else {
            throw cobbkit::ConfigError("unknown curve '" + curve + "' (straight|c|s|random)");
        }
        if (curve == "random") {
            std::uniform_real_distribution<double> amp(0.4 * amplitude, amplitude);
            params.midline.amplitude = amp(rng) * (rng() % 2 == 0 ? 1.0 : -1.0);
        }

        const cobbkit::SynthSpine spine = cobbkit::generate_spine(params);

        char id[32];
        std::snprintf(id, sizeof(id), "synth-%04d", i);

        cobbkit::DatasetRecord record;
        record.image_id = id;
        record.dims = spine.dims;
        record.landmarks = spine.spine;
        dataset.push_back(std::move(record));

        cobbkit::PerturbParams perturb;
        perturb.image_id = id;
        perturb.pad_w = cfg.pad_w;
        perturb.pad_h = cfg.pad_h;
        perturb.n_outliers = n_outliers;
        perturb.outlier_offset = outlier_offset;
        perturb.n_drop = n_drop;
        perturb.seed = params.seed;
        if (with_crop) {
            perturb.crop = cobbkit::compute_crop(spine.dims.aspect(), cfg.ref_aspect, cfg.ct0,
                                                 cfg.cb0);
        }
        predictions.push_back(cobbkit::perturb_to_detections(spine.spine, spine.dims, perturb));

        oracle_rows.emplace_back(id, spine.oracle);
        json entry;
        entry["image_id"] = id;
        entry["tilts_deg"] = spine.tilts_deg;
        entry["angles"] = {{"mt", spine.oracle.mt},       {"pt", spine.oracle.pt},
                           {"tl", spine.oracle.tl},       {"upper_idx", spine.oracle.upper_idx},
                           {"lower_idx", spine.oracle.lower_idx},
                           {"s_shaped", spine.oracle.s_shaped}};
        images.push_back(std::move(entry));
    }

    const fs::path out = ensure_out_dir(cfg);
    cobbkit::write_landmark_csv(dataset, out / "landmarks.csv", parse_layout(cfg.layout));
    cobbkit::write_predictions(predictions, out / "predictions.json");
    cobbkit::write_angles_csv(oracle_rows, out / "oracle_angles.csv");
    cobbkit::write_text_atomic(out / "oracle.json", oracle_doc.dump(2) + "\n");
    write_config_used(cfg, "synth",
                      {{"n_images", n_images},
                       {"seed", seed},
                       {"curve", curve},
                       {"amplitude", amplitude},
                       {"noise", noise},
                       {"outliers", n_outliers},
                       {"outlier_offset", outlier_offset},
                       {"drop", n_drop},
                       {"crop", with_crop}});
    std::cout << "wrote " << n_images << " synthetic image(s) into " << out.string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cobb-angle estimation toolkit for spinal landmark pipelines"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from an INI/TOML config file");

    CliConfig cfg;
    app.add_option("--out", cfg.out_dir, "Output directory")
        ->envname("COBBKIT_OUT_DIR")
        ->capture_default_str();
    app.add_option("--layout", cfg.layout, "Landmark CSV layout: interleaved|block")
        ->capture_default_str();
    app.add_option("--corner-order", cfg.corner_order,
                   "Quad corner order in landmark files, e.g. tl,tr,bl,br")
        ->capture_default_str();
    app.add_option("--angle-order", cfg.angle_order, "Angle CSV column order: mt-pt-tl|pt-mt-tl")
        ->capture_default_str();
    app.add_option("--pad-w", cfg.pad_w, "Total width padding of GT boxes, px")
        ->capture_default_str();
    app.add_option("--pad-h", cfg.pad_h, "Total height padding of GT boxes, px")
        ->capture_default_str();
    app.add_option("--ct0", cfg.ct0, "Reference top crop fraction")->capture_default_str();
    app.add_option("--cb0", cfg.cb0, "Reference bottom crop fraction")->capture_default_str();
    app.add_option("--ref-aspect", cfg.ref_aspect,
                   "Aspect ratio (width/height) of the reference crop image; required for "
                   "cropping, no default");
    app.add_option("--poly-degree", cfg.poly_degree, "Smoothing polynomial degree")
        ->capture_default_str();
    app.add_option("--smooth-mode", cfg.smooth_mode,
                   "Smoothing mode: all-points|left-right-split")
        ->capture_default_str();
    app.add_option("--outlier-width-rule", cfg.outlier_width_rule,
                   "Outlier threshold width: own|neighbor-mean")
        ->capture_default_str();
    app.add_option("--jobs", cfg.jobs, "Worker threads for batch processing")
        ->capture_default_str();

    auto* boxes_cmd = app.add_subcommand("boxes", "Build padded GT boxes from landmarks");
    std::string boxes_landmarks;
    boxes_cmd->add_option("--landmarks", boxes_landmarks, "Landmark CSV")->required();

    auto* angles_cmd =
        app.add_subcommand("angles", "Compute Cobb angles from predictions or landmarks");
    std::string angles_predictions, angles_landmarks;
    bool angles_smooth = false, angles_no_outliers = false, angles_dump = false;
    auto* pred_opt = angles_cmd->add_option("--predictions", angles_predictions,
                                            "Detector predictions JSON");
    angles_cmd->add_option("--landmarks", angles_landmarks, "Landmark CSV")->excludes(pred_opt);
    angles_cmd->add_flag("--smooth", angles_smooth, "Smooth landmarks before angle computation");
    angles_cmd->add_flag("--no-outliers", angles_no_outliers, "Skip outlier rejection");
    angles_cmd->add_flag("--dump-stages", angles_dump, "Write per-stage intermediate files");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predicted angles against GT");
    std::string eval_gt, eval_pred, eval_variant = "challenge";
    evaluate_cmd->add_option("--gt", eval_gt, "Ground-truth angles CSV")->required();
    evaluate_cmd->add_option("--pred", eval_pred, "Predicted angles CSV")->required();
    evaluate_cmd->add_option("--variant", eval_variant, "SMAPE variant: challenge|textbook")
        ->capture_default_str();

    auto* render_cmd = app.add_subcommand("render", "Render stage overlays as SVG");
    std::string render_predictions, render_landmarks, render_image;
    bool render_smooth = false, render_no_outliers = false;
    auto* rpred_opt =
        render_cmd->add_option("--predictions", render_predictions, "Detector predictions JSON");
    render_cmd->add_option("--landmarks", render_landmarks, "Landmark CSV")->excludes(rpred_opt);
    render_cmd->add_option("--image-id", render_image, "Render only this image");
    render_cmd->add_flag("--smooth", render_smooth, "Overlay the fitted smoothing curve");
    render_cmd->add_flag("--no-outliers", render_no_outliers, "Skip outlier rejection");

    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic spines with oracle angles");
    int synth_n = 10;
    std::uint64_t synth_seed = 1;
    std::string synth_curve = "random";
    double synth_amplitude = 160.0, synth_noise = 0.0, synth_offset = 300.0;
    int synth_outliers = 0, synth_drop = 0;
    bool synth_crop = false;
    synth_cmd->add_option("--n-images", synth_n, "Number of images")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "Base RNG seed")->capture_default_str();
    synth_cmd->add_option("--curve", synth_curve, "Curve family: straight|c|s|random")
        ->capture_default_str();
    synth_cmd->add_option("--amplitude", synth_amplitude, "Midline amplitude, px")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_noise, "Gaussian landmark noise sigma, px")
        ->capture_default_str();
    synth_cmd->add_option("--outliers", synth_outliers, "Spurious boxes injected per image")
        ->capture_default_str();
    synth_cmd->add_option("--outlier-offset", synth_offset, "Injected box x displacement, px")
        ->capture_default_str();
    synth_cmd->add_option("--drop", synth_drop, "Detections dropped per image")
        ->capture_default_str();
    synth_cmd->add_flag("--crop", synth_crop,
                        "Simulate inference-time cropping (needs --ref-aspect)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (boxes_cmd->parsed()) {
            return run_boxes(cfg, boxes_landmarks);
        }
        if (angles_cmd->parsed()) {
            if (angles_predictions.empty() && angles_landmarks.empty()) {
                throw cobbkit::ConfigError("angles needs --predictions or --landmarks");
            }
            return run_angles(cfg, angles_predictions, angles_landmarks, angles_smooth,
                              angles_no_outliers, angles_dump);
        }
        if (evaluate_cmd->parsed()) {
            return run_evaluate(cfg, eval_gt, eval_pred, eval_variant);
        }
        if (render_cmd->parsed()) {
            if (render_predictions.empty() && render_landmarks.empty()) {
                throw cobbkit::ConfigError("render needs --predictions or --landmarks");
            }
            return run_render(cfg, render_predictions, render_landmarks, render_image,
                              render_smooth, render_no_outliers);
        }
        if (synth_cmd->parsed()) {
            return run_synth(cfg, synth_n, synth_seed, synth_curve, synth_amplitude, synth_noise,
                             synth_outliers, synth_offset, synth_drop, synth_crop);
        }
    } catch (const cobbkit::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitParse;
    } catch (const cobbkit::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const cobbkit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
