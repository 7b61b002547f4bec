#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgvad/evaluation.hpp"
#include "sgvad/exemplar.hpp"
#include "sgvad/scoring.hpp"
#include "sgvad/synthscene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kReferenceFrameHeight = 1080.0;

// Built-in defaults; a --config file overrides these and explicit CLI flags
// override both.
struct RunConfig {
    double edge_threshold_px = 250.0;
    double exemplar_threshold = 0.65;
    int trajectory_length = 30;
    double anomaly_threshold = 0.5;
    std::size_t norm_sample_size = 100000;
    std::uint64_t norm_seed = 17;
    double frame_height = kReferenceFrameHeight;
    double iou_min = 0.1;
    double track_coverage_min = 0.1;

    // Edge threshold scales linearly with frame height.
    double effective_edge_threshold() const {
        return edge_threshold_px * frame_height / kReferenceFrameHeight;
    }
};

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config file " + path + ": " + e.what());
    }
    RunConfig config;
    config.edge_threshold_px = j.value("edge-threshold-px", config.edge_threshold_px);
    config.exemplar_threshold = j.value("exemplar-threshold", config.exemplar_threshold);
    config.trajectory_length = j.value("trajectory-length", config.trajectory_length);
    config.anomaly_threshold = j.value("anomaly-threshold", config.anomaly_threshold);
    config.norm_sample_size = j.value("norm-sample-size", config.norm_sample_size);
    config.norm_seed = j.value("norm-seed", config.norm_seed);
    config.frame_height = j.value("frame-height", config.frame_height);
    config.iou_min = j.value("iou-min", config.iou_min);
    config.track_coverage_min = j.value("track-coverage-min", config.track_coverage_min);
    if (config.edge_threshold_px <= 0 || config.exemplar_threshold <= 0 ||
        config.anomaly_threshold <= 0 || config.trajectory_length < 2) {
        throw std::runtime_error("config file " + path + ": thresholds must be positive and T >= 2");
    }
    return config;
}

std::vector<sgvad::FrameRecord> read_stream_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read track stream: " + path);
    try {
        return sgvad::parse_track_stream(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

bool config_file_has_key(const std::string& path, const std::string& key) {
    if (path.empty()) return false;
    std::ifstream in(path);
    if (!in) return false;
    json j = json::parse(in, nullptr, false);
    return j.is_object() && j.contains(key);
}

std::string stream_video_id(const std::vector<sgvad::FrameRecord>& records,
                            const std::string& path) {
    if (records.empty()) return {};
    const std::string& id = records.front().video_id;
    for (const sgvad::FrameRecord& record : records) {
        if (record.video_id != id) {
            throw std::runtime_error(path + ": stream mixes video ids '" + id + "' and '" +
                                     record.video_id + "'");
        }
    }
    return id;
}

struct CommonOpts {
    std::string config_path;
};

void attach_config_option(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file mirroring the run parameters");
}

// flag-provided > config-file > built-in default
template <typename T>
void resolve(const CLI::Option* option, T& target, T config_value) {
    if (option->count() == 0) target = config_value;
}

int cmd_build_model(const std::vector<std::string>& train_paths, const std::string& class_map_path,
                    const std::string& out_path, const RunConfig& config) {
    std::vector<std::vector<sgvad::FrameRecord>> videos;
    std::set<std::string> ids;
    for (const std::string& path : train_paths) {
        auto records = read_stream_file(path);
        const std::string id = stream_video_id(records, path);
        if (!id.empty() && !ids.insert(id).second) {
            throw std::runtime_error("duplicate video id '" + id + "' across training streams");
        }
        videos.push_back(std::move(records));
    }

    sgvad::ClassMap class_map;
    if (!class_map_path.empty()) {
        std::ifstream in(class_map_path);
        if (!in) throw std::runtime_error("cannot read class map: " + class_map_path);
        class_map = sgvad::parse_class_map(in);
    }

    sgvad::ModelParams params;
    params.exemplar_threshold = config.exemplar_threshold;
    params.edge_threshold = config.effective_edge_threshold();
    params.trajectory_length = config.trajectory_length;
    params.normalization_sample_limit = config.norm_sample_size;
    params.normalization_seed = config.norm_seed;

    const sgvad::ExemplarModel model = sgvad::build_model(videos, params, std::move(class_map));

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write model file: " + out_path);
    sgvad::save_model(model, out);

    std::cout << "model written to " << out_path << "\n"
              << "  isolated exemplars: " << model.isolated_exemplars.size() << "\n"
              << "  pair exemplars:     " << model.pair_exemplars.size() << "\n"
              << "  normalization constants (mean/stddev):\n";
    for (int i = 0; i < sgvad::kAttributeCount; ++i) {
        const auto& [mean, stddev] = model.constants.per_attribute[i];
        std::cout << "    " << sgvad::attribute_name(static_cast<sgvad::Attribute>(i)) << ": "
                  << mean << " / " << stddev << "\n";
    }
    return 0;
}

int cmd_score(const std::string& model_path, const std::vector<std::string>& test_paths,
              const std::string& out_path, const RunConfig& config, bool trajectory_flag_given) {
    std::ifstream model_in(model_path);
    if (!model_in) throw std::runtime_error("cannot read model file: " + model_path);
    const sgvad::ExemplarModel model = sgvad::load_model(model_in);

    if (trajectory_flag_given && config.trajectory_length != model.trajectory_length) {
        throw std::runtime_error("trajectory length " + std::to_string(config.trajectory_length) +
                                 " does not match the model's T=" +
                                 std::to_string(model.trajectory_length));
    }

    std::vector<std::pair<std::string, std::vector<sgvad::FrameRecord>>> streams;
    for (const std::string& path : test_paths) {
        auto records = read_stream_file(path);
        streams.emplace_back(stream_video_id(records, path), std::move(records));
    }
    std::sort(streams.begin(), streams.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<sgvad::ScoredRegion> regions;
    for (const auto& [id, records] : streams) {
        const auto graphs = sgvad::graphs_from_records(records, model.edge_threshold,
                                                       model.trajectory_length);
        for (const sgvad::FrameGraph& frame : graphs) {
            auto frame_regions =
                sgvad::score_frame(frame.video_id, frame.frame_id, frame.graph, model);
            regions.insert(regions.end(), frame_regions.begin(), frame_regions.end());
        }
    }

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write scores file: " + out_path);
    sgvad::write_scores(out, regions);

    const auto detections = sgvad::detect(regions, config.anomaly_threshold);
    std::cout << "scores written to " << out_path << "\n"
              << "  regions:    " << regions.size() << "\n"
              << "  detections: " << detections.size() << " above threshold "
              << config.anomaly_threshold << "\n";
    return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& annotations_dir,
             const std::string& out_path, const std::string& plot_dir, const RunConfig& config) {
    std::ifstream scores_in(scores_path);
    if (!scores_in) throw std::runtime_error("cannot read scores file: " + scores_path);
    const auto regions = sgvad::read_scores(scores_in);

    std::set<std::string> video_ids;
    for (const sgvad::ScoredRegion& region : regions) video_ids.insert(region.video_id);

    sgvad::VideoAnnotations gt;
    std::vector<std::string> missing;
    for (const std::string& id : video_ids) {
        const fs::path path = fs::path(annotations_dir) / (id + ".json");
        std::ifstream in(path);
        if (!in) {
            missing.push_back(id);
            continue;
        }
        gt[id] = sgvad::parse_annotations(in);
    }
    if (!missing.empty()) {
        std::string msg = "missing annotation files for videos:";
        for (const std::string& id : missing) msg += " " + id;
        throw std::runtime_error(msg);
    }
    if (gt.empty()) throw std::runtime_error("no annotation files found under " + annotations_dir);

    const sgvad::FrameSeries series = sgvad::frame_series(regions, gt);
    std::vector<sgvad::EvalResult> results;
    results.push_back(sgvad::frame_level_auc(series.scores, series.labels));
    results.push_back(sgvad::rbdc(regions, gt, config.iou_min));
    results.push_back(sgvad::tbdc(regions, gt, config.iou_min, config.track_coverage_min));

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write results file: " + out_path);
    sgvad::write_results(out, results);

    for (const sgvad::EvalResult& r : results) {
        std::cout << r.criterion << " AUC: " << r.auc << "\n";
    }

    if (!plot_dir.empty()) {
        fs::create_directories(plot_dir);
        for (const sgvad::EvalResult& r : results) {
            const fs::path path = fs::path(plot_dir) / (r.criterion + ".svg");
            std::ofstream svg(path);
            if (!svg) throw std::runtime_error("cannot write plot: " + path.string());
            sgvad::write_curve_svg(svg, r);
        }
        std::cout << "curve plots written to " << plot_dir << "\n";
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path,
              const std::string& annotations_path, const std::string& class_map_path) {
    std::ifstream spec_in(spec_path);
    if (!spec_in) throw std::runtime_error("cannot read scenario spec: " + spec_path);
    const sgvad::ScenarioSpec spec = sgvad::parse_scenario(spec_in);
    const sgvad::GeneratedScene scene = sgvad::generate(spec);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write stream: " + out_path);
    sgvad::write_track_stream(out, scene.frames);
    std::cout << "stream written to " << out_path << " (" << scene.frames.size() << " frames)\n";

    if (!annotations_path.empty()) {
        if (scene.annotations) {
            std::ofstream ann(annotations_path);
            if (!ann) throw std::runtime_error("cannot write annotations: " + annotations_path);
            sgvad::write_annotations(ann, *scene.annotations);
            std::cout << "annotations written to " << annotations_path << " ("
                      << scene.annotations->annotations.size() << " entries)\n";
        } else {
            std::cout << "nominal scenario, no annotations emitted\n";
        }
    }
    if (!class_map_path.empty()) {
        std::ofstream cm(class_map_path);
        if (!cm) throw std::runtime_error("cannot write class map: " + class_map_path);
        sgvad::write_class_map(cm, sgvad::builtin_class_map());
    }
    return 0;
}

int cmd_plot(const std::string& results_path, const std::string& out_dir) {
    std::ifstream in(results_path);
    if (!in) throw std::runtime_error("cannot read results file: " + results_path);
    const auto results = sgvad::read_results(in);
    fs::create_directories(out_dir);
    for (const sgvad::EvalResult& r : results) {
        const fs::path path = fs::path(out_dir) / (r.criterion + ".svg");
        std::ofstream svg(path);
        if (!svg) throw std::runtime_error("cannot write plot: " + path.string());
        sgvad::write_curve_svg(svg, r);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene-graph video anomaly detection over detector/tracker streams"};
    app.require_subcommand(1);

    // build-model
    auto* build = app.add_subcommand("build-model", "Build an exemplar model from nominal streams");
    std::vector<std::string> train_paths;
    std::string class_map_path, model_out;
    CommonOpts build_common;
    RunConfig build_cfg;
    build->add_option("--train", train_paths, "Nominal track stream files, one per video")
        ->required()
        ->expected(-1);
    build->add_option("--class-map", class_map_path, "Sidecar class map file");
    build->add_option("--out", model_out, "Output model file")->required();
    attach_config_option(build, build_common);
    auto* b_edge = build->add_option("--edge-threshold-px", build_cfg.edge_threshold_px,
                                     "Edge threshold in px at 1080p");
    auto* b_th = build->add_option("--exemplar-threshold", build_cfg.exemplar_threshold,
                                   "Exemplar selection threshold");
    auto* b_T = build->add_option("--trajectory-length", build_cfg.trajectory_length,
                                  "Trajectory length in frames");
    auto* b_ns = build->add_option("--norm-sample-size", build_cfg.norm_sample_size,
                                   "Max node pairs sampled for normalization");
    auto* b_seed = build->add_option("--norm-seed", build_cfg.norm_seed,
                                     "Seed for normalization sampling");
    auto* b_fh = build->add_option("--frame-height", build_cfg.frame_height,
                                   "Frame height in px, scales the edge threshold");

    // score
    auto* score = app.add_subcommand("score", "Score test streams against a model");
    std::string score_model, scores_out;
    std::vector<std::string> test_paths;
    CommonOpts score_common;
    RunConfig score_cfg;
    score->add_option("--model", score_model, "Model file")->required();
    score->add_option("--test", test_paths, "Test track stream files, one per video")
        ->required()
        ->expected(-1);
    score->add_option("--out", scores_out, "Output scores file")->required();
    attach_config_option(score, score_common);
    auto* s_at = score->add_option("--anomaly-threshold", score_cfg.anomaly_threshold,
                                   "Detection threshold for the summary");
    auto* s_T = score->add_option("--trajectory-length", score_cfg.trajectory_length,
                                  "Must match the model's T when given");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a scores file against annotations");
    std::string eval_scores, eval_annotations, eval_out, eval_plot_dir;
    CommonOpts eval_common;
    RunConfig eval_cfg;
    eval->add_option("--scores", eval_scores, "Scores file from the score command")->required();
    eval->add_option("--annotations", eval_annotations,
                     "Directory of <video_id>.json annotation files")
        ->required();
    eval->add_option("--out", eval_out, "Output results document")->required();
    eval->add_option("--plot-dir", eval_plot_dir, "Also write curve SVGs here");
    attach_config_option(eval, eval_common);
    auto* e_iou = eval->add_option("--iou-min", eval_cfg.iou_min, "Min IoU for region matching");
    auto* e_cov = eval->add_option("--track-coverage-min", eval_cfg.track_coverage_min,
                                   "Min detected fraction for a track");

    // synth
    auto* synth = app.add_subcommand("synth", "Expand a scenario spec into a track stream");
    std::string synth_spec, synth_out, synth_annotations, synth_class_map;
    synth->add_option("--spec", synth_spec, "Scenario spec file")->required();
    synth->add_option("--out", synth_out, "Output track stream")->required();
    synth->add_option("--annotations-out", synth_annotations,
                      "Ground truth output (anomalous scenarios only)");
    synth->add_option("--class-map-out", synth_class_map, "Write the generator's class map");

    // plot
    auto* plot = app.add_subcommand("plot", "Render curve SVGs from a results document");
    std::string plot_results, plot_out_dir;
    plot->add_option("--results", plot_results, "Results document from eval")->required();
    plot->add_option("--out-dir", plot_out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) {
            RunConfig file_cfg = build_common.config_path.empty()
                                     ? RunConfig{}
                                     : load_config_file(build_common.config_path);
            resolve(b_edge, build_cfg.edge_threshold_px, file_cfg.edge_threshold_px);
            resolve(b_th, build_cfg.exemplar_threshold, file_cfg.exemplar_threshold);
            resolve(b_T, build_cfg.trajectory_length, file_cfg.trajectory_length);
            resolve(b_ns, build_cfg.norm_sample_size, file_cfg.norm_sample_size);
            resolve(b_seed, build_cfg.norm_seed, file_cfg.norm_seed);
            resolve(b_fh, build_cfg.frame_height, file_cfg.frame_height);
            if (build_cfg.exemplar_threshold <= 0 || build_cfg.edge_threshold_px <= 0 ||
                build_cfg.trajectory_length < 2) {
                throw std::runtime_error("thresholds must be positive and trajectory length >= 2");
            }
            return cmd_build_model(train_paths, class_map_path, model_out, build_cfg);
        }
        if (score->parsed()) {
            RunConfig file_cfg = score_common.config_path.empty()
                                     ? RunConfig{}
                                     : load_config_file(score_common.config_path);
            resolve(s_at, score_cfg.anomaly_threshold, file_cfg.anomaly_threshold);
            resolve(s_T, score_cfg.trajectory_length, file_cfg.trajectory_length);
            if (score_cfg.anomaly_threshold <= 0 || score_cfg.trajectory_length < 2) {
                throw std::runtime_error("thresholds must be positive and trajectory length >= 2");
            }
            const bool t_given = s_T->count() > 0 ||
                                 config_file_has_key(score_common.config_path, "trajectory-length");
            return cmd_score(score_model, test_paths, scores_out, score_cfg, t_given);
        }
        if (eval->parsed()) {
            RunConfig file_cfg = eval_common.config_path.empty()
                                     ? RunConfig{}
                                     : load_config_file(eval_common.config_path);
            resolve(e_iou, eval_cfg.iou_min, file_cfg.iou_min);
            resolve(e_cov, eval_cfg.track_coverage_min, file_cfg.track_coverage_min);
            if (eval_cfg.iou_min <= 0 || eval_cfg.iou_min > 1 || eval_cfg.track_coverage_min <= 0 ||
                eval_cfg.track_coverage_min > 1) {
                throw std::runtime_error("iou-min and track-coverage-min must be in (0, 1]");
            }
            return cmd_eval(eval_scores, eval_annotations, eval_out, eval_plot_dir, eval_cfg);
        }
        if (synth->parsed()) {
            return cmd_synth(synth_spec, synth_out, synth_annotations, synth_class_map);
        }
        if (plot->parsed()) {
            return cmd_plot(plot_results, plot_out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
