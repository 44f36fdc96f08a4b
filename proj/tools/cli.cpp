#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kprnn/error.hpp"
#include "kprnn/evaluator.hpp"
#include "kprnn/normalizer.hpp"
#include "kprnn/openpose_ingest.hpp"
#include "kprnn/person_tracker.hpp"
#include "kprnn/pose_io.hpp"
#include "kprnn/stick_renderer.hpp"
#include "kprnn/trainer.hpp"

namespace kprnn::cli {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

PoseSequence load_normalized(const std::string& path, std::ostream& err)
{
    const auto seq = parse_sequence(read_text_file(path));
    if (seq.space() == CoordinateSpace::normalized)
        return seq;
    auto result = normalize(seq);
    if (result.clamped > 0)
        err << "warning: " << path << ": clamped " << result.clamped << " out-of-frame coordinates\n";
    return std::move(result.sequence);
}

std::vector<PoseVector> vectors_of(const PoseSequence& seq)
{
    std::vector<PoseVector> out;
    for (const auto& f : seq.frames())
        out.push_back(frame_to_vector(f, seq.space()));
    return out;
}

struct Options {
    std::uint64_t seed = 0;
    bool seed_given = false;

    std::string dir;
    std::string pattern = LoadOptions{}.pattern;
    bool allow_gaps = false;
    double width = 0.0;
    double height = 0.0;

    std::string input;
    std::string max_jump_text;
    double max_jump = TrackerConfig{}.max_jump;
    std::string select = "highest_confidence";

    std::vector<std::string> persons;
    std::string config;
    std::string curve;
    std::optional<std::size_t> epochs;

    std::string model;
    std::size_t horizon = 0;
    std::size_t start = 0;

    std::size_t canvas_w = 0;
    std::size_t canvas_h = 0;
    bool overwrite = false;

    std::string out;
};

int cmd_ingest(const Options& o, std::ostream& out)
{
    LoadOptions lo;
    lo.pattern = o.pattern;
    lo.allow_gaps = o.allow_gaps;
    MultiPersonRecording rec;
    rec.width = o.width;
    rec.height = o.height;
    rec.frames = load_sequence(o.dir, lo);
    write_file_atomic(o.out, serialize_recording(rec));
    out << "frames " << rec.frames.size() << "\n";
    return kSuccess;
}

int cmd_track(const Options& o, std::ostream& out)
{
    const auto rec = parse_recording(read_text_file(o.input));
    TrackerConfig cfg;
    cfg.max_jump = o.max_jump;
    cfg.selection_rule = SelectionRule::parse(o.select);
    const auto result = select_person(rec.frames, cfg, rec.width, rec.height);
    write_file_atomic(o.out, serialize_sequence(result.sequence));
    out << "frames " << result.report.total_frames << "\n";
    out << "chosen_initial_index " << result.report.chosen_initial_index << "\n";
    out << "carried_frames " << result.report.carried_frames.size();
    for (auto i : result.report.carried_frames)
        out << ' ' << i;
    out << "\n";
    return kSuccess;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err)
{
    Hyperparameters hyper;
    if (!o.config.empty()) {
        nlohmann::json cfg;
        try {
            cfg = nlohmann::json::parse(read_text_file(o.config));
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError(o.config + ": malformed config JSON: " + e.what());
        }
        hyper = Hyperparameters::from_json(cfg);
    }
    if (o.seed_given)
        hyper.seed = o.seed;
    if (o.epochs)
        hyper.max_epochs = *o.epochs;
    hyper.validate();

    std::vector<PoseSequence> seqs;
    for (const auto& p : o.persons)
        seqs.push_back(load_normalized(p, err));
    const auto pairs = make_windows(seqs, hyper.window_length);

    TrainOptions topt;
    topt.width = seqs.front().width();
    topt.height = seqs.front().height();
    topt.on_epoch = [&](const TrainingRecord& r) {
        if (r.epoch % 50 == 0 || r.epoch + 1 == hyper.max_epochs)
            err << "epoch " << r.epoch << " train_rmse " << r.train_rmse << " val_rmse " << r.val_rmse << " lr "
                << r.lr << "\n";
    };
    const auto result = train(pairs, hyper, topt);
    save_checkpoint(result.checkpoint, o.out);
    if (!o.curve.empty())
        export_curve(result.records, o.curve);
    const auto& last = result.records.back();
    out << "epochs " << result.records.size() << "\n";
    out << "train_rmse " << fmt(last.train_rmse) << "\n";
    out << "val_rmse " << fmt(last.val_rmse) << "\n";
    return kSuccess;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err)
{
    const auto ckpt = load_checkpoint(o.model);
    const auto seq = load_normalized(o.input, err);
    const auto pairs = make_windows({seq}, ckpt.hyper.window_length);
    std::vector<PoseFrame> frames;
    frames.reserve(pairs.size());
    for (const auto& p : pairs)
        frames.push_back(vector_to_frame(predict_next(p.window, ckpt.params), p.target_frame));
    write_file_atomic(o.out, serialize_sequence(PoseSequence(std::move(frames), seq.width(), seq.height(),
                                                             CoordinateSpace::normalized)));
    out << "predictions " << pairs.size() << "\n";
    return kSuccess;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err)
{
    if (o.horizon == 0)
        throw UsageError("--horizon must be at least 1");
    const auto ckpt = load_checkpoint(o.model);
    const auto seq = load_normalized(o.input, err);
    const auto w = ckpt.hyper.window_length;
    if (o.start + w > seq.size())
        throw DataError("sequence has " + std::to_string(seq.size()) + " frames; seed window needs " +
                        std::to_string(o.start + w));
    const auto vectors = vectors_of(seq);
    const auto seed_window = std::span<const PoseVector>(vectors).subspan(o.start, w);
    const auto generated = generate(seed_window, o.horizon, ckpt.params);

    std::int64_t index = seq.frames()[o.start + w - 1].frame_index();
    std::vector<PoseFrame> frames;
    for (const auto& v : generated)
        frames.push_back(vector_to_frame(v, ++index));
    write_file_atomic(o.out, serialize_sequence(PoseSequence(std::move(frames), seq.width(), seq.height(),
                                                             CoordinateSpace::normalized)));
    out << "generated " << generated.size() << "\n";
    return kSuccess;
}

int cmd_render(const Options& o, std::ostream& out)
{
    const auto seq = parse_sequence(read_text_file(o.input));
    RenderStyle style;
    style.width = o.canvas_w > 0 ? o.canvas_w : static_cast<std::size_t>(std::lround(seq.width()));
    style.height = o.canvas_h > 0 ? o.canvas_h : static_cast<std::size_t>(std::lround(seq.height()));
    const auto paths = render_sequence(seq, style, o.out, RenderOptions{o.overwrite});
    out << "frames " << paths.size() << "\n";
    return kSuccess;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err)
{
    const auto ckpt = load_checkpoint(o.model);
    std::vector<PoseSequence> seqs;
    for (const auto& p : o.persons)
        seqs.push_back(load_normalized(p, err));
    const auto pairs = make_windows(seqs, ckpt.hyper.window_length);
    const bool masks = ckpt.hyper.mask_missing;

    std::vector<std::size_t> all(pairs.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    out << "pairs " << pairs.size() << "\n";
    out << "rmse " << fmt(evaluate_rmse(ckpt.params, pairs, all, masks)) << "\n";
    out << "persistence_rmse " << fmt(persistence_rmse(pairs, all, masks)) << "\n";

    // Same split the trainer used for these inputs, when there is one.
    try {
        auto split = split_pairs(pairs, ckpt.hyper.val_fraction, ckpt.hyper.seed);
        if (masks) {
            auto drop = [&](std::vector<std::size_t>& v) {
                std::erase_if(v, [&](std::size_t i) {
                    return std::all_of(pairs[i].mask.begin(), pairs[i].mask.end(), [](double m) { return m == 0.0; });
                });
            };
            drop(split.train);
            drop(split.val);
        }
        out << "train_rmse " << fmt(evaluate_rmse(ckpt.params, pairs, split.train, masks)) << "\n";
        out << "val_rmse " << fmt(evaluate_rmse(ckpt.params, pairs, split.val, masks)) << "\n";
        out << "persistence_val_rmse " << fmt(persistence_rmse(pairs, split.val, masks)) << "\n";
    } catch (const UsageError&) {
        // A single pair cannot be split; overall numbers above still apply.
    }
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"KP-RNN pose-sequence prediction toolkit", "kprnn"};
    app.require_subcommand(1);
    Options o;

    auto add_seed = [&o](CLI::App* cmd) {
        cmd->add_option_function<std::uint64_t>(
            "--seed",
            [&o](std::uint64_t s) {
                o.seed = s;
                o.seed_given = true;
            },
            "Random seed");
    };

    auto* ingest = app.add_subcommand("ingest", "Parse a directory of OpenPose JSON files");
    ingest->add_option("dir", o.dir, "Directory of per-frame OpenPose output")->required();
    ingest->add_option("--out", o.out, "Output pose file")->required();
    ingest->add_option("--width", o.width, "Footage width in pixels")->required()->check(CLI::PositiveNumber);
    ingest->add_option("--height", o.height, "Footage height in pixels")->required()->check(CLI::PositiveNumber);
    ingest->add_option("--pattern", o.pattern, "File name glob; {n} captures the frame number");
    ingest->add_flag("--allow-gaps", o.allow_gaps, "Accept missing frame numbers");
    add_seed(ingest);

    auto* track = app.add_subcommand("track", "Reduce a multi-person recording to one performer");
    track->add_option("input", o.input, "Multi-person pose file from ingest")->required();
    track->add_option("--out", o.out, "Output single-person pose file")->required();
    track->add_option("--max-jump", o.max_jump, "Largest centroid jump as a fraction of the frame diagonal")
        ->check(CLI::PositiveNumber);
    track->add_option("--select", o.select, "highest_confidence or index:K");
    add_seed(track);

    auto* train_cmd = app.add_subcommand("train", "Train a KP-RNN model");
    train_cmd->add_option("persons", o.persons, "Single-person pose files")->required();
    train_cmd->add_option("--config", o.config, "Hyperparameter JSON");
    train_cmd->add_option("--out", o.out, "Checkpoint path")->required();
    train_cmd->add_option("--curve", o.curve, "Training-curve CSV path");
    train_cmd->add_option("--epochs", o.epochs, "Override max_epochs");
    add_seed(train_cmd);

    auto* predict_cmd = app.add_subcommand("predict", "One-step predictions over every window");
    predict_cmd->add_option("model", o.model, "Checkpoint")->required();
    predict_cmd->add_option("input", o.input, "Single-person pose file")->required();
    predict_cmd->add_option("--out", o.out, "Output pose file")->required();
    add_seed(predict_cmd);

    auto* generate_cmd = app.add_subcommand("generate", "Autoregressive motion generation");
    generate_cmd->add_option("model", o.model, "Checkpoint")->required();
    generate_cmd->add_option("input", o.input, "Single-person pose file providing the seed window")->required();
    generate_cmd->add_option("--horizon", o.horizon, "Frames to generate")->required();
    generate_cmd->add_option("--start", o.start, "First frame position of the seed window");
    generate_cmd->add_option("--out", o.out, "Output pose file")->required();
    add_seed(generate_cmd);

    auto* render = app.add_subcommand("render", "Render stick-figure PNG frames");
    render->add_option("input", o.input, "Pose file")->required();
    render->add_option("--out", o.out, "Output directory")->required();
    render->add_option("--width", o.canvas_w, "Canvas width (default: footage width)");
    render->add_option("--height", o.canvas_h, "Canvas height (default: footage height)");
    render->add_flag("--overwrite", o.overwrite, "Replace existing frames");
    add_seed(render);

    auto* eval = app.add_subcommand("eval", "Model and persistence-baseline RMSE");
    eval->add_option("model", o.model, "Checkpoint")->required();
    eval->add_option("persons", o.persons, "Single-person pose files")->required();
    add_seed(eval);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << "\n" << app.help();
        return kUsageError;
    }

    try {
        if (ingest->parsed())
            return cmd_ingest(o, out);
        if (track->parsed())
            return cmd_track(o, out);
        if (train_cmd->parsed())
            return cmd_train(o, out, err);
        if (predict_cmd->parsed())
            return cmd_predict(o, out, err);
        if (generate_cmd->parsed())
            return cmd_generate(o, out, err);
        if (render->parsed())
            return cmd_render(o, out);
        if (eval->parsed())
            return cmd_eval(o, out, err);
    } catch (const UsageError& e) {
        err << "error: usage: " << e.what() << "\n";
        return kUsageError;
    } catch (const NumericalError& e) {
        err << "error: numerical: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: data: " << e.what() << "\n";
        return kDataError;
    }
    err << "error: usage: no subcommand\n";
    return kUsageError;
}

}  // namespace kprnn::cli
