#include "kprnn/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "kprnn/error.hpp"
#include "kprnn/pose_io.hpp"

namespace kprnn {

namespace {

void check_pairs(std::span<const PoseVector> preds, std::span<const PoseVector> targets)
{
    if (preds.size() != targets.size())
        throw UsageError("prediction/target count mismatch: " + std::to_string(preds.size()) + " vs " +
                         std::to_string(targets.size()));
    if (preds.empty())
        throw UsageError("rmse needs at least one pair");
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double rmse(std::span<const PoseVector> preds, std::span<const PoseVector> targets, std::span<const PoseMask> masks)
{
    check_pairs(preds, targets);
    if (!masks.empty() && masks.size() != preds.size())
        throw UsageError("mask count does not match pair count");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < preds.size(); ++n) {
        for (std::size_t i = 0; i < kPoseDims; ++i) {
            if (!masks.empty() && masks[n][i] == 0.0)
                continue;
            const double d = preds[n][i] - targets[n][i];
            sum += d * d;
            ++count;
        }
    }
    if (count == 0)
        throw UsageError("rmse mask excludes every element");
    return std::sqrt(sum / static_cast<double>(count));
}

std::array<double, kJointCount> per_keypoint_rmse(std::span<const PoseVector> preds, std::span<const PoseVector> targets)
{
    check_pairs(preds, targets);
    std::array<double, kJointCount> out{};
    for (std::size_t n = 0; n < preds.size(); ++n) {
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const double dx = preds[n][2 * j] - targets[n][2 * j];
            const double dy = preds[n][2 * j + 1] - targets[n][2 * j + 1];
            out[j] += dx * dx + dy * dy;
        }
    }
    for (auto& v : out)
        v = std::sqrt(v / (2.0 * static_cast<double>(preds.size())));
    return out;
}

double persistence_baseline(const PoseSequence& seq, std::size_t window_length)
{
    if (seq.space() != CoordinateSpace::normalized)
        throw UsageError("persistence baseline expects a normalized sequence");
    if (window_length == 0)
        throw UsageError("window length must be at least 1");
    if (seq.size() <= window_length + 1)
        throw UsageError("sequence of " + std::to_string(seq.size()) + " frames is too short for window " +
                         std::to_string(window_length));
    std::vector<PoseVector> preds;
    std::vector<PoseVector> targets;
    for (std::size_t t = window_length; t < seq.size(); ++t) {
        preds.push_back(frame_to_vector(seq.frames()[t - 1], seq.space()));
        targets.push_back(frame_to_vector(seq.frames()[t], seq.space()));
    }
    return rmse(preds, targets);
}

void export_curve(std::span<const TrainingRecord> records, const std::filesystem::path& path)
{
    std::string csv = "epoch,train_rmse,val_rmse,lr\n";
    for (const auto& r : records) {
        csv += std::to_string(r.epoch) + ',' + format_double(r.train_rmse) + ',' + format_double(r.val_rmse) + ',' +
               format_double(r.lr) + '\n';
    }
    write_file_atomic(path, csv);
}

std::vector<TrainingRecord> read_curve(const std::filesystem::path& path)
{
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "epoch,train_rmse,val_rmse,lr")
        throw DataError(path.string() + ": missing training-curve header");
    std::vector<TrainingRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        TrainingRecord r;
        std::istringstream fields(line);
        std::string cell[4];
        for (auto& c : cell) {
            if (!std::getline(fields, c, ','))
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
        }
        try {
            r.epoch = std::stoul(cell[0]);
            r.train_rmse = std::stod(cell[1]);
            r.val_rmse = std::stod(cell[2]);
            r.lr = std::stod(cell[3]);
        } catch (const std::exception&) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace kprnn
