#include "kprnn/person_tracker.hpp"

#include <cmath>
#include <limits>

#include "kprnn/error.hpp"

namespace kprnn {

SelectionRule SelectionRule::parse(std::string_view text)
{
    if (text == "highest_confidence")
        return {};
    constexpr std::string_view prefix = "index:";
    if (text.starts_with(prefix)) {
        const std::string digits(text.substr(prefix.size()));
        if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos)
            return SelectionRule{Kind::index_k, std::stoul(digits)};
    }
    throw UsageError("selection rule must be 'highest_confidence' or 'index:K', got '" + std::string(text) + "'");
}

std::string SelectionRule::to_string() const
{
    return kind == Kind::highest_confidence ? "highest_confidence" : "index:" + std::to_string(k);
}

double pose_distance(const PoseFrame& a, const PoseFrame& b)
{
    double sum = 0.0;
    std::size_t shared = 0;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        if (a[j].missing() || b[j].missing())
            continue;
        sum += std::hypot(a[j].x - b[j].x, a[j].y - b[j].y);
        ++shared;
    }
    return shared == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(shared);
}

double mean_confidence(const PoseFrame& pose)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& kp : pose.keypoints()) {
        if (kp.missing())
            continue;
        sum += kp.c;
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

std::size_t pick_anchor(const MultiPersonFrame& frame, const SelectionRule& rule)
{
    if (rule.kind == SelectionRule::Kind::index_k) {
        if (rule.k >= frame.people.size())
            throw DataError("selection index " + std::to_string(rule.k) + " but anchor frame " +
                            std::to_string(frame.frame_index) + " has " + std::to_string(frame.people.size()) +
                            " people");
        return rule.k;
    }
    std::size_t best = 0;
    double best_conf = -1.0;
    for (std::size_t p = 0; p < frame.people.size(); ++p) {
        const double conf = mean_confidence(frame.people[p]);
        if (conf > best_conf) {
            best_conf = conf;
            best = p;
        }
    }
    return best;
}

}  // namespace

TrackResult select_person(const std::vector<MultiPersonFrame>& frames, const TrackerConfig& cfg, double width,
                          double height)
{
    if (!(cfg.max_jump > 0.0))
        throw UsageError("max_jump must be positive");
    if (!(width > 0.0) || !(height > 0.0))
        throw UsageError("tracker needs positive frame dimensions");
    if (frames.empty())
        throw DataError("no frames to track");

    std::size_t anchor_pos = frames.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!frames[i].people.empty()) {
            anchor_pos = i;
            break;
        }
    }
    if (anchor_pos == frames.size())
        throw DataError("no frame contains a person");

    TrackReport report;
    report.total_frames = frames.size();
    report.chosen_initial_index = pick_anchor(frames[anchor_pos], cfg.selection_rule);

    const double max_shift = cfg.max_jump * std::hypot(width, height);
    PoseFrame last = frames[anchor_pos].people[report.chosen_initial_index];

    std::vector<PoseFrame> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < anchor_pos; ++i) {
        out.push_back(last.with_index(frames[i].frame_index));
        report.carried_frames.push_back(frames[i].frame_index);
    }
    out.push_back(last);

    for (std::size_t i = anchor_pos + 1; i < frames.size(); ++i) {
        const auto& frame = frames[i];
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < frame.people.size(); ++p) {
            const double d = pose_distance(frame.people[p], last);
            if (d < best_dist) {
                best_dist = d;
                best = p;
            }
        }

        bool accept = std::isfinite(best_dist);
        if (accept) {
            const auto from = centroid(last);
            const auto to = centroid(frame.people[best]);
            accept = from.valid && to.valid && std::hypot(to.x - from.x, to.y - from.y) <= max_shift;
        }
        if (accept) {
            last = frame.people[best];
            out.push_back(last);
        } else {
            out.push_back(last.with_index(frame.frame_index));
            report.carried_frames.push_back(frame.frame_index);
        }
    }

    return TrackResult{PoseSequence(std::move(out), width, height, CoordinateSpace::raw_pixels), std::move(report)};
}

}  // namespace kprnn
