#include "dualtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualtrack {

namespace {

void check_protocol(int reinit_delay, int burn_in) {
    if (reinit_delay < 1) throw std::invalid_argument("protocol: reinit_delay must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("protocol: negative burn_in");
}

// Frames contributing to accuracy: everything except the burn_in frames
// from each (re)init on and the frames between a failure and the next
// init. The failure frame itself stays scored.
std::vector<char> scored_mask(int length, const std::vector<int>& failures, int reinit_delay,
                              int burn_in) {
    std::vector<char> scored(static_cast<size_t>(length), 1);
    for (int f = 0; f < std::min(burn_in, length); ++f) scored[f] = 0;
    for (int fail : failures) {
        const int stop = std::min(length, fail + reinit_delay + burn_in);
        for (int f = fail + 1; f < stop; ++f) scored[f] = 0;
    }
    return scored;
}

}  // namespace

void validate_record(const RunRecord& record) {
    if (record.boxes.size() != record.overlaps.size())
        throw std::invalid_argument("record: box/overlap count mismatch");
    for (double v : record.overlaps)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("record: overlap outside [0,1]");
    int prev = -1;
    for (int f : record.failures) {
        if (f <= prev || f >= static_cast<int>(record.overlaps.size()))
            throw std::invalid_argument("record: failures must be strictly increasing, in range");
        prev = f;
    }
}

RunRecord run_reset_protocol(FrameTracker& tracker, const std::vector<Box>& groundtruth,
                             int reinit_delay, int burn_in) {
    check_protocol(reinit_delay, burn_in);
    const int length = static_cast<int>(groundtruth.size());
    if (length <= burn_in)
        throw std::invalid_argument("reset protocol: sequence not longer than burn_in");

    RunRecord record;
    record.boxes.assign(groundtruth.size(), Box{});
    record.overlaps.assign(groundtruth.size(), 0.0);

    tracker.init(0, groundtruth[0]);
    record.boxes[0] = groundtruth[0];
    record.overlaps[0] = 1.0;
    int f = 1;
    while (f < length) {
        const Box pred = tracker.track(f);
        record.boxes[f] = pred;
        const double overlap = iou(pred, groundtruth[f]);
        record.overlaps[f] = overlap;
        if (overlap == 0.0) {
            record.failures.push_back(f);
            const int reinit = f + reinit_delay;
            if (reinit >= length) break;
            tracker.init(reinit, groundtruth[reinit]);
            record.boxes[reinit] = groundtruth[reinit];
            record.overlaps[reinit] = 1.0;
            f = reinit + 1;
        } else {
            ++f;
        }
    }
    return record;
}

RunRecord run_ope(FrameTracker& tracker, const std::vector<Box>& groundtruth) {
    if (groundtruth.empty()) throw std::invalid_argument("ope: empty sequence");
    RunRecord record;
    record.boxes.reserve(groundtruth.size());
    record.overlaps.reserve(groundtruth.size());
    tracker.init(0, groundtruth[0]);
    record.boxes.push_back(groundtruth[0]);
    record.overlaps.push_back(1.0);
    for (int f = 1; f < static_cast<int>(groundtruth.size()); ++f) {
        const Box pred = tracker.track(f);
        record.boxes.push_back(pred);
        record.overlaps.push_back(iou(pred, groundtruth[f]));
    }
    return record;
}

AccuracyRobustness accuracy_robustness(const std::vector<RunRecord>& records, int reinit_delay,
                                       int burn_in) {
    check_protocol(reinit_delay, burn_in);
    if (records.empty()) throw std::invalid_argument("accuracy_robustness: no records");
    double overlap_sum = 0.0;
    long scored_frames = 0;
    double ratio_sum = 0.0;
    for (const RunRecord& record : records) {
        validate_record(record);
        const int length = static_cast<int>(record.overlaps.size());
        if (length == 0) throw std::invalid_argument("accuracy_robustness: empty record");
        const std::vector<char> scored = scored_mask(length, record.failures, reinit_delay,
                                                     burn_in);
        for (int f = 0; f < length; ++f)
            if (scored[f]) {
                overlap_sum += record.overlaps[f];
                ++scored_frames;
            }
        ratio_sum += static_cast<double>(record.failures.size()) / length;
    }
    if (scored_frames == 0) throw std::invalid_argument("accuracy_robustness: no scored frames");
    return {overlap_sum / static_cast<double>(scored_frames),
            ratio_sum / static_cast<double>(records.size())};
}

EaoInterval default_eao_interval(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("eao: no records");
    std::vector<int> lengths;
    lengths.reserve(records.size());
    for (const RunRecord& record : records)
        lengths.push_back(static_cast<int>(record.overlaps.size()));
    std::sort(lengths.begin(), lengths.end());
    const int median = lengths[(lengths.size() - 1) / 2];
    EaoInterval interval;
    interval.lo = std::max(1, static_cast<int>(std::llround(0.5 * median)));
    interval.hi = lengths.back();
    return interval;
}

double eao_lite(const std::vector<RunRecord>& records, EaoInterval interval) {
    if (records.empty()) throw std::invalid_argument("eao: no records");
    int longest = 0;
    for (const RunRecord& record : records) {
        validate_record(record);
        longest = std::max(longest, static_cast<int>(record.overlaps.size()));
    }
    if (interval.lo < 1 || interval.lo > interval.hi || interval.hi > longest)
        throw std::invalid_argument("eao: interval outside the observed lengths");
    double total = 0.0;
    for (int i = interval.lo; i <= interval.hi; ++i) {
        double sum = 0.0;
        int reached = 0;
        for (const RunRecord& record : records)
            if (static_cast<int>(record.overlaps.size()) >= i) {
                sum += record.overlaps[i - 1];
                ++reached;
            }
        total += sum / reached;
    }
    return total / (interval.hi - interval.lo + 1);
}

double eao_lite(const std::vector<RunRecord>& records) {
    return eao_lite(records, default_eao_interval(records));
}

OpeCurves ope_curves(const std::vector<RunRecord>& records,
                     const std::vector<std::vector<Box>>& groundtruth) {
    if (records.empty() || records.size() != groundtruth.size())
        throw std::invalid_argument("ope_curves: record/groundtruth count mismatch");
    long frames = 0;
    long success[101] = {};
    long precise = 0;
    long norm_precise = 0;
    for (size_t r = 0; r < records.size(); ++r) {
        validate_record(records[r]);
        const RunRecord& record = records[r];
        const std::vector<Box>& gt = groundtruth[r];
        if (record.boxes.size() != gt.size())
            throw std::invalid_argument("ope_curves: groundtruth length mismatch");
        for (size_t f = 0; f < gt.size(); ++f) {
            const double overlap = record.overlaps[f];
            for (int t = 0; t <= 100; ++t)
                if (overlap > t / 100.0) ++success[t];
            const double dx = record.boxes[f].cx - gt[f].cx;
            const double dy = record.boxes[f].cy - gt[f].cy;
            if (std::hypot(dx, dy) < 20.0) ++precise;
            if (!gt[f].valid()) throw std::invalid_argument("ope_curves: degenerate groundtruth");
            if (std::hypot(dx / gt[f].w, dy / gt[f].h) < 0.2) ++norm_precise;
            ++frames;
        }
    }
    if (frames == 0) throw std::invalid_argument("ope_curves: no frames");
    OpeCurves out;
    for (int t = 0; t <= 100; ++t)
        out.auc += static_cast<double>(success[t]) / static_cast<double>(frames);
    out.auc /= 101.0;
    out.precision = static_cast<double>(precise) / static_cast<double>(frames);
    out.norm_precision = static_cast<double>(norm_precise) / static_cast<double>(frames);
    return out;
}

double kld(const Heatmap& gt_map, const Heatmap& pred_map, HeatmapNorm norm) {
    if (gt_map.height != pred_map.height || gt_map.width != pred_map.width ||
        gt_map.anchors != pred_map.anchors)
        throw std::invalid_argument("kld: map shapes differ");
    const Heatmap q = norm == HeatmapNorm::Softmax ? softmax_norm(gt_map) : sum_norm(gt_map);
    const Heatmap p = softmax_norm(pred_map);
    double div = 0.0;
    for (size_t k = 0; k < q.values.size(); ++k) {
        if (q.values[k] <= 0.0) continue;
        div += q.values[k] * (std::log(q.values[k]) - std::log(std::max(p.values[k], 1e-12)));
    }
    return div;
}

double npd(double gt_i, double gt_j, const Heatmap& pred_map) {
    if (pred_map.values.empty()) throw std::invalid_argument("npd: empty map");
    const Peak peak = argmax_peak(pred_map);
    const double diag = std::sqrt(static_cast<double>(pred_map.height) * pred_map.height +
                                  static_cast<double>(pred_map.width) * pred_map.width);
    return std::hypot(peak.i - gt_i, peak.j - gt_j) / diag;
}

std::vector<double> sweep_cumulative(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep_cumulative: no values");
    std::vector<double> out;
    out.reserve(values.size());
    double sum = 0.0;
    for (size_t k = 0; k < values.size(); ++k) {
        sum += values[k];
        out.push_back(sum / static_cast<double>(k + 1));
    }
    return out;
}

}  // namespace dualtrack
