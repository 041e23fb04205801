#include "dualtrack/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace dualtrack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double parse_strict_double(const std::string& text) {
    double out = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || !std::isfinite(out))
        throw std::invalid_argument("not a number: '" + text + "'");
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Converts a missing or malformed config file into a config error.
AppConfig load_app_config(const std::string& path) {
    AppConfig cfg;
    overlay_app_config(cfg, path);
    return cfg;
}

template <typename F>
int guarded(F&& body) {
    try {
        body();
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}

template <typename F>
void parallel_for(int n, F&& fn) {
    const int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = 0; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& th : pool) th.join();
}

std::string frame_dump_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%08d.txt", index);
    return buf;
}

// Drives the tracker over features served per frame index; optionally dumps
// the fused response per frame (zeros when the frame produced none).
class FnTracker : public FrameTracker {
  public:
    FnTracker(std::function<FrameFeatures(int)> features, const TrackerConfig& cfg, std::string dump_dir,
              int dump_h, int dump_w, int dump_a)
        : features_(std::move(features)),
          cfg_(cfg),
          dump_dir_(std::move(dump_dir)),
          dump_h_(dump_h),
          dump_w_(dump_w),
          dump_a_(dump_a) {}

    void init(int frame_index, const Box& gt) override {
        state_ = initialize(features_(frame_index).pyramid, gt, cfg_);
        dump(frame_index, Heatmap{});
    }

    Box track(int frame_index) override {
        StepResult out = step(state_, features_(frame_index), cfg_);
        state_ = std::move(out.state);
        dump(frame_index, out.result.fused);
        return out.result.box;
    }

  private:
    void dump(int frame_index, const Heatmap& fused) {
        if (dump_dir_.empty()) return;
        if (fused.values.empty()) {
            save_heatmap_text(dump_dir_ + "/" + frame_dump_name(frame_index),
                              Heatmap::zeros(dump_h_, dump_w_, dump_a_));
        } else {
            save_heatmap_text(dump_dir_ + "/" + frame_dump_name(frame_index), fused);
        }
    }

    std::function<FrameFeatures(int)> features_;
    TrackerConfig cfg_;
    std::string dump_dir_;
    int dump_h_;
    int dump_w_;
    int dump_a_;
    TrackerState state_;
};

struct DumpShape {
    int h = 0;
    int w = 0;
    int a = 1;
};

// Fused responses cover (cells - 4) per side; the anchor count collapses to
// one when no per-anchor branch contributes.
DumpShape dump_shape(const LoadedSequence& seq, const AppConfig& cfg) {
    DumpShape s;
    const int stride = cfg.features.stride;
    if (stride <= 0) throw std::invalid_argument("features.stride must be positive");
    s.h = seq.frame_height / stride - 4;
    s.w = seq.frame_width / stride - 4;
    if (seq.image_mode || cfg.tracker.accurate_branch == AccurateBranch::None)
        s.a = 1;
    else
        s.a = 5;
    return s;
}

RunRecord run_protocol(FrameTracker& tracker, const std::vector<Box>& gt, const std::string& protocol) {
    if (protocol == "reset") return run_reset_protocol(tracker, gt);
    if (protocol == "ope") return run_ope(tracker, gt);
    throw std::invalid_argument("unknown protocol '" + protocol + "' (expected reset or ope)");
}

std::vector<std::vector<Box>> groundtruth_of(const std::vector<LoadedSequence>& seqs) {
    std::vector<std::vector<Box>> out;
    out.reserve(seqs.size());
    for (const auto& s : seqs) out.push_back(s.groundtruth);
    return out;
}

std::vector<LoadedSequence> load_sequences(const std::vector<std::string>& dirs) {
    std::vector<LoadedSequence> seqs;
    seqs.reserve(dirs.size());
    for (const auto& dir : dirs) seqs.push_back(read_sequence(dir));
    return seqs;
}

// Effective config for one sequence: its stored echo, then the config file,
// then an optional single sweep assignment, then the seed override.
AppConfig effective_config(const LoadedSequence& seq, const std::string& config_path, const std::string& sweep_key,
                           const std::string& sweep_value, bool has_seed, std::uint64_t seed) {
    AppConfig cfg = seq.config;
    overlay_app_config(cfg, config_path);
    if (!sweep_key.empty()) apply_assignment(cfg, sweep_key, sweep_value);
    if (has_seed) apply_assignment(cfg, "tracker.seed", std::to_string(seed));
    return cfg;
}

double mean_localization_loss(const std::vector<RunRecord>& records) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : records) {
        for (double v : rec.overlaps) sum += 1.0 - v;
        n += rec.overlaps.size();
    }
    if (n == 0) throw std::invalid_argument("no frames to score");
    return sum / static_cast<double>(n);
}

}  // namespace

int thread_budget() {
    const char* env = std::getenv("DUALTRACK_THREADS");
    int budget = 0;
    if (env != nullptr && *env != '\0') {
        try {
            budget = std::stoi(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("DUALTRACK_THREADS must be an integer");
        }
    } else {
        budget = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::max(1, budget);
}

void overlay_app_config(AppConfig& cfg, const std::string& path) {
    if (path.empty()) return;
    std::string text;
    try {
        text = read_text(path);
    } catch (const IoError& e) {
        throw std::invalid_argument(std::string("config file: ") + e.what());
    }
    apply_config_text(cfg, text);
}

FrameFeatures sequence_frame_features(const LoadedSequence& seq, const AppConfig& cfg, int frame) {
    if (frame < 0 || static_cast<std::size_t>(frame) >= seq.groundtruth.size())
        throw std::out_of_range("frame index out of range");
    FrameFeatures out;
    if (seq.image_mode) {
        out.pyramid = image_features(seq.images[frame], seq.frame_height, seq.frame_width, cfg.features);
        return out;
    }
    const SceneState& scene = seq.scenes[frame];
    const int stride = cfg.features.stride;
    if (stride <= 0 || scene.frame_size % stride != 0)
        throw std::invalid_argument("features.stride must divide the frame size");
    const int cells = scene.frame_size / stride;
    const AnchorGrid grid = response_grid(cfg.tracker, cells, cells, stride);
    out.pyramid = synth_features(scene, cfg.features);
    out.oracle_boxes = make_oracle_boxes(scene, grid, cfg.features.box_noise_sigma);
    out.oracle_iou = make_oracle_iou(scene, *out.oracle_boxes);
    return out;
}

RunRecord track_sequence(const LoadedSequence& seq, const AppConfig& cfg, const std::string& protocol,
                         const std::string& sequence_dir, const std::string& dump_dir) {
    if (!dump_dir.empty()) {
        std::error_code ec;
        fs::create_directories(dump_dir, ec);
        if (ec) throw IoError("cannot create dump directory: " + dump_dir);
    }
    const DumpShape shape = dump_shape(seq, cfg);
    FnTracker tracker([&seq, &cfg](int frame) { return sequence_frame_features(seq, cfg, frame); }, cfg.tracker,
                      dump_dir, shape.h, shape.w, shape.a);
    RunRecord rec = run_protocol(tracker, seq.groundtruth, protocol);
    rec.sequence = seq.name;
    rec.config = echo_config(cfg);
    rec.config["run.protocol"] = protocol;
    rec.config["run.sequence_dir"] = sequence_dir;
    return rec;
}

std::vector<RunRecord> track_all(const std::vector<LoadedSequence>& seqs, const std::vector<AppConfig>& cfgs,
                                 const std::string& protocol, const std::vector<std::string>& dirs) {
    if (seqs.size() != cfgs.size() || seqs.size() != dirs.size())
        throw std::invalid_argument("sequence, config, and directory counts differ");
    std::vector<RunRecord> records(seqs.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    parallel_for(static_cast<int>(seqs.size()), [&](int i) {
        try {
            records[i] = track_sequence(seqs[i], cfgs[i], protocol, dirs[i]);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
    return records;
}

SweepSpec parse_sweep(const std::string& spec) {
    SweepSpec out;
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) {
        // grid file: one key=value row per line
        std::string text;
        try {
            text = read_text(spec);
        } catch (const IoError& e) {
            throw std::invalid_argument(std::string("sweep grid file: ") + e.what());
        }
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const std::size_t leq = stripped.find('=');
            if (leq == std::string::npos)
                throw std::invalid_argument("sweep grid line must be key=value: '" + stripped + "'");
            out.keys.push_back(trim(stripped.substr(0, leq)));
            out.values.push_back(trim(stripped.substr(leq + 1)));
        }
        if (out.keys.empty()) throw std::invalid_argument("sweep grid file has no rows: " + spec);
        const bool uniform = std::all_of(out.keys.begin(), out.keys.end(),
                                         [&](const std::string& k) { return k == out.keys.front(); });
        if (uniform) out.key = out.keys.front();
        return out;
    }

    const std::string key = trim(spec.substr(0, eq));
    const std::string rest = trim(spec.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("sweep key is empty");
    out.key = key;
    const std::size_t c1 = rest.find(':');
    if (c1 == std::string::npos) {
        out.keys = {key};
        out.values = {rest};
        return out;
    }
    const std::size_t c2 = rest.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("sweep range must be lo:hi:step, got '" + rest + "'");
    const double lo = parse_strict_double(rest.substr(0, c1));
    const double hi = parse_strict_double(rest.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_strict_double(rest.substr(c2 + 1));
    if (step <= 0.0) throw std::invalid_argument("sweep step must be positive");
    if (hi < lo) throw std::invalid_argument("sweep range is empty");
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) {
        const double v = lo + i * step;
        out.keys.push_back(key);
        out.values.push_back(format_double_sig(v, 12));
    }
    return out;
}

std::vector<std::vector<double>> simplex_grid(int layers) {
    if (layers <= 0) throw std::invalid_argument("layer count must be positive");
    std::vector<std::vector<double>> out;
    std::vector<int> ticks(layers, 0);
    // lexicographic enumeration of compositions of 10 into `layers` parts
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
        if (idx == layers - 1) {
            ticks[idx] = remaining;
            std::vector<double> w(layers);
            for (int k = 0; k < layers; ++k) w[k] = ticks[k] / 10.0;
            out.push_back(std::move(w));
            return;
        }
        for (int t = 0; t <= remaining; ++t) {
            ticks[idx] = t;
            rec(idx + 1, remaining - t);
        }
    };
    rec(0, 10);
    return out;
}

CalibrationResult calibrate_weights(const std::vector<CalibrationSequence>& seqs, const AppConfig& cfg,
                                    const std::string& objective) {
    if (objective != "eao" && objective != "loss")
        throw std::invalid_argument("objective must be eao or loss, got '" + objective + "'");
    if (seqs.size() < 3) throw std::invalid_argument("calibration needs at least 3 sequences");
    for (const auto& s : seqs) {
        if (s.frames.empty() || s.frames.size() != s.groundtruth.size())
            throw std::invalid_argument("calibration sequence frames and groundtruth differ");
    }
    const int layers = static_cast<int>(seqs.front().frames.front().pyramid.layers.size());
    const bool maximize = (objective == "eao");

    auto evaluate = [&](const std::vector<double>& alpha, const std::vector<double>& beta) {
        std::vector<RunRecord> records(seqs.size());
        std::exception_ptr failure;
        std::mutex failure_mutex;
        parallel_for(static_cast<int>(seqs.size()), [&](int i) {
            try {
                TrackerConfig tcfg = cfg.tracker;
                tcfg.alpha = alpha;
                tcfg.beta = beta;
                const auto& seq = seqs[i];
                FnTracker tracker([&seq](int frame) { return seq.frames[frame]; }, tcfg, "", 0, 0, 1);
                records[i] = run_reset_protocol(tracker, seq.groundtruth);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        if (failure) std::rethrow_exception(failure);
        return maximize ? eao_lite(records) : mean_localization_loss(records);
    };

    const auto candidates = simplex_grid(layers);
    auto better = [maximize](double a, double b) { return maximize ? a > b : a < b; };

    CalibrationResult result;
    result.alpha = cfg.tracker.alpha;
    result.beta = cfg.tracker.beta;

    // Filter features gate everything downstream, so settle beta before alpha.
    bool first = true;
    for (const auto& beta : candidates) {
        const double score = evaluate(result.alpha, beta);
        if (first || better(score, result.score)) {
            result.score = score;
            result.beta = beta;
            first = false;
        }
    }
    first = true;
    for (const auto& alpha : candidates) {
        const double score = evaluate(alpha, result.beta);
        if (first || better(score, result.score)) {
            result.score = score;
            result.alpha = alpha;
            first = false;
        }
    }
    return result;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool has_seed, std::uint64_t seed) {
    return guarded([&] {
        if (out_dir.empty()) throw std::invalid_argument("simulate needs an output directory");
        AppConfig cfg = load_app_config(config_path);
        if (has_seed) cfg.sim.seed = seed;
        const Sequence seq = gen_sequence(cfg.sim);
        write_sequence(out_dir, seq, cfg, cfg.features.mode == FeatureMode::Image);
    });
}

int cmd_track(const TrackOptions& opt) {
    return guarded([&] {
        if (opt.sequence_dir.empty()) throw std::invalid_argument("track needs a sequence directory");
        if (opt.out_path.empty()) throw std::invalid_argument("track needs an output record path");
        if (opt.protocol != "reset" && opt.protocol != "ope")
            throw std::invalid_argument("unknown protocol '" + opt.protocol + "' (expected reset or ope)");
        const LoadedSequence seq = read_sequence(opt.sequence_dir);
        const AppConfig cfg = effective_config(seq, opt.config_path, "", "", opt.has_seed, opt.seed);
        const RunRecord rec = track_sequence(seq, cfg, opt.protocol, opt.sequence_dir, opt.dump_dir);
        write_run_record(opt.out_path, rec);
    });
}

int cmd_eval(const std::vector<std::string>& record_paths, const std::string& protocol, const std::string& out_path,
             std::uint64_t seed) {
    return guarded([&] {
        if (record_paths.empty()) throw std::invalid_argument("eval needs at least one run record");
        if (out_path.empty()) throw std::invalid_argument("eval needs an output report path");
        if (protocol != "reset" && protocol != "ope")
            throw std::invalid_argument("unknown protocol '" + protocol + "' (expected reset or ope)");
        std::vector<RunRecord> records;
        records.reserve(record_paths.size());
        for (const auto& path : record_paths) {
            RunRecord rec = read_run_record(path);
            try {
                validate_record(rec);
            } catch (const std::invalid_argument& e) {
                throw DataError(path + ": " + e.what());
            }
            records.push_back(std::move(rec));
        }

        MetricsReport report;
        if (protocol == "reset") {
            const AccuracyRobustness ar = accuracy_robustness(records);
            report.accuracy = ar.accuracy;
            report.robustness = ar.robustness;
            report.eao = eao_lite(records);
        } else {
            std::vector<std::vector<Box>> gts;
            gts.reserve(records.size());
            for (const auto& rec : records) {
                const auto it = rec.config.find("run.sequence_dir");
                if (it == rec.config.end())
                    throw DataError(rec.sequence + ": record has no run.sequence_dir for groundtruth lookup");
                gts.push_back(read_sequence(it->second).groundtruth);
            }
            const OpeCurves curves = ope_curves(records, gts);
            report.auc = curves.auc;
            report.precision = curves.precision;
            report.norm_precision = curves.norm_precision;
        }
        write_metrics_report(out_path, report, records.front().config, seed);
    });
}

int cmd_ablate(const std::vector<std::string>& sequence_dirs, const std::string& sweep,
               const std::string& config_path, const std::string& out_csv) {
    return guarded([&] {
        if (sequence_dirs.empty()) throw std::invalid_argument("ablate needs at least one sequence");
        if (out_csv.empty()) throw std::invalid_argument("ablate needs an output csv path");
        const SweepSpec spec = parse_sweep(sweep);
        const auto seqs = load_sequences(sequence_dirs);
        const auto gts = groundtruth_of(seqs);

        std::vector<double> col_a;
        std::vector<double> col_r;
        std::vector<double> col_eao;
        std::vector<double> col_auc;
        for (std::size_t row = 0; row < spec.values.size(); ++row) {
            std::vector<AppConfig> cfgs;
            cfgs.reserve(seqs.size());
            for (const auto& seq : seqs)
                cfgs.push_back(effective_config(seq, config_path, spec.keys[row], spec.values[row], false, 0));
            const auto reset_records = track_all(seqs, cfgs, "reset", sequence_dirs);
            const auto ope_records = track_all(seqs, cfgs, "ope", sequence_dirs);
            const AccuracyRobustness ar = accuracy_robustness(reset_records);
            col_a.push_back(ar.accuracy);
            col_r.push_back(ar.robustness);
            col_eao.push_back(eao_lite(reset_records));
            col_auc.push_back(ope_curves(ope_records, gts).auc);
        }

        const auto cum_a = sweep_cumulative(col_a);
        const auto cum_r = sweep_cumulative(col_r);
        const auto cum_eao = sweep_cumulative(col_eao);
        const auto cum_auc = sweep_cumulative(col_auc);

        std::string csv = "param,value,A,R,eao,auc,cum_A,cum_R,cum_eao,cum_auc\n";
        for (std::size_t row = 0; row < spec.values.size(); ++row) {
            csv += spec.keys[row] + "," + spec.values[row] + "," + format_double(col_a[row]) + "," +
                   format_double(col_r[row]) + "," + format_double(col_eao[row]) + "," + format_double(col_auc[row]) +
                   "," + format_double(cum_a[row]) + "," + format_double(cum_r[row]) + "," +
                   format_double(cum_eao[row]) + "," + format_double(cum_auc[row]) + "\n";
        }
        write_text_atomic(out_csv, csv);
    });
}

int cmd_calibrate(const std::vector<std::string>& sequence_dirs, const std::string& config_path,
                  const std::string& out_path, const std::string& objective) {
    return guarded([&] {
        if (sequence_dirs.size() < 3) throw std::invalid_argument("calibrate needs at least 3 sequences");
        if (out_path.empty()) throw std::invalid_argument("calibrate needs an output report path");
        const auto seqs = load_sequences(sequence_dirs);

        // One effective config drives calibration; per-sequence sim settings
        // only shape the stored features.
        AppConfig cfg = effective_config(seqs.front(), config_path, "", "", false, 0);

        std::vector<CalibrationSequence> calib(seqs.size());
        std::exception_ptr failure;
        std::mutex failure_mutex;
        parallel_for(static_cast<int>(seqs.size()), [&](int i) {
            try {
                const AppConfig seq_cfg = effective_config(seqs[i], config_path, "", "", false, 0);
                CalibrationSequence cs;
                cs.groundtruth = seqs[i].groundtruth;
                cs.frames.reserve(seqs[i].groundtruth.size());
                for (std::size_t f = 0; f < seqs[i].groundtruth.size(); ++f)
                    cs.frames.push_back(sequence_frame_features(seqs[i], seq_cfg, static_cast<int>(f)));
                calib[i] = std::move(cs);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        if (failure) std::rethrow_exception(failure);

        const CalibrationResult result = calibrate_weights(calib, cfg, objective);

        cfg.tracker.alpha = result.alpha;
        cfg.tracker.beta = result.beta;
        json j{{"alpha", result.alpha},
               {"beta", result.beta},
               {"config", echo_config(cfg)},
               {"objective", objective},
               {"score", result.score},
               {"seed", cfg.tracker.seed},
               {"tool_version", kToolVersion}};
        write_text_atomic(out_path, j.dump(2) + "\n");
    });
}

}  // namespace dualtrack
