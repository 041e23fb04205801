#include "dualtrack/seqio.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

namespace dualtrack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%08d.pgm", index);
    return buf;
}

double parse_strict_double(const std::string& text) {
    double out = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || !std::isfinite(out))
        throw DataError("not a number: '" + text + "'");
    return out;
}

std::vector<double> split_doubles(const std::string& line, const std::string& context) {
    std::vector<double> out;
    std::size_t pos = 0;
    try {
        while (true) {
            const std::size_t comma = line.find(',', pos);
            out.push_back(parse_strict_double(line.substr(pos, comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    } catch (const DataError& e) {
        throw DataError(context + ": " + e.what());
    }
    return out;
}

// Scene records and run records keep boxes in the internal center form;
// groundtruth.txt alone uses the top-left external form.
json box_to_json(const Box& b) { return json::array({b.cx, b.cy, b.w, b.h}); }

Box box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw DataError("box must be a 4-element array");
    return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json scene_to_json(const SceneState& s) {
    json objs = json::array();
    for (const auto& o : s.objects)
        objs.push_back(json{{"box", box_to_json(o.box)},
                            {"id", o.id},
                            {"identity", o.identity},
                            {"vx", o.vx},
                            {"vy", o.vy}});
    return json{{"frame_index", s.frame_index}, {"frame_size", s.frame_size},
                {"objects", std::move(objs)},   {"occluded", s.occluded},
                {"seed", s.seed},               {"target_index", s.target_index}};
}

SceneState scene_from_json(const json& j) {
    SceneState s;
    s.frame_index = j.at("frame_index").get<int>();
    s.frame_size = j.at("frame_size").get<int>();
    s.occluded = j.at("occluded").get<bool>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.target_index = j.at("target_index").get<int>();
    for (const auto& oj : j.at("objects")) {
        SceneObject o;
        o.box = box_from_json(oj.at("box"));
        o.id = oj.at("id").get<int>();
        o.identity = oj.at("identity").get<std::vector<double>>();
        o.vx = oj.at("vx").get<double>();
        o.vy = oj.at("vy").get<double>();
        s.objects.push_back(std::move(o));
    }
    return s;
}

json parse_json(const std::string& text, const std::string& context) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(context + ": " + e.what());
    }
}

std::map<std::string, std::string> config_map_from_json(const json& j) {
    if (!j.is_object()) throw DataError("config echo must be an object of strings");
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw DataError("config echo value for '" + key + "' must be a string");
        out[key] = value.get<std::string>();
    }
    return out;
}

std::vector<std::string> non_empty_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for write: " + tmp);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return out.str();
}

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pixels, int width, int height) {
    if (width <= 0 || height <= 0 || pixels.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("pgm dimensions do not match pixel count");
    std::string data = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    data.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    write_text_atomic(path, data);
}

std::vector<std::uint8_t> read_pgm(const std::string& path, int& width, int& height) {
    const std::string data = read_text(path);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < data.size()) {
            if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (start == pos) throw DataError("truncated pgm header: " + path);
        return data.substr(start, pos - start);
    };
    if (next_token() != "P5") throw DataError("not a binary pgm: " + path);
    width = static_cast<int>(parse_strict_double(next_token()));
    height = static_cast<int>(parse_strict_double(next_token()));
    if (next_token() != "255") throw DataError("pgm maxval must be 255: " + path);
    ++pos;  // single whitespace byte after maxval
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (width <= 0 || height <= 0 || data.size() - pos < count)
        throw DataError("pgm pixel data truncated: " + path);
    const auto* raw = reinterpret_cast<const std::uint8_t*>(data.data() + pos);
    return std::vector<std::uint8_t>(raw, raw + count);
}

void write_sequence(const std::string& dir, const Sequence& seq, const AppConfig& cfg, bool image_mode) {
    if (seq.frames.size() != seq.groundtruth.size())
        throw std::invalid_argument("sequence frame and groundtruth counts differ");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir);

    AppConfig echo_cfg = cfg;
    echo_cfg.sim = seq.config;
    const auto echo = echo_config(echo_cfg);

    std::string gt;
    for (const Box& b : seq.groundtruth)
        gt += format_double(b.left()) + "," + format_double(b.top()) + "," + format_double(b.w) + "," +
              format_double(b.h) + "\n";
    write_text_atomic(dir + "/groundtruth.txt", gt);

    if (image_mode) {
        for (std::size_t i = 0; i < seq.frames.size(); ++i) {
            const auto pixels = render_frame(seq.frames[i]);
            write_pgm(dir + "/" + frame_name(static_cast<int>(i)), pixels, seq.frames[i].frame_size,
                      seq.frames[i].frame_size);
        }
    } else {
        std::string lines;
        for (const SceneState& s : seq.frames) lines += scene_to_json(s).dump() + "\n";
        write_text_atomic(dir + "/scene.jsonl", lines);
    }

    json meta{{"config", echo},
              {"length", seq.frames.size()},
              {"mode", image_mode ? "image" : "oracle"},
              {"seed", seq.config.seed},
              {"tool_version", kToolVersion}};
    write_text_atomic(dir + "/meta.json", meta.dump(2) + "\n");
}

LoadedSequence read_sequence(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a sequence directory: " + dir);
    LoadedSequence seq;
    seq.name = fs::path(dir).filename().string();
    if (seq.name.empty()) seq.name = fs::path(dir).parent_path().filename().string();

    const json meta = parse_json(read_text(dir + "/meta.json"), dir + "/meta.json");
    int length = 0;
    std::string mode;
    try {
        length = meta.at("length").get<int>();
        mode = meta.at("mode").get<std::string>();
        seq.config = config_from_echo(config_map_from_json(meta.at("config")));
    } catch (const json::exception& e) {
        throw DataError(dir + "/meta.json: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(dir + "/meta.json: " + e.what());
    }
    if (length <= 0) throw DataError(dir + ": non-positive sequence length");
    if (mode != "oracle" && mode != "image") throw DataError(dir + ": unknown mode '" + mode + "'");
    seq.image_mode = (mode == "image");

    const auto gt_lines = non_empty_lines(read_text(dir + "/groundtruth.txt"));
    if (gt_lines.size() != static_cast<std::size_t>(length))
        throw DataError(dir + ": groundtruth has " + std::to_string(gt_lines.size()) + " lines, expected " +
                        std::to_string(length));
    for (const std::string& line : gt_lines) {
        const auto v = split_doubles(line, dir + "/groundtruth.txt");
        if (v.size() != 4) throw DataError(dir + "/groundtruth.txt: expected x,y,w,h, got '" + line + "'");
        seq.groundtruth.push_back(Box::from_topleft(v[0], v[1], v[2], v[3]));
    }

    if (seq.image_mode) {
        for (int i = 0; i < length; ++i) {
            const std::string path = dir + "/" + frame_name(i);
            if (!fs::exists(path)) throw DataError(dir + ": missing frame " + frame_name(i));
            int w = 0;
            int h = 0;
            seq.images.push_back(read_pgm(path, w, h));
            if (i == 0) {
                seq.frame_width = w;
                seq.frame_height = h;
            } else if (w != seq.frame_width || h != seq.frame_height) {
                throw DataError(dir + ": frame size changes at " + frame_name(i));
            }
        }
    } else {
        const auto lines = non_empty_lines(read_text(dir + "/scene.jsonl"));
        if (lines.size() != static_cast<std::size_t>(length))
            throw DataError(dir + ": scene.jsonl has " + std::to_string(lines.size()) + " records, expected " +
                            std::to_string(length));
        for (const std::string& line : lines) {
            try {
                seq.scenes.push_back(scene_from_json(parse_json(line, dir + "/scene.jsonl")));
            } catch (const json::exception& e) {
                throw DataError(dir + "/scene.jsonl: " + e.what());
            }
        }
        seq.frame_width = seq.scenes.front().frame_size;
        seq.frame_height = seq.scenes.front().frame_size;
    }
    return seq;
}

void write_run_record(const std::string& path, const RunRecord& record) {
    json boxes = json::array();
    for (const Box& b : record.boxes) boxes.push_back(box_to_json(b));
    const json j{{"boxes", std::move(boxes)},
                 {"config", record.config},
                 {"failures", record.failures},
                 {"overlaps", record.overlaps},
                 {"sequence", record.sequence}};
    write_text_atomic(path, j.dump(2) + "\n");
}

RunRecord read_run_record(const std::string& path) {
    const json j = parse_json(read_text(path), path);
    RunRecord rec;
    try {
        rec.sequence = j.at("sequence").get<std::string>();
        for (const auto& bj : j.at("boxes")) rec.boxes.push_back(box_from_json(bj));
        rec.overlaps = j.at("overlaps").get<std::vector<double>>();
        rec.failures = j.at("failures").get<std::vector<int>>();
        rec.config = config_map_from_json(j.at("config"));
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return rec;
}

void write_metrics_report(const std::string& path, const MetricsReport& report,
                          const std::map<std::string, std::string>& config, std::uint64_t seed) {
    json j{{"config", config}, {"seed", seed}, {"tool_version", kToolVersion}};
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("accuracy", report.accuracy);
    put("robustness", report.robustness);
    put("eao", report.eao);
    put("auc", report.auc);
    put("precision", report.precision);
    put("norm_precision", report.norm_precision);
    put("kld", report.kld);
    put("npd", report.npd);
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace dualtrack
