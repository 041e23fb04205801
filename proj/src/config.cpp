#include "dualtrack/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace dualtrack {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

template <typename T>
T parse_with_from_chars(const std::string& text) {
    T out{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw std::invalid_argument("not a number: '" + text + "'");
    return out;
}

double parse_double(const std::string& text) {
    const double v = parse_with_from_chars<double>(text);
    if (!std::isfinite(v)) throw std::invalid_argument("not finite: '" + text + "'");
    return v;
}

int parse_int(const std::string& text) { return parse_with_from_chars<int>(text); }

std::uint64_t parse_u64(const std::string& text) { return parse_with_from_chars<std::uint64_t>(text); }

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw std::invalid_argument("not a bool (true/false/1/0): '" + text + "'");
}

// Comma-separated doubles; the empty string is the empty list.
std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = text.find(',', pos);
        out.push_back(parse_double(trim(text.substr(pos, comma - pos))));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

RobustBranch parse_robust(const std::string& text) {
    if (text == "onr") return RobustBranch::ONR;
    if (text == "onc1s") return RobustBranch::ONC1s;
    if (text == "onc5s") return RobustBranch::ONC5s;
    if (text == "none") return RobustBranch::None;
    throw std::invalid_argument("expected onr/onc1s/onc5s/none, got '" + text + "'");
}

std::string format_robust(RobustBranch b) {
    switch (b) {
        case RobustBranch::ONR: return "onr";
        case RobustBranch::ONC1s: return "onc1s";
        case RobustBranch::ONC5s: return "onc5s";
        case RobustBranch::None: return "none";
    }
    throw std::logic_error("bad robust branch");
}

AccurateBranch parse_accurate(const std::string& text) {
    if (text == "ofc5s") return AccurateBranch::OFC5s;
    if (text == "ofc1s") return AccurateBranch::OFC1s;
    if (text == "ofr") return AccurateBranch::OFR;
    if (text == "none") return AccurateBranch::None;
    throw std::invalid_argument("expected ofc5s/ofc1s/ofr/none, got '" + text + "'");
}

std::string format_accurate(AccurateBranch b) {
    switch (b) {
        case AccurateBranch::OFC5s: return "ofc5s";
        case AccurateBranch::OFC1s: return "ofc1s";
        case AccurateBranch::OFR: return "ofr";
        case AccurateBranch::None: return "none";
    }
    throw std::logic_error("bad accurate branch");
}

AtssVariant parse_variant(const std::string& text) {
    if (text == "maxiou") return AtssVariant::MaxIoU;
    if (text == "minl2") return AtssVariant::MinL2;
    throw std::invalid_argument("expected maxiou/minl2, got '" + text + "'");
}

std::string format_variant(AtssVariant v) {
    return v == AtssVariant::MaxIoU ? "maxiou" : "minl2";
}

FeatureMode parse_mode(const std::string& text) {
    if (text == "oracle") return FeatureMode::Oracle;
    if (text == "image") return FeatureMode::Image;
    throw std::invalid_argument("expected oracle/image, got '" + text + "'");
}

std::string format_mode(FeatureMode m) { return m == FeatureMode::Oracle ? "oracle" : "image"; }

struct KeyOps {
    std::function<void(AppConfig&, const std::string&)> set;
    std::function<std::string(AppConfig&)> get;
};

using Registry = std::vector<std::pair<std::string, KeyOps>>;

Registry make_registry() {
    Registry r;
    // Accessor lambdas return a mutable reference into the config so one
    // entry serves both directions.
    auto dbl = [&r](const char* key, auto ref) {
        r.emplace_back(key, KeyOps{[ref](AppConfig& c, const std::string& v) { ref(c) = parse_double(v); },
                                   [ref](AppConfig& c) { return format_double(ref(c)); }});
    };
    auto num = [&r](const char* key, auto ref) {
        r.emplace_back(key, KeyOps{[ref](AppConfig& c, const std::string& v) { ref(c) = parse_int(v); },
                                   [ref](AppConfig& c) { return std::to_string(ref(c)); }});
    };
    auto u64 = [&r](const char* key, auto ref) {
        r.emplace_back(key, KeyOps{[ref](AppConfig& c, const std::string& v) { ref(c) = parse_u64(v); },
                                   [ref](AppConfig& c) { return std::to_string(ref(c)); }});
    };
    auto flag = [&r](const char* key, auto ref) {
        r.emplace_back(key, KeyOps{[ref](AppConfig& c, const std::string& v) { ref(c) = parse_bool(v); },
                                   [ref](AppConfig& c) { return format_bool(ref(c)); }});
    };
    auto list = [&r](const char* key, auto ref) {
        r.emplace_back(key, KeyOps{[ref](AppConfig& c, const std::string& v) { ref(c) = parse_list(v); },
                                   [ref](AppConfig& c) { return format_list(ref(c)); }});
    };

    num("sim.length", [](AppConfig& c) -> int& { return c.sim.length; });
    num("sim.distractors", [](AppConfig& c) -> int& { return c.sim.distractors; });
    dbl("sim.motion_sigma", [](AppConfig& c) -> double& { return c.sim.motion_sigma; });
    dbl("sim.scale_walk_sigma", [](AppConfig& c) -> double& { return c.sim.scale_walk_sigma; });
    dbl("sim.occlusion_prob", [](AppConfig& c) -> double& { return c.sim.occlusion_prob; });
    u64("sim.seed", [](AppConfig& c) -> std::uint64_t& { return c.sim.seed; });
    num("sim.frame_size", [](AppConfig& c) -> int& { return c.sim.frame_size; });
    num("sim.channels", [](AppConfig& c) -> int& { return c.sim.channels; });
    num("sim.identity_dim", [](AppConfig& c) -> int& { return c.sim.identity_dim; });
    dbl("sim.identity_drift", [](AppConfig& c) -> double& { return c.sim.identity_drift; });
    dbl("sim.shared_weight", [](AppConfig& c) -> double& { return c.sim.shared_weight; });

    dbl("tracker.mu", [](AppConfig& c) -> double& { return c.tracker.mu; });
    dbl("tracker.vote_epsilon", [](AppConfig& c) -> double& { return c.tracker.vote_epsilon; });
    dbl("tracker.vote_sigma", [](AppConfig& c) -> double& { return c.tracker.vote_sigma; });
    dbl("tracker.window_influence", [](AppConfig& c) -> double& { return c.tracker.window_influence; });
    dbl("tracker.penalty_k", [](AppConfig& c) -> double& { return c.tracker.penalty_k; });
    dbl("tracker.smooth_lr", [](AppConfig& c) -> double& { return c.tracker.smooth_lr; });
    dbl("tracker.lost_ratio", [](AppConfig& c) -> double& { return c.tracker.lost_ratio; });
    dbl("tracker.distractor_ratio", [](AppConfig& c) -> double& { return c.tracker.distractor_ratio; });
    flag("tracker.vote", [](AppConfig& c) -> bool& { return c.tracker.vote; });
    r.emplace_back("tracker.robust_branch",
                   KeyOps{[](AppConfig& c, const std::string& v) { c.tracker.robust_branch = parse_robust(v); },
                          [](AppConfig& c) { return format_robust(c.tracker.robust_branch); }});
    r.emplace_back("tracker.accurate_branch",
                   KeyOps{[](AppConfig& c, const std::string& v) { c.tracker.accurate_branch = parse_accurate(v); },
                          [](AppConfig& c) { return format_accurate(c.tracker.accurate_branch); }});
    num("tracker.search_cells", [](AppConfig& c) -> int& { return c.tracker.search_cells; });
    list("tracker.alpha", [](AppConfig& c) -> std::vector<double>& { return c.tracker.alpha; });
    list("tracker.beta", [](AppConfig& c) -> std::vector<double>& { return c.tracker.beta; });
    u64("tracker.seed", [](AppConfig& c) -> std::uint64_t& { return c.tracker.seed; });

    dbl("labels.gaussian_sigma", [](AppConfig& c) -> double& { return c.tracker.labels.gaussian_sigma; });
    dbl("labels.iou_pos_thresh", [](AppConfig& c) -> double& { return c.tracker.labels.iou_pos_thresh; });
    dbl("labels.iou_neg_thresh", [](AppConfig& c) -> double& { return c.tracker.labels.iou_neg_thresh; });
    num("labels.atss_topk_multi", [](AppConfig& c) -> int& { return c.tracker.labels.atss_topk_multi; });
    num("labels.atss_topk_single", [](AppConfig& c) -> int& { return c.tracker.labels.atss_topk_single; });
    r.emplace_back("labels.atss_variant",
                   KeyOps{[](AppConfig& c, const std::string& v) { c.tracker.labels.atss_variant = parse_variant(v); },
                          [](AppConfig& c) { return format_variant(c.tracker.labels.atss_variant); }});

    num("learner.capacity", [](AppConfig& c) -> int& { return c.tracker.learner.capacity; });
    num("learner.init_iterations", [](AppConfig& c) -> int& { return c.tracker.learner.init_iterations; });
    num("learner.periodic_interval", [](AppConfig& c) -> int& { return c.tracker.learner.periodic_interval; });
    num("learner.periodic_iterations", [](AppConfig& c) -> int& { return c.tracker.learner.periodic_iterations; });
    dbl("learner.periodic_lr", [](AppConfig& c) -> double& { return c.tracker.learner.periodic_lr; });
    num("learner.hard_iterations", [](AppConfig& c) -> int& { return c.tracker.learner.hard_iterations; });
    dbl("learner.hard_lr", [](AppConfig& c) -> double& { return c.tracker.learner.hard_lr; });
    dbl("learner.hard_weight", [](AppConfig& c) -> double& { return c.tracker.learner.hard_weight; });

    r.emplace_back("features.mode",
                   KeyOps{[](AppConfig& c, const std::string& v) { c.features.mode = parse_mode(v); },
                          [](AppConfig& c) { return format_mode(c.features.mode); }});
    num("features.channels", [](AppConfig& c) -> int& { return c.features.channels; });
    num("features.stride", [](AppConfig& c) -> int& { return c.features.stride; });
    num("features.layer_count", [](AppConfig& c) -> int& { return c.features.layer_count; });
    dbl("features.noise_sigma", [](AppConfig& c) -> double& { return c.features.noise_sigma; });
    dbl("features.box_noise_sigma", [](AppConfig& c) -> double& { return c.features.box_noise_sigma; });
    num("features.identity_dim", [](AppConfig& c) -> int& { return c.features.identity_dim; });

    dbl("loss.focal_gamma", [](AppConfig& c) -> double& { return c.loss.focal_gamma; });
    dbl("loss.fc_alpha", [](AppConfig& c) -> double& { return c.loss.fc_alpha; });
    dbl("loss.fc_beta", [](AppConfig& c) -> double& { return c.loss.fc_beta; });
    dbl("loss.lambda_r", [](AppConfig& c) -> double& { return c.loss.lambda_r; });
    dbl("loss.lambda_a", [](AppConfig& c) -> double& { return c.loss.lambda_a; });
    dbl("loss.lambda_b", [](AppConfig& c) -> double& { return c.loss.lambda_b; });
    dbl("loss.lambda_o", [](AppConfig& c) -> double& { return c.loss.lambda_o; });
    return r;
}

const Registry& registry() {
    static const Registry r = make_registry();
    return r;
}

}  // namespace

void apply_assignment(AppConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, ops] : registry()) {
        if (name != key) continue;
        try {
            ops.set(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config key '" + key + "': " + e.what());
        }
        return;
    }
    throw std::invalid_argument("unknown config key: '" + key + "'");
}

void apply_config_text(AppConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value, got '" +
                                        stripped + "'");
        try {
            apply_assignment(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

AppConfig parse_config_text(const std::string& text) {
    AppConfig cfg;
    apply_config_text(cfg, text);
    return cfg;
}

std::map<std::string, std::string> echo_config(const AppConfig& cfg) {
    AppConfig copy = cfg;
    std::map<std::string, std::string> out;
    for (const auto& [name, ops] : registry()) out[name] = ops.get(copy);
    return out;
}

AppConfig config_from_echo(const std::map<std::string, std::string>& echo) {
    AppConfig cfg;
    for (const auto& [key, value] : echo) apply_assignment(cfg, key, value);
    return cfg;
}

}  // namespace dualtrack
