#include "scotti/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "scotti/error.hpp"

namespace scotti {

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::baseline: return "baseline";
        case Mode::fixed_eps: return "fixed_eps";
        case Mode::ultimate: return "ultimate";
        case Mode::scotti: return "scotti";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, int line, const std::string& detail) {
    throw config_error("key '" + key + "' (line " + std::to_string(line) + "): " + detail);
}

double to_double(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        bad_value(key, line, "expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v, int line) {
    long long i = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), i);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        bad_value(key, line, "expected an integer, got '" + v + "'");
    return i;
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    bad_value(key, line, "expected true or false, got '" + v + "'");
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig c;
    std::set<std::string> seen;
    // lines recorded for the keys the mode invariants may complain about
    int line_eta_alpha = 0, line_eta_epsilon = 0, line_milestones = 0;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no) +
                               ": expected 'key = value', got '" + trim(raw) + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second)
            throw config_error("key '" + key + "' (line " + std::to_string(line_no) +
                               "): duplicate key");

        if (key == "seed") {
            const long long v = to_int(key, value, line_no);
            if (v < 0) bad_value(key, line_no, "seed must be non-negative");
            c.seed = static_cast<std::uint64_t>(v);
        } else if (key == "model") {
            if (value.empty()) bad_value(key, line_no, "empty model spec");
            c.model = value;
        } else if (key == "dataset") {
            if (value.empty()) bad_value(key, line_no, "empty dataset spec");
            c.dataset = value;
        } else if (key == "epochs") {
            const long long v = to_int(key, value, line_no);
            if (v < 1) bad_value(key, line_no, "epochs must be ≥ 1");
            c.epochs = static_cast<int>(v);
        } else if (key == "batch_size") {
            const long long v = to_int(key, value, line_no);
            if (v < 1) bad_value(key, line_no, "batch_size must be ≥ 1");
            c.batch_size = static_cast<int>(v);
        } else if (key == "alpha0") {
            c.alpha0 = to_double(key, value, line_no);
        } else if (key == "momentum") {
            c.momentum = to_double(key, value, line_no);
            if (c.momentum < 0.0 || c.momentum >= 1.0)
                bad_value(key, line_no, "momentum must be in [0, 1)");
        } else if (key == "weight_decay") {
            c.weight_decay = to_double(key, value, line_no);
            if (c.weight_decay < 0.0) bad_value(key, line_no, "weight_decay must be ≥ 0");
        } else if (key == "mode") {
            if (value == "baseline") c.mode = Mode::baseline;
            else if (value == "fixed_eps") c.mode = Mode::fixed_eps;
            else if (value == "ultimate") c.mode = Mode::ultimate;
            else if (value == "scotti") c.mode = Mode::scotti;
            else bad_value(key, line_no, "mode must be baseline|fixed_eps|ultimate|scotti");
        } else if (key == "epsilon0") {
            c.epsilon0 = to_double(key, value, line_no);
        } else if (key == "eta_alpha") {
            c.eta_alpha = to_double(key, value, line_no);
            if (c.eta_alpha < 0.0) bad_value(key, line_no, "eta_alpha must be ≥ 0");
            line_eta_alpha = line_no;
        } else if (key == "eta_epsilon") {
            c.eta_epsilon = to_double(key, value, line_no);
            if (c.eta_epsilon < 0.0) bad_value(key, line_no, "eta_epsilon must be ≥ 0");
            line_eta_epsilon = line_no;
        } else if (key == "mu_eq") {
            c.mu_eq = to_double(key, value, line_no);
            if (c.mu_eq < 0.0) bad_value(key, line_no, "mu_eq must be ≥ 0");
        } else if (key == "probe_size") {
            const long long v = to_int(key, value, line_no);
            if (v < 1) bad_value(key, line_no, "probe_size must be ≥ 1");
            c.probe_size = static_cast<int>(v);
        } else if (key == "epsilon_update_sign") {
            if (value == "paper") c.epsilon_update_sign = EpsilonSign::paper;
            else if (value == "flipped") c.epsilon_update_sign = EpsilonSign::flipped;
            else bad_value(key, line_no, "epsilon_update_sign must be paper|flipped");
        } else if (key == "count_probe_overhead") {
            c.count_probe_overhead = to_bool(key, value, line_no);
        } else if (key == "lr_milestones") {
            line_milestones = line_no;
            c.lr_milestones.clear();
            std::istringstream ms(value);
            std::string part;
            while (std::getline(ms, part, ',')) {
                part = trim(part);
                if (part.empty()) continue;
                const double f = to_double(key, part, line_no);
                if (f < 0.0 || f >= 1.0)
                    bad_value(key, line_no, "milestones are fractions of the run in [0, 1)");
                c.lr_milestones.push_back(f);
            }
        } else if (key == "output_dir") {
            if (value.empty()) bad_value(key, line_no, "empty output_dir");
            c.output_dir = value;
        } else {
            throw config_error("key '" + key + "' (line " + std::to_string(line_no) +
                               "): unknown key");
        }
    }

    // Mode invariants. Explicitly configured values that a mode would have to
    // override are an error; absent ones are forced silently.
    const bool has_ea = seen.count("eta_alpha") != 0;
    const bool has_ee = seen.count("eta_epsilon") != 0;
    switch (c.mode) {
        case Mode::baseline:
            if (has_ea && c.eta_alpha != 0.0)
                bad_value("eta_alpha", line_eta_alpha, "mode=baseline forces eta_alpha = 0");
            if (has_ee && c.eta_epsilon != 0.0)
                bad_value("eta_epsilon", line_eta_epsilon, "mode=baseline forces eta_epsilon = 0");
            c.eta_alpha = 0.0;
            c.eta_epsilon = 0.0;
            break;
        case Mode::fixed_eps:
            if (has_ee && c.eta_epsilon != 0.0)
                bad_value("eta_epsilon", line_eta_epsilon, "mode=fixed_eps forces eta_epsilon = 0");
            c.eta_epsilon = 0.0;
            break;
        case Mode::ultimate:
        case Mode::scotti:
            if (!has_ee) c.eta_epsilon = c.eta_alpha / 2.0;  // documented default
            break;
    }
    if (seen.count("lr_milestones") != 0 && c.mode != Mode::baseline)
        bad_value("lr_milestones", line_milestones,
                  "the step schedule exists in mode=baseline only");

    return c;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    TrainConfig c = parse_config_text(buf.str());
    if (const char* env = std::getenv("SCOTTI_OUTPUT_DIR"); env && *env) c.output_dir = env;
    return c;
}

}  // namespace scotti
