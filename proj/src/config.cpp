#include "bidc/config.hpp"

#include "bidc/io.hpp"
#include "bidc/protocols.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bidc {

std::string to_string(Task t) {
    switch (t) {
        case Task::Spectrum: return "spectrum";
        case Task::Bidc: return "bidc";
        case Task::EffectiveCompare: return "effective-compare";
        case Task::Prepare: return "prepare";
        case Task::Transfer: return "transfer";
        case Task::Rates: return "rates";
        case Task::Sweep: return "sweep";
    }
    return "?";
}

Task task_from_string(const std::string& s) {
    if (s == "spectrum") return Task::Spectrum;
    if (s == "bidc") return Task::Bidc;
    if (s == "effective-compare") return Task::EffectiveCompare;
    if (s == "prepare") return Task::Prepare;
    if (s == "transfer") return Task::Transfer;
    if (s == "rates") return Task::Rates;
    if (s == "sweep") return Task::Sweep;
    throw std::invalid_argument("task: unknown task '" + s + "'");
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "task", "convention",
        // model
        "n_sites", "hopping", "interaction", "cavity_freq", "site_1", "site_2",
        "omega_1", "omega_2", "omega_3", "omega_4", "g_12", "g_34",
        // spectrum / bidc
        "window_center", "window_halfwidth", "window_pad",
        // transfer
        "backend", "duration", "g1_start", "g1_end", "g3_start", "g3_end",
        "n_samples", "nc_override", "compute_overlap", "c_e", "phase_frame",
        // prepare / rates
        "eta", "t_0", "t_final", "target_alpha", "target_beta", "g_ref",
        // sweep
        "sweep_task", "sweep_key", "sweep_values", "workers",
    };
    return keys;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": not a number: '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": not an integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(key + ": not a boolean: '" + v + "'");
}

} // namespace

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "task = " << to_string(task) << "\n";
    out << "convention = " << to_string(model.convention) << "\n";
    out << params_to_config_text(model);
    if (window_center) out << "window_center = " << *window_center << "\n";
    out << "window_halfwidth = " << window_halfwidth << "\n"
        << "window_pad = " << window_pad << "\n"
        << "backend = " << backend << "\n"
        << "duration = " << duration << "\n"
        << "g1_start = " << g1_start << "\n"
        << "g1_end = " << g1_end << "\n"
        << "g3_start = " << g3_start << "\n"
        << "g3_end = " << g3_end << "\n"
        << "n_samples = " << n_samples << "\n";
    if (nc_override) out << "nc_override = " << *nc_override << "\n";
    out << "compute_overlap = " << (compute_overlap ? "true" : "false") << "\n"
        << "c_e = " << c_e << "\n"
        << "phase_frame = " << phase_frame << "\n"
        << "eta = " << eta << "\n"
        << "t_0 = " << t_0 << "\n"
        << "t_final = " << t_final << "\n"
        << "target_alpha = " << target_alpha << "\n"
        << "target_beta = " << target_beta << "\n"
        << "g_ref = " << g_ref << "\n";
    if (task == Task::Sweep) {
        out << "sweep_task = " << sweep_task << "\n"
            << "sweep_key = " << sweep_key << "\n"
            << "sweep_values = ";
        for (size_t i = 0; i < sweep_values.size(); ++i)
            out << (i ? "," : "") << sweep_values[i];
        out << "\nworkers = " << workers << "\n";
    }
    return out.str();
}

RunConfig parse_config_text(const std::string& text) {
    // reuse the tolerant line parser from the model layer by going through
    // a local map here (comments, blank lines, key = value)
    std::map<std::string, std::string> kv;
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto h = line.find('#');
            if (h != std::string::npos) line.erase(h);
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": missing '='");
            kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }
    for (const auto& [k, v] : kv)
        if (!known_keys().count(k))
            throw std::invalid_argument("unknown config key: '" + k + "'");

    RunConfig c;
    if (auto it = kv.find("task"); it != kv.end()) c.task = task_from_string(it->second);

    // model block: reparse through the model layer for shared validation
    {
        std::ostringstream mp;
        for (const char* k : {"n_sites", "hopping", "interaction", "cavity_freq",
                              "site_1", "site_2", "omega_1", "omega_2", "omega_3",
                              "omega_4", "g_12", "g_34"})
            if (auto it = kv.find(k); it != kv.end()) mp << k << " = " << it->second << "\n";
        c.model = params_from_config_text(mp.str());
    }

    if (auto it = kv.find("convention"); it != kv.end()) {
        c.model.convention = convention_from_string(it->second);
        c.convention_given = true;
    } else {
        // per-task default: literal frequencies for spectroscopy, compensated
        // frequencies for dynamics
        c.model.convention = (c.task == Task::Spectrum || c.task == Task::Bidc)
                                 ? FreqConvention::Bare
                                 : FreqConvention::Stark;
    }

    auto take_d = [&kv](const char* k, double& into) {
        if (auto it = kv.find(k); it != kv.end()) into = parse_double(k, it->second);
    };
    auto take_i = [&kv](const char* k, int& into) {
        if (auto it = kv.find(k); it != kv.end()) into = parse_int(k, it->second);
    };
    if (auto it = kv.find("window_center"); it != kv.end())
        c.window_center = parse_double("window_center", it->second);
    take_d("window_halfwidth", c.window_halfwidth);
    take_i("window_pad", c.window_pad);
    if (auto it = kv.find("backend"); it != kv.end()) c.backend = it->second;
    take_d("duration", c.duration);
    take_d("g1_start", c.g1_start);
    take_d("g1_end", c.g1_end);
    take_d("g3_start", c.g3_start);
    take_d("g3_end", c.g3_end);
    take_i("n_samples", c.n_samples);
    if (auto it = kv.find("nc_override"); it != kv.end())
        c.nc_override = parse_int("nc_override", it->second);
    if (auto it = kv.find("compute_overlap"); it != kv.end())
        c.compute_overlap = parse_bool("compute_overlap", it->second);
    take_d("c_e", c.c_e);
    if (auto it = kv.find("phase_frame"); it != kv.end()) c.phase_frame = it->second;
    take_d("eta", c.eta);
    take_d("t_0", c.t_0);
    take_d("t_final", c.t_final);
    take_d("target_alpha", c.target_alpha);
    take_d("target_beta", c.target_beta);
    take_d("g_ref", c.g_ref);
    if (auto it = kv.find("sweep_task"); it != kv.end()) c.sweep_task = it->second;
    if (auto it = kv.find("sweep_key"); it != kv.end()) c.sweep_key = it->second;
    if (auto it = kv.find("sweep_values"); it != kv.end()) {
        std::istringstream vs(it->second);
        std::string tok;
        while (std::getline(vs, tok, ','))
            c.sweep_values.push_back(parse_double("sweep_values", tok));
    }
    take_i("workers", c.workers);

    // per-task required-option validation
    if (c.duration <= 0.0) throw std::invalid_argument("duration: must be > 0");
    if (c.n_samples < 2) throw std::invalid_argument("n_samples: must be >= 2");
    if (c.window_halfwidth <= 0.0) throw std::invalid_argument("window_halfwidth: must be > 0");
    if (c.c_e < 0.0 || c.c_e > 1.0) throw std::invalid_argument("c_e: must be in [0, 1]");
    if (c.task == Task::Transfer || c.task == Task::EffectiveCompare) {
        backend_from_string(c.backend);
        phase_frame_from_string(c.phase_frame);
        for (auto [k, v] : {std::pair{"g1_start", c.g1_start}, {"g1_end", c.g1_end},
                            {"g3_start", c.g3_start}, {"g3_end", c.g3_end}})
            if (v < 0.0) throw std::invalid_argument(std::string(k) + ": must be >= 0");
        if (c.nc_override && (*c.nc_override < 2 || c.model.site_2 >= *c.nc_override))
            throw std::invalid_argument("nc_override: must exceed site_2");
    }
    if (c.task == Task::Prepare) {
        if (c.eta < 0.0) throw std::invalid_argument("eta: must be >= 0");
        if (c.t_0 <= 0.0) throw std::invalid_argument("t_0: must be > 0");
        if (c.t_final <= 0.0) throw std::invalid_argument("t_final: must be > 0");
        if (std::abs(c.target_alpha * c.target_alpha + c.target_beta * c.target_beta - 1.0) > 1e-9)
            throw std::invalid_argument("target_alpha: target amplitudes must be normalized");
        if (c.g_ref <= 0.0) throw std::invalid_argument("g_ref: must be > 0");
    }
    if (c.task == Task::Sweep) {
        if (c.sweep_key.empty()) throw std::invalid_argument("sweep_key: required for sweeps");
        if (c.sweep_values.empty())
            throw std::invalid_argument("sweep_values: required for sweeps");
        if (c.workers < 1) throw std::invalid_argument("workers: must be >= 1");
        const Task child = task_from_string(c.sweep_task);
        if (child == Task::Sweep) throw std::invalid_argument("sweep_task: cannot nest sweeps");
        if (!known_keys().count(c.sweep_key) && c.sweep_key != "g")
            throw std::invalid_argument("sweep_key: unknown key '" + c.sweep_key + "'");
    }
    return c;
}

RunConfig parse_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

std::string apply_env_overrides(const std::string& config_text, const std::string& prefix) {
    std::string out = config_text;
    for (const auto& key : known_keys()) {
        if (const char* v = std::getenv((prefix + key).c_str()))
            out += "\n" + key + " = " + std::string(v) + "\n";
    }
    return out;
}

} // namespace bidc
