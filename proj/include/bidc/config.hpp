#ifndef BIDC_CONFIG_HPP
#define BIDC_CONFIG_HPP

#include "bidc/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bidc {

enum class Task { Spectrum, Bidc, EffectiveCompare, Prepare, Transfer, Rates, Sweep };
std::string to_string(Task t);
Task task_from_string(const std::string& s);

/// One run = one validated config. Unknown keys are errors.
struct RunConfig {
    Task task = Task::Spectrum;
    ModelParams model;
    bool convention_given = false; // else per-task default applied

    // spectrum / bidc
    std::optional<double> window_center;
    double window_halfwidth = 0.03;
    int window_pad = 5;

    // transfer / effective-compare
    std::string backend = "effective";          // full|effective|lindblad
    double duration = 5e3;                      // JT
    double g1_start = 0.05, g1_end = 0.20;
    double g3_start = 0.20, g3_end = 0.05;
    int n_samples = 200;
    std::optional<int> nc_override;
    bool compute_overlap = true;
    double c_e = 1.0;
    std::string phase_frame = "lab";            // rotating|lab|receiver

    // prepare / rates
    double eta = 3e-5;
    double t_0 = 7.3e4;
    double t_final = 2e5;
    double target_alpha = 0.7071067811865476;
    double target_beta = -0.7071067811865476;
    double g_ref = 0.1;

    // sweep
    std::string sweep_task = "rates";
    std::string sweep_key;
    std::vector<double> sweep_values;
    int workers = 2;

    std::string serialize() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

// apply environment overrides with the given prefix (e.g. BIDC_n_sites)
std::string apply_env_overrides(const std::string& config_text, const std::string& prefix);

} // namespace bidc

#endif
