#include "bidc/run.hpp"

#include "bidc/effective.hpp"
#include "bidc/io.hpp"
#include "bidc/open_system.hpp"
#include "bidc/protocols.hpp"
#include "bidc/spectral.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

namespace bidc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// module writers stream to a temp file; prepend the config-hash comment and
// publish atomically
void emit_csv(const fs::path& path, const std::string& hash,
              const std::function<void(const std::string&)>& writer) {
    atomic_write_with(path, [&](const std::string& tmp) {
        const std::string inner = tmp + ".body";
        writer(inner);
        const std::string body = read_file(inner);
        fs::remove(inner);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << "# config " << hash << "\n" << body;
    });
}

void run_spectrum(const RunConfig& c, const fs::path& dir, const std::string& hash,
                  RunManifest& m) {
    const auto basis = build_basis(c.model.n_sites);
    auto h = assemble_hamiltonian(c.model, basis);
    EigensolveOptions opt;
    if (c.window_center) opt.window = {*c.window_center, c.window_halfwidth};
    const auto states = eigensolve(h, opt);
    const auto labels = classify_branches(states, basis, c.model);
    emit_csv(dir / "spectrum.csv", hash, [&](const std::string& p) {
        write_spectrum_csv(p, states, labels, basis);
    });
    m.outputs.push_back("spectrum.csv");
    m.metrics["n_states"] = static_cast<double>(states.size());
    int nd = 0;
    for (auto l : labels) nd += l == BranchLabel::DoublonLike;
    m.metrics["n_doublon_like"] = nd;
    if (!states.empty()) {
        m.metrics["e_min"] = states.front().energy;
        m.metrics["e_max"] = states.back().energy;
    }
}

void run_bidc(const RunConfig& c, const fs::path& dir, const std::string& hash,
              RunManifest& m) {
    const double two_om = 2.0 * c.model.omega();
    const auto basis = build_basis(c.model.n_sites);
    auto h = assemble_hamiltonian(c.model, basis);
    EigensolveOptions opt;
    opt.window = {c.window_center.value_or(two_om), c.window_halfwidth};
    const auto states = eigensolve(h, opt);
    const auto labels = classify_branches(states, basis, c.model);
    BidcCriteria crit;
    crit.window_pad = c.window_pad;
    const auto res = find_bidc(states, basis, c.model, crit);
    if (!res.found)
        throw std::runtime_error("bidc: no candidate passed the criteria; best has P_e = " +
                                  std::to_string(res.best.pe) + ", localization = " +
                                  std::to_string(res.best.localization));

    emit_csv(dir / "window_spectrum.csv", hash, [&](const std::string& p) {
        write_spectrum_csv(p, states, labels, basis);
    });
    const auto dist = photon_distribution(basis, res.state.vector);
    emit_csv(dir / "bidc_profile.csv", hash, [&](const std::string& p) {
        write_photon_profile_csv(p, dist);
    });
    emit_csv(dir / "bidc_correlation.csv", hash, [&](const std::string& p) {
        write_correlation_csv(p, two_photon_correlation(basis, res.state.vector));
    });
    m.outputs = {"window_spectrum.csv", "bidc_profile.csv", "bidc_correlation.csv"};

    m.metrics["bidc_energy"] = res.best.energy;
    m.metrics["bidc_offset_two_omega"] = res.best.energy - two_om;
    m.metrics["bidc_pe"] = res.best.pe;
    m.metrics["bidc_antisym"] = res.best.antisym;
    m.metrics["bidc_localization"] = res.best.localization;

    // analytic profile comparison at the effective-condition root
    const auto root = solve_bidc_condition(c.model);
    if (root.found) {
        const auto prof = bidc_real_space_profile(c.model, root);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < c.model.n_sites; ++j) {
            num += std::pow(prof.p_two[j] - dist.two[j], 2);
            den += std::pow(dist.two[j], 2);
        }
        m.metrics["analytic_root_energy"] = root.energy;
        m.metrics["profile_l2_deviation"] = std::sqrt(num / std::max(den, 1e-300));
        emit_csv(dir / "bidc_profile_analytic.csv", hash, [&](const std::string& p) {
            std::ofstream out(p, std::ios::trunc);
            out.precision(17);
            out << "site,P_two\n";
            for (int j = 0; j < c.model.n_sites; ++j)
                out << j << ',' << prof.p_two[j] << '\n';
        });
        m.outputs.push_back("bidc_profile_analytic.csv");
    }
}

void run_rates(const RunConfig& c, const fs::path& dir, const std::string& hash,
               RunManifest& m) {
    auto lp = decay_rates(c.model);
    lp.eta = c.eta;
    lp.t_0 = c.t_0;
    atomic_write_with(dir / "rates.json", [&](const std::string& p) { write_rates_json(p, lp); });
    emit_csv(dir / "coupling_table.csv", hash, [&](const std::string& p) {
        write_coupling_table_csv(p, c.model);
    });
    emit_csv(dir / "greens_table.csv", hash, [&](const std::string& p) {
        write_greens_table_csv(p, c.model, 12);
    });
    m.outputs = {"rates.json", "coupling_table.csv", "greens_table.csv"};
    m.metrics["gamma_1"] = lp.gamma_1;
    m.metrics["gamma_2"] = lp.gamma_2;
    m.metrics["gamma_c"] = lp.gamma_c;
    m.metrics["k0"] = lp.k0;
}

void run_prepare(const RunConfig& c, const fs::path& dir, const std::string& hash,
                 RunManifest& m) {
    const auto r = prepare_entangled_state(c.model, c.target_alpha, c.target_beta, c.eta,
                                           c.t_0, c.t_final, c.g_ref);
    emit_csv(dir / "prepare.csv", hash, [&](const std::string& p) { write_prepare_csv(p, r); });
    json j{{"g_12", r.g1}, {"g_34", r.g3}, {"delta_sites", r.delta_sites},
           {"t_0", c.t_0}, {"eta", c.eta}, {"long_time_fidelity", r.long_time_fidelity}};
    atomic_write_file(dir / "prepare_summary.json", j.dump(2) + "\n");
    m.outputs = {"prepare.csv", "prepare_summary.json"};
    m.metrics["long_time_fidelity"] = r.long_time_fidelity;
    m.metrics["g_12"] = r.g1;
    m.metrics["g_34"] = r.g3;
}

void run_transfer(const RunConfig& c, const fs::path& dir, const std::string& hash,
                  RunManifest& m) {
    const auto sched = ProtocolSchedule::linear_ramp(c.g1_start, c.g1_end, c.g3_start,
                                                     c.g3_end, c.duration);
    TransferOptions opt;
    opt.n_samples = c.n_samples;
    opt.nc_override = c.nc_override;
    opt.compute_overlap = c.compute_overlap;
    const auto backend = backend_from_string(c.backend);
    const auto res = run_state_transfer(c.model, sched, backend, c.c_e, opt);
    emit_csv(dir / "transfer.csv", hash, [&](const std::string& p) {
        write_transfer_csv(p, res);
    });
    m.outputs = {"transfer.csv"};

    double max_t = 0.0;
    for (double x : res.cpe2) max_t = std::max(max_t, x);
    m.metrics["max_transfer"] = max_t;
    if (!res.overlap.empty()) {
        double pmin = 2.0;
        for (double x : res.overlap)
            if (std::isfinite(x)) pmin = std::min(pmin, x);
        if (pmin <= 1.0) m.metrics["min_overlap"] = pmin;
    }
    json j{{"backend", c.backend}, {"max_transfer", max_t}};
    if (res.theta_available) {
        const auto comp = transfer_phase_and_time(res, phase_frame_from_string(c.phase_frame));
        j["completion_found"] = comp.found;
        if (comp.found) {
            j["t_star"] = comp.t_star;
            j["transferred"] = comp.transferred;
            j["theta_residual"] = comp.theta_residual;
            j["amplitude_residual"] = comp.amplitude_residual;
            m.metrics["t_star"] = comp.t_star;
            m.metrics["transferred_at_t_star"] = comp.transferred;
        } else {
            j["theta_min"] = comp.theta_min;
            j["theta_max"] = comp.theta_max;
        }
        j["phase_frame"] = c.phase_frame;
    }
    atomic_write_file(dir / "transfer_summary.json", j.dump(2) + "\n");
    m.outputs.push_back("transfer_summary.json");
}

void run_effective_compare(const RunConfig& c, const fs::path& dir, const std::string& hash,
                           RunManifest& m) {
    const auto sched = ProtocolSchedule::linear_ramp(c.g1_start, c.g1_end, c.g3_start,
                                                     c.g3_end, c.duration);
    TransferOptions opt;
    opt.n_samples = c.n_samples;
    opt.nc_override = c.nc_override;
    opt.compute_overlap = false;
    const auto eff = run_state_transfer(c.model, sched, Backend::Effective, c.c_e, opt);
    const auto full = run_state_transfer(c.model, sched, Backend::Full, c.c_e, opt);
    emit_csv(dir / "effective.csv", hash, [&](const std::string& p) {
        write_transfer_csv(p, eff);
    });
    emit_csv(dir / "full.csv", hash, [&](const std::string& p) { write_transfer_csv(p, full); });
    double dev = 0.0;
    for (size_t i = 0; i < eff.cpe2.size() && i < full.cpe2.size(); ++i) {
        dev = std::max(dev, std::abs(eff.cpe2[i] - full.cpe2[i]));
        dev = std::max(dev, std::abs(eff.ce2[i] - full.ce2[i]));
    }
    m.outputs = {"effective.csv", "full.csv"};
    m.metrics["max_population_deviation"] = dev;
}

void run_sweep(const RunConfig& c, const fs::path& dir, const std::string& hash,
               RunManifest& m) {
    struct Child {
        int index;
        double value;
        RunConfig config;
        RunManifest manifest;
        std::string error;
    };
    std::deque<Child> children;
    for (size_t i = 0; i < c.sweep_values.size(); ++i) {
        RunConfig ch = c;
        ch.task = task_from_string(c.sweep_task);
        ch.sweep_values.clear();
        ch.sweep_key.clear();
        const double v = c.sweep_values[i];
        const std::string& key = c.sweep_key;
        if (key == "g") { ch.model.g_12 = v; ch.model.g_34 = v; ch.g_ref = v; }
        else if (key == "g_12") ch.model.g_12 = v;
        else if (key == "g_34") ch.model.g_34 = v;
        else if (key == "g_ref") ch.g_ref = v;
        else if (key == "interaction") ch.model.interaction = v;
        else if (key == "eta") ch.eta = v;
        else if (key == "t_0") ch.t_0 = v;
        else if (key == "duration") ch.duration = v;
        else if (key == "c_e") ch.c_e = v;
        else throw std::invalid_argument("sweep_key: unsupported key '" + key + "'");
        children.push_back({static_cast<int>(i), v, std::move(ch), {}, {}});
    }

    std::mutex mu;
    size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            size_t mine;
            {
                std::lock_guard lock(mu);
                if (next >= children.size()) return;
                mine = next++;
            }
            auto& ch = children[mine];
            try {
                ch.manifest = run_task(ch.config, dir / ("sweep_" + std::to_string(ch.index)));
            } catch (const std::exception& e) {
                ch.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::clamp(c.workers, 1, static_cast<int>(children.size()));
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream table;
    table.precision(17);
    table << "index,value,status";
    std::vector<std::string> metric_names;
    for (const auto& ch : children)
        if (ch.error.empty()) {
            for (const auto& [k, v] : ch.manifest.metrics) metric_names.push_back(k);
            break;
        }
    for (const auto& k : metric_names) table << ',' << k;
    table << '\n';
    for (const auto& ch : children) {
        table << ch.index << ',' << ch.value << ',' << (ch.error.empty() ? "ok" : "failed");
        for (const auto& k : metric_names) {
            table << ',';
            if (ch.error.empty() && ch.manifest.metrics.count(k))
                table << ch.manifest.metrics.at(k);
        }
        table << '\n';
    }
    atomic_write_file(dir / "sweep_summary.csv", "# config " + hash + "\n" + table.str());
    m.outputs = {"sweep_summary.csv"};
    for (const auto& ch : children) {
        m.outputs.push_back("sweep_" + std::to_string(ch.index) + "/manifest.json");
        if (!ch.error.empty())
            throw std::runtime_error("sweep child " + std::to_string(ch.index) +
                                     " failed: " + ch.error);
    }
    m.metrics["n_children"] = static_cast<double>(children.size());
}

} // namespace

void write_manifest(const fs::path& path, const RunManifest& m) {
    json j{{"config_hash", m.config_hash}, {"version", m.version},
           {"started", m.started},        {"finished", m.finished},
           {"outputs", m.outputs},        {"metrics", m.metrics}};
    atomic_write_file(path, j.dump(2) + "\n");
}

RunManifest run_task(const RunConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    RunManifest m;
    m.config_hash = hash_hex(fnv1a_hash(config.serialize()));
    m.started = current_timestamp_utc();

    switch (config.task) {
        case Task::Spectrum: run_spectrum(config, out_dir, m.config_hash, m); break;
        case Task::Bidc: run_bidc(config, out_dir, m.config_hash, m); break;
        case Task::Rates: run_rates(config, out_dir, m.config_hash, m); break;
        case Task::Prepare: run_prepare(config, out_dir, m.config_hash, m); break;
        case Task::Transfer: run_transfer(config, out_dir, m.config_hash, m); break;
        case Task::EffectiveCompare:
            run_effective_compare(config, out_dir, m.config_hash, m);
            break;
        case Task::Sweep: run_sweep(config, out_dir, m.config_hash, m); break;
    }

    m.finished = current_timestamp_utc();
    write_manifest(out_dir / "manifest.json", m);
    return m;
}

} // namespace bidc
