#include "bidc/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bidc {

namespace {

double interp_knots(const std::vector<std::pair<double, double>>& knots, double t) {
    if (knots.empty()) throw std::invalid_argument("schedule: no knots");
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    for (size_t i = 1; i < knots.size(); ++i)
        if (t <= knots[i].first) {
            const auto& [t0, g0] = knots[i - 1];
            const auto& [t1, g1] = knots[i];
            return g0 + (g1 - g0) * (t - t0) / (t1 - t0);
        }
    return knots.back().second;
}

} // namespace

double ProtocolSchedule::g1(double t) const { return interp_knots(g1_knots, t); }
double ProtocolSchedule::g3(double t) const { return interp_knots(g3_knots, t); }

void ProtocolSchedule::validate() const {
    if (duration <= 0.0) throw std::invalid_argument("schedule: duration must be > 0");
    for (const auto* ks : {&g1_knots, &g3_knots}) {
        if (ks->empty()) throw std::invalid_argument("schedule: empty knot list");
        for (size_t i = 0; i < ks->size(); ++i) {
            if ((*ks)[i].second < 0.0)
                throw std::invalid_argument("schedule: coupling values must be >= 0");
            if (i > 0 && (*ks)[i].first <= (*ks)[i - 1].first)
                throw std::invalid_argument("schedule: knot times must be strictly increasing");
        }
    }
}

ProtocolSchedule ProtocolSchedule::constant(double g1, double g3, double duration) {
    ProtocolSchedule s;
    s.duration = duration;
    s.g1_knots = {{0.0, g1}, {duration, g1}};
    s.g3_knots = {{0.0, g3}, {duration, g3}};
    return s;
}

ProtocolSchedule ProtocolSchedule::linear_ramp(double g1_from, double g1_to,
                                               double g3_from, double g3_to, double duration) {
    ProtocolSchedule s;
    s.duration = duration;
    s.g1_knots = {{0.0, g1_from}, {duration, g1_to}};
    s.g3_knots = {{0.0, g3_from}, {duration, g3_to}};
    return s;
}

ProtocolSchedule ProtocolSchedule::transfer_ramp(double duration, double hopping) {
    return linear_ramp(0.05 * hopping, 0.20 * hopping, 0.20 * hopping, 0.05 * hopping,
                       duration);
}

std::string to_string(Backend b) {
    switch (b) {
        case Backend::Full: return "full";
        case Backend::Effective: return "effective";
        case Backend::Lindblad: return "lindblad";
    }
    return "?";
}

Backend backend_from_string(const std::string& s) {
    if (s == "full") return Backend::Full;
    if (s == "effective") return Backend::Effective;
    if (s == "lindblad") return Backend::Lindblad;
    throw std::invalid_argument("backend: expected full|effective|lindblad, got '" + s + "'");
}

std::string to_string(PhaseFrame f) {
    switch (f) {
        case PhaseFrame::Rotating: return "rotating";
        case PhaseFrame::Lab: return "lab";
        case PhaseFrame::Receiver: return "receiver";
    }
    return "?";
}

PhaseFrame phase_frame_from_string(const std::string& s) {
    if (s == "rotating") return PhaseFrame::Rotating;
    if (s == "lab") return PhaseFrame::Lab;
    if (s == "receiver") return PhaseFrame::Receiver;
    throw std::invalid_argument("phase_frame: expected rotating|lab|receiver, got '" + s + "'");
}

// ---- transfer ----------------------------------------------------------------

namespace {

// P(t) reference for the effective backend: normalized condition-root state
VectorXcd effective_bidc_or_empty(const ModelParams& p, double g1, double g3) {
    try {
        const auto root = solve_bidc_condition(p, std::pair{g1, g3});
        if (!root.found) return {};
        return bidc_effective_state(root);
    } catch (const std::exception&) {
        return {};
    }
}

void accumulate_receiver_phase(TransferResult& r, const ModelParams& p,
                               const ProtocolSchedule& sched) {
    // phase of the receiving pair's local frame relative to the 2*Omega frame
    r.receiver_phase.assign(r.time.size(), 0.0);
    double acc = 0.0;
    for (size_t i = 1; i < r.time.size(); ++i) {
        auto rate = [&](double t) {
            const auto f = p.hamiltonian_freqs(sched.g1(t), sched.g3(t));
            return f[2] + f[3] - 2.0 * r.omega_frame;
        };
        const double dt = r.time[i] - r.time[i - 1];
        acc += 0.5 * (rate(r.time[i - 1]) + rate(r.time[i])) * dt;
        r.receiver_phase[i] = acc;
    }
}

TransferResult transfer_full(const ModelParams& p, const ProtocolSchedule& sched,
                             Complex c_e, const TransferOptions& opt) {
    ModelParams q = p;
    if (opt.nc_override) q.n_sites = *opt.nc_override;
    if (q.site_2 >= q.n_sites)
        throw std::invalid_argument("run_state_transfer: atom sites outside the reduced ring");
    const auto basis = build_basis(q.n_sites);
    auto h = assemble_hamiltonian(q, basis, std::pair{sched.g1(0.0), sched.g3(0.0)});
    VectorXcd psi = VectorXcd::Zero(basis.dim());
    const int i12 = basis.atom_pair_index(0, 1);
    const int i34 = basis.atom_pair_index(2, 3);
    psi[i12] = c_e;

    TransferResult r;
    r.backend = Backend::Full;
    r.c_e = c_e;
    r.theta_available = true;
    r.omega_frame = p.omega();

    // instantaneous eigenstate overlaps need the states; record them sparsely
    std::vector<VectorXcd> snapshots;
    const bool want_overlap = opt.compute_overlap;

    EvolveOptions eopt;
    eopt.dt = opt.full_dt;
    eopt.n_samples = opt.n_samples;
    auto g_of_t = [&sched](double t) { return std::pair{sched.g1(t), sched.g3(t)}; };
    evolve_state(h, psi, g_of_t, sched.duration, eopt,
                 [&](double t, const VectorXcd& st) {
                     r.time.push_back(t);
                     r.ce2.push_back(std::norm(st[i12]));
                     r.cpe2.push_back(std::norm(st[i34]));
                     r.theta.push_back(principal_angle(
                         std::arg(st[i34]) + 2.0 * r.omega_frame * t));
                     if (want_overlap) snapshots.push_back(st);
                 });

    if (want_overlap) {
        r.overlap.reserve(snapshots.size());
        const double sigma = 2.0 * p.omega();
        for (size_t s = 0; s < snapshots.size(); ++s) {
            const double t = r.time[s];
            ModelParams inst = q;
            inst.g_12 = sched.g1(t);
            inst.g_34 = sched.g3(t);
            double val = std::numeric_limits<double>::quiet_NaN();
            try {
                auto hi = assemble_hamiltonian(inst, basis);
                EigensolveOptions eo;
                eo.window = {sigma, 0.03 * std::max(1.0, p.hopping)};
                auto states = eigensolve(hi, eo);
                auto found = find_bidc(states, basis, inst);
                if (found.found) {
                    const Complex ov = found.state.vector.dot(snapshots[s]);
                    val = std::norm(ov);
                }
            } catch (const std::exception&) {}
            r.overlap.push_back(val);
        }
    }
    accumulate_receiver_phase(r, p, sched);
    return r;
}

TransferResult transfer_effective(const ModelParams& p, const ProtocolSchedule& sched,
                                  Complex c_e, const TransferOptions& opt) {
    EffectiveModel model(p);
    model.set_couplings(sched.g1(0.0), sched.g3(0.0));
    VectorXcd psi = model.pair_state(c_e);

    TransferResult r;
    r.backend = Backend::Effective;
    r.c_e = c_e;
    r.theta_available = true;
    r.omega_frame = p.omega();
    const double frame_mismatch = 2.0 * (r.omega_frame - model.omega_frame());

    std::vector<std::pair<double, VectorXcd>> snaps;
    EffectiveIntegrateOptions eopt;
    eopt.dt = opt.effective_dt;
    eopt.n_samples = opt.n_samples;
    auto g_of_t = [&sched](double t) { return std::pair{sched.g1(t), sched.g3(t)}; };
    integrate_effective(model, psi, g_of_t, sched.duration, eopt,
                        [&](double t, const VectorXcd& st) {
                            r.time.push_back(t);
                            r.ce2.push_back(std::norm(st[0]));
                            r.cpe2.push_back(std::norm(st[1]));
                            r.theta.push_back(principal_angle(
                                std::arg(st[1]) - frame_mismatch * t));
                            if (opt.compute_overlap) snaps.emplace_back(t, st);
                        });

    if (opt.compute_overlap) {
        r.overlap.reserve(snaps.size());
        for (const auto& [t, st] : snaps) {
            const VectorXcd ref = effective_bidc_or_empty(p, sched.g1(t), sched.g3(t));
            if (ref.size() == st.size()) r.overlap.push_back(std::norm(ref.dot(st)));
            else r.overlap.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    accumulate_receiver_phase(r, p, sched);
    return r;
}

TransferResult transfer_lindblad(const ModelParams& p, const ProtocolSchedule& sched,
                                 Complex c_e, const TransferOptions& opt) {
    TransferResult r;
    r.backend = Backend::Lindblad;
    r.c_e = c_e;
    r.theta_available = false;
    r.omega_frame = p.omega();

    const double cg = std::sqrt(std::max(0.0, 1.0 - std::norm(c_e)));
    Vector4cd v = Vector4cd::Zero();
    v[0] = cg;
    v[1] = c_e;
    Matrix4cd rho = v * v.adjoint();

    auto g_of_t = [&sched](double t) { return std::pair{sched.g1(t), sched.g3(t)}; };
    lindblad_propagate_schedule(rho, p, g_of_t, sched.duration, opt.lindblad_steps,
                                opt.n_samples, [&](double t, const Matrix4cd& m) {
                                    r.time.push_back(t);
                                    r.ce2.push_back((m(1, 1) + m(3, 3)).real());
                                    r.cpe2.push_back((m(2, 2) + m(3, 3)).real());
                                    r.theta.push_back(0.0);
                                });
    accumulate_receiver_phase(r, p, sched);
    return r;
}

} // namespace

TransferResult run_state_transfer(const ModelParams& p, const ProtocolSchedule& sched,
                                  Backend backend, Complex c_e, const TransferOptions& opt) {
    sched.validate();
    if (std::abs(c_e) > 1.0 + 1e-12)
        throw std::invalid_argument("run_state_transfer: |c_e| must be <= 1");
    switch (backend) {
        case Backend::Full: return transfer_full(p, sched, c_e, opt);
        case Backend::Effective: return transfer_effective(p, sched, c_e, opt);
        case Backend::Lindblad: return transfer_lindblad(p, sched, c_e, opt);
    }
    throw std::logic_error("run_state_transfer: unknown backend");
}

std::vector<double> bidc_overlap_trace(const TransferResult& traj, const ModelParams&,
                                       const ProtocolSchedule&) {
    if (traj.backend == Backend::Lindblad)
        throw std::invalid_argument("bidc_overlap_trace: not defined for the Lindblad backend");
    if (traj.overlap.empty())
        throw std::invalid_argument("bidc_overlap_trace: trajectory recorded without overlaps; "
                                    "rerun with compute_overlap enabled");
    return traj.overlap;
}

TransferCompletion transfer_phase_and_time(const TransferResult& result, PhaseFrame frame) {
    TransferCompletion c;
    c.frame = frame;
    if (!result.theta_available)
        throw std::invalid_argument("transfer_phase_and_time: phase not available in the " +
                                    to_string(result.backend) + " backend");
    const auto& t = result.time;
    const auto& th = result.theta;
    const auto& p2 = result.cpe2;
    if (t.size() < 2) throw std::invalid_argument("transfer_phase_and_time: too few samples");

    const double ce0 = std::sqrt(result.ce2.front());

    if (frame == PhaseFrame::Lab) {
        // theta_lab(t) = theta(t) - 2 Omega t: the fast lab phase crosses zero
        // within (almost) every sample interval; complete at the crossing
        // nearest the transfer maximum.
        const double w = 2.0 * result.omega_frame;
        size_t imax = 0;
        for (size_t i = 1; i < p2.size(); ++i)
            if (p2[i] > p2[imax]) imax = i;
        const size_t ia = imax > 0 ? imax - 1 : imax;
        const size_t ib = std::min(imax + 1, t.size() - 1);
        // linear model of the slow part around the maximum
        const double slope = (principal_angle(th[ib] - th[ia])) / std::max(t[ib] - t[ia], 1e-300);
        auto lab_phase = [&](double tt) {
            return th[imax] + slope * (tt - t[imax]) - w * tt;
        };
        // nearest solution of lab_phase = 0 (mod 2 pi) around t[imax]
        const double r0 = lab_phase(t[imax]);
        const double denom = slope - w;
        double t_star = t[imax];
        if (std::abs(denom) > 1e-300) {
            const double n_cycles = std::round(r0 / (2.0 * pi));
            t_star = t[imax] + (2.0 * pi * n_cycles - r0) / denom;
            t_star = std::clamp(t_star, t[ia], t[ib]);
        }
        c.found = true;
        c.t_star = t_star;
        // interpolate |c'_e|^2 at t_star
        size_t k = ia;
        while (k + 1 < t.size() && t[k + 1] < t_star) ++k;
        const double frac = (t_star - t[k]) / std::max(t[std::min(k + 1, t.size() - 1)] - t[k], 1e-300);
        const double p_at = k + 1 < t.size() ? p2[k] + frac * (p2[k + 1] - p2[k]) : p2[k];
        c.transferred = p_at;
        c.theta_residual = principal_angle(lab_phase(t_star));
        c.amplitude_residual = std::abs(std::sqrt(p_at) - ce0);
        c.theta_min = -pi;
        c.theta_max = pi;
        return c;
    }

    // slow frames: sign changes of the principal-value phase, wrap jumps excluded
    std::vector<double> phase(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        double x = th[i];
        if (frame == PhaseFrame::Receiver) x += result.receiver_phase[i];
        phase[i] = principal_angle(x);
    }
    c.theta_min = *std::min_element(phase.begin(), phase.end());
    c.theta_max = *std::max_element(phase.begin(), phase.end());

    bool all_zero = true;
    for (double x : phase)
        if (std::abs(x) > 1e-9) { all_zero = false; break; }
    if (all_zero) {
        size_t imax = 0;
        for (size_t i = 1; i < p2.size(); ++i)
            if (p2[i] > p2[imax]) imax = i;
        c.found = true;
        c.t_star = t[imax];
        c.transferred = p2[imax];
        c.theta_residual = 0.0;
        c.amplitude_residual = std::abs(std::sqrt(p2[imax]) - ce0);
        return c;
    }

    double best_p = -1.0;
    auto candidate = [&](double t_star, double p_at) {
        if (p_at > best_p) {
            best_p = p_at;
            c.found = true;
            c.t_star = t_star;
            c.transferred = p_at;
            c.theta_residual = 0.0;
            c.amplitude_residual = std::abs(std::sqrt(p_at) - ce0);
        }
    };
    for (size_t i = 0; i < t.size(); ++i) {
        if (phase[i] == 0.0) { candidate(t[i], p2[i]); continue; }
        if (i == 0 || phase[i] * phase[i - 1] >= 0.0) continue;
        if (std::abs(phase[i] - phase[i - 1]) >= pi) continue; // +-pi wrap, not a zero
        const double frac = phase[i - 1] / (phase[i - 1] - phase[i]);
        candidate(t[i - 1] + frac * (t[i] - t[i - 1]),
                  p2[i - 1] + frac * (p2[i] - p2[i - 1]));
    }
    return c;
}

// ---- preparation ----------------------------------------------------------------

PrepareResult prepare_entangled_state(const ModelParams& p, double alpha, double beta,
                                      double eta, double t_0, double t_final,
                                      double g_ref, int n_samples) {
    const double norm = alpha * alpha + beta * beta;
    if (std::abs(norm - 1.0) > 1e-9)
        throw std::invalid_argument("prepare_entangled_state: target must be normalized");
    if (alpha == 0.0)
        throw std::invalid_argument("prepare_entangled_state: alpha = 0 has no dark-state match");

    // couplings from the amplitude magnitudes, larger one pinned to g_ref
    double g1 = 0.0, g3 = 0.0;
    const double aa = std::abs(alpha), ab = std::abs(beta);
    if (ab == 0.0) {
        g1 = 0.0;
        g3 = g_ref;
    } else if (aa >= ab) {
        g3 = g_ref;
        g1 = g_ref * std::sqrt(std::sqrt(ab * ab / (aa * aa)));
    } else {
        g1 = g_ref;
        g3 = g_ref * std::sqrt(std::sqrt(aa * aa / (ab * ab)));
    }

    // the relative sign is set through cos[K0 dN] = -sign(alpha beta)
    const int sign = (alpha * beta < 0.0) || beta == 0.0 ? 1 : -1;
    ModelParams q = p;
    q.site_2 = q.site_1 + (sign > 0 ? 8 : 10);
    if (q.site_2 >= q.n_sites)
        throw std::invalid_argument("prepare_entangled_state: ring too small for the pair separation");
    q.g_12 = g1;
    q.g_34 = g3;

    auto lp = decay_rates(q);
    if (std::abs(std::abs(lp.cos_factor) - 1.0) > 0.05)
        throw std::invalid_argument("prepare_entangled_state: target needs |cos(K0 dN)| = 1; "
                                    "relative phases other than 0 or pi are unsupported");
    lp.eta = eta;
    lp.t_0 = t_0;

    Vector4cd target = Vector4cd::Zero();
    target[1] = alpha;
    target[2] = beta;

    PrepareResult r;
    r.g1 = g1;
    r.g3 = g3;
    r.delta_sites = q.delta_sites();
    Matrix4cd rho = Matrix4cd::Zero();
    rho(0, 0) = 1.0;
    LindbladOptions opt;
    opt.n_samples = n_samples;
    lindblad_propagate(rho, lp, t_final, opt, [&](double t, const Matrix4cd& m) {
        r.time.push_back(t);
        r.fidelity.push_back(fidelity(m, target));
        r.populations.push_back({m(0, 0).real(), m(1, 1).real(), m(2, 2).real(), m(3, 3).real()});
    });
    const size_t tail = std::max<size_t>(1, r.fidelity.size() / 10);
    double acc = 0.0;
    for (size_t i = r.fidelity.size() - tail; i < r.fidelity.size(); ++i) acc += r.fidelity[i];
    r.long_time_fidelity = acc / tail;
    return r;
}

// ---- exports ----------------------------------------------------------------------

void write_transfer_csv(const std::string& path, const TransferResult& r) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_transfer_csv: cannot open " + path);
    out.precision(17);
    out << "time,ce2,cpe2,theta,P,backend\n";
    for (size_t i = 0; i < r.time.size(); ++i) {
        out << r.time[i] << ',' << r.ce2[i] << ',' << r.cpe2[i] << ',';
        if (r.theta_available) out << r.theta[i];
        out << ',';
        if (i < r.overlap.size() && std::isfinite(r.overlap[i])) out << r.overlap[i];
        out << ',' << to_string(r.backend) << '\n';
    }
}

void write_prepare_csv(const std::string& path, const PrepareResult& r) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_prepare_csv: cannot open " + path);
    out.precision(17);
    out << "time,F,p_ground,p_pair1,p_pair2,p_both\n";
    for (size_t i = 0; i < r.time.size(); ++i)
        out << r.time[i] << ',' << r.fidelity[i] << ',' << r.populations[i][0] << ','
            << r.populations[i][1] << ',' << r.populations[i][2] << ','
            << r.populations[i][3] << '\n';
}

} // namespace bidc
