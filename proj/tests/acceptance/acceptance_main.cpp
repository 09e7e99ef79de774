// Acceptance suite: one numbered criterion per run (or all), each printing
// per-clause PASS/FAIL lines with the measured values and tolerances.

#include "bidc/config.hpp"
#include "bidc/effective.hpp"
#include "bidc/hilbert.hpp"
#include "bidc/io.hpp"
#include "bidc/open_system.hpp"
#include "bidc/protocols.hpp"
#include "bidc/run.hpp"
#include "bidc/spectral.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

using namespace bidc;

namespace {

struct Clause {
    std::string label;
    bool pass;
    std::string detail;
};

std::vector<Clause> g_clauses;

void clause(const std::string& label, bool pass, const std::string& detail) {
    g_clauses.push_back({label, pass, detail});
    std::cout << (pass ? "  [PASS] " : "  [FAIL] ") << label << ": " << detail << "\n";
}

std::string fmt(double x, int prec = 6) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << x;
    return ss.str();
}

ModelParams paper_model(int nc, FreqConvention conv) {
    ModelParams p;
    p.n_sites = nc;
    p.convention = conv;
    return p;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    std::cout << "criterion 1: doublon-band oracle, bare ring vs closed form (tol 1e-8 J)\n";
    for (int nc : {10, 12, 16}) {
        ModelParams p = paper_model(nc, FreqConvention::Bare);
        p.g_12 = p.g_34 = 0.0;
        const auto basis = build_basis(nc);
        auto h = assemble_hamiltonian(p, basis);
        // bare CRW two-photon sector = the photon-pair block
        const int np = basis.photon_pair_count();
        MatrixXd block = MatrixXd(h.matrix()).topLeftCorner(np, np);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
        std::vector<double> below;
        for (int q = 0; q < es.eigenvalues().size(); ++q)
            if (es.eigenvalues()[q] < scattering_band_edges(p).first - 1e-9)
                below.push_back(es.eigenvalues()[q]);
        double worst = 0.0;
        for (double k : momentum_grid(nc)) {
            const double target = doublon_dispersion(k, p);
            double best = 1e300;
            for (double e : below) best = std::min(best, std::abs(e - target));
            worst = std::max(worst, best);
        }
        clause("1 N_c=" + std::to_string(nc), worst <= 1e-8,
               "n_below=" + std::to_string(below.size()) + " max|E_K - E_exact| = " +
                   fmt(worst, 3) + " (tol 1e-8; finite-ring wraparound ~ e^{-N_c/lambda})");
    }
}

// shared by criteria 2 and 3
struct BidcRun {
    ModelParams params;
    TwoExcitationBasis basis{2};
    BidcResult result;
    std::vector<EigenState> states;
};

BidcRun run_bidc_search() {
    // literal reading of the stated parameters: the four atomic frequencies
    // in H equal E_{pi/2}/2 (bare convention)
    BidcRun r{paper_model(148, FreqConvention::Bare), build_basis(148), {}, {}};
    auto h = assemble_hamiltonian(r.params, r.basis);
    EigensolveOptions opt;
    opt.window = {2.0 * r.params.omega() - 0.005, 0.032};
    r.states = eigensolve(h, opt);
    r.result = find_bidc(r.states, r.basis, r.params);
    return r;
}

void criterion_2() {
    std::cout << "criterion 2: bound state in the doublon continuum at N_c = 148\n";
    const auto run = run_bidc_search();
    const double two_om = 2.0 * run.params.omega();
    if (!run.result.found && run.result.candidates.empty()) {
        clause("2 found", false, "no doublon-branch candidates in the window");
        return;
    }
    const auto& best = run.result.best;
    clause("2 found", run.result.found,
           "candidates=" + std::to_string(run.result.candidates.size()) +
               ", selected E = " + fmt(best.energy, 10));
    const double dressed = two_om - 2.0 * stark_shift(run.params.g_12, run.params);
    clause("2 energy", std::abs(best.energy - two_om) <= 1e-3,
           "|E - 2 Omega| = " + fmt(std::abs(best.energy - two_om), 3) +
               " (tol 1e-3; against the Stark-dressed pair energy: " +
               fmt(std::abs(best.energy - dressed), 3) + ")");
    clause("2 atomic excitation", best.pe >= 1.9, "P_e = " + fmt(best.pe) + " (>= 1.9)");
    clause("2 dark ratio", best.antisym <= 0.05,
           "|a12 + a34|/|a12| = " + fmt(best.antisym, 3) + " (<= 0.05)");
    clause("2 localization", best.localization >= 0.9,
           "L = " + fmt(best.localization) + " (>= 0.9)");

    const BidcCandidate* partner = nullptr;
    for (const auto& c : run.result.candidates)
        if (!partner || c.in_phase_weight > partner->in_phase_weight) partner = &c;
    if (partner)
        clause("2 in-phase partner", partner->localization < 0.9,
               "partner E - 2 Omega = " + fmt(partner->energy - two_om, 3) +
                   ", L = " + fmt(partner->localization) + " (must fail L >= 0.9)");
}

void criterion_3() {
    std::cout << "criterion 3: analytic two-photon profile against full numerics\n";
    const auto run = run_bidc_search();
    if (!run.result.found) {
        clause("3 profile", false, "bound state not found, no profile to compare");
        return;
    }
    const auto root = solve_bidc_condition(run.params);
    if (!root.found) {
        clause("3 profile", false, "effective condition has no root");
        return;
    }
    const auto prof = bidc_real_space_profile(run.params, root);
    const auto dist = photon_distribution(run.basis, run.result.state.vector);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < run.params.n_sites; ++j) {
        num += std::pow(prof.p_two[j] - dist.two[j], 2);
        den += std::pow(dist.two[j], 2);
    }
    const double l2 = std::sqrt(num / den);
    clause("3 profile", l2 <= 0.05,
           "normalized L2 deviation = " + fmt(l2, 4) + " (tol 0.05), analytic root E - 2 Omega = " +
               fmt(root.energy - 2.0 * run.params.omega(), 3));
}

void criterion_4() {
    std::cout << "criterion 4: preparation fidelity of the antisymmetric pair state\n";
    ModelParams p = paper_model(148, FreqConvention::Stark);
    const double a = 1.0 / std::sqrt(2.0), b = -1.0 / std::sqrt(2.0);
    const auto r = prepare_entangled_state(p, a, b, 3e-5, 7.3e4, 2e5, 0.1);
    clause("4 stabilized fidelity", std::abs(r.long_time_fidelity - 0.97) <= 0.02,
           "F(long time) = " + fmt(r.long_time_fidelity, 4) + " (0.97 +- 0.02)");

    auto peak = [&](double g) {
        const auto rr = prepare_entangled_state(p, a, b, 3e-5, 1e18, 2.2e5, g);
        double m = 0.0;
        for (double f : rr.fidelity) m = std::max(m, f);
        return m;
    };
    const double p10 = peak(0.10), p15 = peak(0.15);
    clause("4 peak ordering", p15 > p10,
           "peak F(g=0.15) = " + fmt(p15, 4) + " > peak F(g=0.1) = " + fmt(p10, 4));
}

void criterion_5() {
    std::cout << "criterion 5: generalized preparation targets\n";
    ModelParams p = paper_model(148, FreqConvention::Stark);
    {
        const auto r = prepare_entangled_state(p, 2.0 / std::sqrt(5.0), -1.0 / std::sqrt(5.0),
                                               3e-5, 6.0e4, 1.6e5, 0.1);
        clause("5 target (2,-1)/sqrt5", r.long_time_fidelity >= 0.97,
               "F = " + fmt(r.long_time_fidelity, 4) + " (>= 0.97), dN = " +
                   std::to_string(r.delta_sites));
    }
    {
        const auto r = prepare_entangled_state(p, 4.0 / std::sqrt(17.0), 1.0 / std::sqrt(17.0),
                                               3e-5, 5.5e4, 1.6e5, 0.1);
        clause("5 target (4,1)/sqrt17", r.long_time_fidelity >= 0.97,
               "F = " + fmt(r.long_time_fidelity, 4) + " (>= 0.97), dN = " +
                   std::to_string(r.delta_sites));
    }
}

void criterion_6() {
    std::cout << "criterion 6: slow transfer, JT = 5e5 (effective vs Markovian)\n";
    ModelParams p = paper_model(148, FreqConvention::Stark);
    const auto sched = ProtocolSchedule::transfer_ramp(5e5);
    TransferOptions opt;
    opt.n_samples = 200;
    opt.effective_dt = 2.0;
    const auto eff = run_state_transfer(p, sched, Backend::Effective, 1.0, opt);
    TransferOptions lopt = opt;
    lopt.lindblad_steps = 4000;
    const auto lin = run_state_transfer(p, sched, Backend::Lindblad, 1.0, lopt);

    double dev = 0.0, max_eff = 0.0, max_lin = 0.0;
    for (size_t i = 0; i < eff.time.size(); ++i) {
        dev = std::max(dev, std::abs(eff.cpe2[i] - lin.cpe2[i]));
        max_eff = std::max(max_eff, eff.cpe2[i]);
        max_lin = std::max(max_lin, lin.cpe2[i]);
    }
    clause("6 backend agreement", dev <= 0.02,
           "max_t | |c'_e|^2_eff - |c'_e|^2_lind | = " + fmt(dev, 3) +
               " (tol 0.02; recirculating initial-bright transient)");
    clause("6 max transfer", max_eff >= 0.98 && max_lin >= 0.98,
           "max |c'_e|^2: effective = " + fmt(max_eff, 4) + ", lindblad = " + fmt(max_lin, 4) +
               " (>= 0.98)");
    double pmin = 2.0;
    for (double x : eff.overlap)
        if (std::isfinite(x)) pmin = std::min(pmin, x);
    clause("6 bound-state overlap", pmin >= 0.99,
           "min_t P(t) = " + fmt(pmin, 4) + " (>= 0.99, effective instantaneous reference)");
}

void criterion_7() {
    std::cout << "criterion 7: fast transfer, JT = 5e3 (full vs effective vs Markovian)\n";
    const auto sched = ProtocolSchedule::transfer_ramp(5e3);
    TransferOptions base;
    base.n_samples = 200;
    base.compute_overlap = false;
    base.full_dt = 1.0;

    ModelParams p148 = paper_model(148, FreqConvention::Stark);
    TransferOptions o80 = base;
    o80.nc_override = 80;
    const auto full80 = run_state_transfer(p148, sched, Backend::Full, 1.0, o80);
    TransferOptions o100 = base;
    o100.nc_override = 100;
    const auto full100 = run_state_transfer(p148, sched, Backend::Full, 1.0, o100);

    double dev_nc = 0.0;
    for (size_t i = 0; i < full80.time.size(); ++i)
        dev_nc = std::max(dev_nc, std::abs(full80.cpe2[i] - full100.cpe2[i]));
    clause("7 ring convergence", dev_nc <= 0.01,
           "max_t | |c'_e|^2_(N=80) - |c'_e|^2_(N=100) | = " + fmt(dev_nc, 3) + " (tol 0.01)");

    ModelParams p80e = paper_model(80, FreqConvention::Stark);
    const auto eff80 = run_state_transfer(p80e, sched, Backend::Effective, 1.0, base);
    double dev_fe = 0.0;
    for (size_t i = 0; i < eff80.time.size(); ++i)
        dev_fe = std::max(dev_fe, std::abs(full80.cpe2[i] - eff80.cpe2[i]));
    clause("7 full vs effective", dev_fe <= 0.02,
           "max_t deviation = " + fmt(dev_fe, 3) + " (tol 0.02)");

    // effective run at the paper ring with the instantaneous-bound-state trace
    TransferOptions oeff = base;
    oeff.compute_overlap = true;
    const auto eff148 = run_state_transfer(p148, sched, Backend::Effective, 1.0, oeff);
    double pmin = 2.0;
    size_t nadir = 0;
    for (size_t i = 0; i < eff148.overlap.size(); ++i)
        if (std::isfinite(eff148.overlap[i]) && eff148.overlap[i] < pmin) {
            pmin = eff148.overlap[i];
            nadir = i;
        }
    clause("7 overlap nadir", std::abs(pmin - 0.94) <= 0.03,
           "min_t P(t) = " + fmt(pmin, 4) + " at t = " + fmt(eff148.time[nadir], 4) +
               " (0.94 +- 0.03)");

    TransferOptions olin = base;
    olin.lindblad_steps = 2000;
    const auto lin148 = run_state_transfer(p148, sched, Backend::Lindblad, 1.0, olin);
    const double d_lin = std::abs(lin148.cpe2[nadir] - eff148.cpe2[nadir]);
    const double d_full = std::abs(full80.cpe2[nadir] - eff80.cpe2[nadir]);
    clause("7 Markovian breakdown", d_lin > d_full,
           "at the nadir: |lind - eff| = " + fmt(d_lin, 3) + " > |full - eff| = " +
               fmt(d_full, 3));

    const auto comp = transfer_phase_and_time(full80, PhaseFrame::Lab);
    const auto comp_rot = transfer_phase_and_time(full80, PhaseFrame::Rotating);
    std::ostringstream extra;
    extra << "lab frame: T* = " << fmt(comp.t_star, 6) << ", |c'_e(T*)|^2 = "
          << fmt(comp.transferred, 4) << " (rotating-frame crossings: "
          << (comp_rot.found ? "found" : "none, theta in [" + fmt(comp_rot.theta_min, 3) +
                                             ", " + fmt(comp_rot.theta_max, 3) + "]")
          << ")";
    clause("7 completion", comp.found && comp.transferred >= 0.95, extra.str());
}

void criterion_8() {
    std::cout << "criterion 8: property suite\n";
    {
        ModelParams p = paper_model(40, FreqConvention::Stark);
        const auto basis = build_basis(40);
        auto h = assemble_hamiltonian(p, basis);
        const Eigen::SparseMatrix<double> diff =
            Eigen::SparseMatrix<double>(h.matrix().transpose()) - h.matrix();
        const double asym =
            Eigen::Map<const VectorXd>(diff.valuePtr(), diff.nonZeros()).cwiseAbs().maxCoeff();
        clause("8 hermiticity", asym == 0.0, "max |H - H^T| = " + fmt(asym, 3));
    }
    {
        ModelParams p = paper_model(24, FreqConvention::Stark);
        const auto basis = build_basis(24);
        auto h = assemble_hamiltonian(p, basis);
        const auto states = eigensolve(h);
        double res = 0.0, sum_err = 0.0, scale = 0.0;
        for (const auto& st : states) scale = std::max(scale, std::abs(st.energy));
        for (const auto& st : states) {
            res = std::max(res, st.residual);
            const auto d = photon_distribution(basis, st.vector);
            sum_err = std::max(sum_err, std::abs(atomic_excitation(basis, st.vector) +
                                                 d.one.sum() + d.two.sum() - 2.0));
        }
        clause("8 eigen residuals", res <= 1e-8 * scale,
               "max ||Hv - Ev|| = " + fmt(res, 3) + " (scale " + fmt(scale, 3) + ")");
        clause("8 excitation sum", sum_err <= 1e-10,
               "max |P_e + sum <n_j> - 2| = " + fmt(sum_err, 3));
    }
    {
        ModelParams p = paper_model(40, FreqConvention::Stark);
        const auto basis = build_basis(40);
        auto h = assemble_hamiltonian(p, basis);
        VectorXcd psi = VectorXcd::Zero(basis.dim());
        psi[basis.atom_pair_index(0, 1)] = 1.0;
        EvolveOptions opt;
        opt.dt = 1.0;
        opt.n_samples = 20;
        double drift = 0.0;
        auto sched = [](double t) { return std::pair{0.05 + 3e-5 * t, 0.2 - 3e-5 * t}; };
        evolve_state(h, psi, sched, 1000.0, opt, [&](double, const VectorXcd& st) {
            drift = std::max(drift, std::abs(st.norm() - 1.0));
        });
        clause("8 norm drift", drift <= 1e-8, "max | ||psi|| - 1 | = " + fmt(drift, 3));
    }
    {
        ModelParams p = paper_model(148, FreqConvention::Stark);
        auto lp = decay_rates(p);
        lp.eta = 3e-5;
        lp.t_0 = 7.3e4;
        Matrix4cd rho = Matrix4cd::Zero();
        rho(0, 0) = 1.0;
        LindbladOptions opt;
        opt.n_samples = 100;
        double terr = 0.0, eig = 0.0;
        lindblad_propagate(rho, lp, 1.5e5, opt, [&](double, const Matrix4cd& m) {
            terr = std::max(terr, trace_error(m));
            eig = std::min(eig, min_eigenvalue(m));
        });
        clause("8 trace/positivity", terr <= 1e-10 && eig >= -1e-10,
               "max trace error = " + fmt(terr, 3) + ", min eigenvalue = " + fmt(eig, 3));
    }
    {
        ModelParams p = paper_model(148, FreqConvention::Stark);
        bool ok = true;
        double worst = 0.0;
        for (double g1 : {0.04, 0.1, 0.18})
            for (double g3 : {0.05, 0.12, 0.2})
                for (int dn : {1, 4, 8, 10}) {
                    auto q = p;
                    q.site_2 = q.site_1 + dn;
                    const auto l = decay_rates(q, std::pair{g1, g3});
                    const double slack = l.gamma_1 * l.gamma_2 - l.gamma_c * l.gamma_c;
                    worst = std::min(worst, slack);
                    ok = ok && slack >= -1e-15;
                }
        clause("8 rate inequality", ok,
               "min(gamma_1 gamma_2 - gamma_c^2) = " + fmt(worst, 3));
    }
    {
        ModelParams p = paper_model(148, FreqConvention::Stark);
        double worst = 0.0;
        for (double k : momentum_grid(64)) {
            if (std::abs(k) < 1e-9 || std::abs(std::abs(k) - pi) < 1e-9) continue;
            const double fd = (doublon_dispersion(k + 1e-6, p) -
                               doublon_dispersion(k - 1e-6, p)) / 2e-6;
            worst = std::max(worst,
                             std::abs(group_velocity(k, p) - fd) / std::max(1e-12, std::abs(fd)));
        }
        clause("8 group velocity", worst <= 1e-6, "max relative deviation = " + fmt(worst, 3));
    }
    {
        ModelParams p = paper_model(148, FreqConvention::Stark);
        double worst = 0.0;
        for (int n = 0; n <= 12; ++n) {
            const double a = greens_function(n, p);
            const double b = greens_function_quadrature(n, p);
            worst = std::max(worst, std::abs(a - b) / std::abs(a));
        }
        clause("8 greens function", worst <= 1e-6, "max relative deviation = " + fmt(worst, 3));
    }
    {
        ModelParams p = paper_model(148, FreqConvention::Stark);
        auto lp = decay_rates(p);
        const Matrix4cd a1 = pair_lowering_1();
        const Matrix4cd h1 = 2e-5 * (a1 + Matrix4cd(a1.adjoint()));
        const auto g4 = master_generator(h1, lp);
        const auto g1 = master_generator_single_jump(h1, lp);
        const double dev = (g4 - g1).cwiseAbs().maxCoeff();
        clause("8 generator equivalence", dev <= 1e-9,
               "max |general - single-jump| = " + fmt(dev, 3));
    }
    {
        ModelParams p = paper_model(148, FreqConvention::Stark);
        auto lp = decay_rates(p);
        lp.eta = 0.0;
        lp.t_0 = 0.0;
        const auto d = dark_state(p.g_12, p.g_34, +1);
        Matrix4cd rho = d * d.adjoint();
        const Matrix4cd rho0 = rho;
        LindbladOptions opt;
        opt.n_samples = 40;
        double worst = 0.0;
        lindblad_propagate(rho, lp, 1e5, opt, [&](double, const Matrix4cd& m) {
            worst = std::max(worst, (m - rho0).cwiseAbs().maxCoeff());
        });
        clause("8 dark stationarity", worst <= 1e-10, "max drift = " + fmt(worst, 3));
    }
    {
        namespace fs = std::filesystem;
        const fs::path base = fs::temp_directory_path() / "bidc_acceptance_det";
        fs::remove_all(base);
        auto c = parse_config_text("task = rates\nn_sites = 60\n");
        run_task(c, base / "a");
        run_task(c, base / "b");
        auto c2 = parse_config_text("task = transfer\nn_sites = 40\nbackend = effective\n"
                                    "duration = 300\nn_samples = 10\n");
        run_task(c2, base / "ta");
        run_task(c2, base / "tb");
        const bool same_rates = read_file(base / "a" / "rates.json")
                             == read_file(base / "b" / "rates.json");
        const bool same_traj = read_file(base / "ta" / "transfer.csv")
                            == read_file(base / "tb" / "transfer.csv");
        fs::remove_all(base);
        clause("8 determinism", same_rates && same_traj,
               "identical configs give byte-identical outputs");
    }
}

} // namespace

int main(int argc, char** argv) {
    int which = 0; // 0 = all
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            which = std::atoi(argv[i + 1]);

    const std::vector<void (*)()> criteria{criterion_1, criterion_2, criterion_3,
                                           criterion_4, criterion_5, criterion_6,
                                           criterion_7, criterion_8};
    int failed = 0;
    for (int n = 1; n <= 8; ++n) {
        if (which != 0 && which != n) continue;
        g_clauses.clear();
        const auto start = std::chrono::steady_clock::now();
        criteria[n - 1]();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool ok = true;
        for (const auto& c : g_clauses) ok = ok && c.pass;
        std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  ("
                  << fmt(secs, 3) << " s)\n";
        if (!ok) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
