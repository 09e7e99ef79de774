#include "bidc/effective.hpp"

#include "bidc/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bidc {

// frame frequency: the dressed pair transition / 2, averaged over the two
// pairs at the configured couplings (equals the configured Omega under the
// Stark convention)
double effective_frame_frequency(const ModelParams& p) {
    const auto f = p.hamiltonian_freqs();
    const double g0 = greens_function(0, p) / p.hopping;
    const double dressed1 = f[0] + f[1] - 2.0 * p.g_12 * p.g_12 * g0;
    const double dressed2 = f[2] + f[3] - 2.0 * p.g_34 * p.g_34 * g0;
    return 0.25 * (dressed1 + dressed2);
}

double greens_decay_exponent(const ModelParams& p) {
    const double om = p.omega();
    const double J = p.hopping;
    if (std::abs(om) <= 2.0 * J)
        throw std::domain_error("greens_function: |Omega| <= 2J (branch cut)");
    return std::log(-om / (2.0 * J) + std::sqrt(om * om / (4.0 * J * J) - 1.0));
}

double greens_function(int n, const ModelParams& p) {
    const double om = p.omega();
    const double J = p.hopping;
    const double a = greens_decay_exponent(p);
    return J * std::exp(-a * std::abs(n)) / std::sqrt(om * om - 4.0 * J * J);
}

double greens_function_quadrature(int n, const ModelParams& p, int n_grid) {
    const double om = p.omega();
    double sum = 0.0;
    for (int m = 0; m < n_grid; ++m) {
        const double k = -pi + 2.0 * pi * (m + 0.5) / n_grid;
        sum += std::cos(k * n) / (single_photon_dispersion(k, p) - om);
    }
    return p.hopping * sum / n_grid;
}

std::array<double, 4> stark_shifted_frequencies(const ModelParams& p) {
    const double s1 = stark_shift(p.g_12, p);
    const double s3 = stark_shift(p.g_34, p);
    return {p.atom_freqs[0] + s1, p.atom_freqs[1] + s1,
            p.atom_freqs[2] + s3, p.atom_freqs[3] + s3};
}

double pair_doublon_coupling(double K, int r, const ModelParams& p) {
    const double omega_f = effective_frame_frequency(p);
    const double x = doublon_localization(K, p);
    const int nc = p.n_sites;
    const double sh = std::sinh(x), ch = std::cosh(x), st = std::sqrt(std::tanh(x));
    double sum = 0.0;
    for (double k : momentum_grid(nc)) {
        const double dk = single_photon_dispersion(k, p) - omega_f;
        if (std::abs(dk) < 1e-12)
            throw std::domain_error("pair_doublon_coupling: atom resonant with the "
                                    "single-photon band (delta_k = 0)");
        const double L = sh * st / (ch - std::cos(k - 0.5 * K));
        sum += L * std::cos((k - 0.5 * K) * r) / dk;
    }
    return 2.0 * std::numbers::sqrt2_v<double> * p.hopping * sum / nc;
}

void attach_couplings(DoublonModeTable& table, const ModelParams& p) {
    const int dn = p.delta_sites();
    for (auto& m : table.modes) {
        m.f_onsite = pair_doublon_coupling(m.K, 0, p);
        m.f_split = pair_doublon_coupling(m.K, dn, p);
    }
}

// ---- reduced model -----------------------------------------------------------

EffectiveModel::EffectiveModel(const ModelParams& p) : params_(p), nc_(p.n_sites) {
    params_.validate();
    omega_frame_ = effective_frame_frequency(p);
    k0_ = resonant_wavevector(omega_frame_, p);
    const auto grid = momentum_grid(nc_);
    Ks_.resize(nc_);
    Es_.resize(nc_);
    fs_.resize(nc_);
    deltaK_.resize(nc_);
    w1_.resize(nc_);
    w2_.resize(nc_);
    for (int q = 0; q < nc_; ++q) {
        Ks_[q] = grid[q];
        Es_[q] = doublon_dispersion(grid[q], p);
        fs_[q] = pair_doublon_coupling(grid[q], 0, p);
        deltaK_[q] = Es_[q] - 2.0 * omega_frame_;
        w1_[q] = std::exp(Complex(0, grid[q] * p.site_1));
        w2_[q] = std::exp(Complex(0, grid[q] * p.site_2));
    }
    set_couplings(p.g_12, p.g_34);
}

void EffectiveModel::set_couplings(double g1, double g3) {
    g1_ = g1;
    g3_ = g3;
    const auto f = params_.hamiltonian_freqs(g1, g3);
    const double g0 = greens_function(0, params_) / params_.hopping;
    d1_ = f[0] + f[1] - 2.0 * g1 * g1 * g0 - 2.0 * omega_frame_;
    d3_ = f[2] + f[3] - 2.0 * g3 * g3 * g0 - 2.0 * omega_frame_;
}

void EffectiveModel::apply(const VectorXcd& x, VectorXcd& y) const {
    y.resize(dim());
    const double c1 = -g1_ * g1_ / (params_.hopping * std::sqrt(double(nc_)));
    const double c3 = -g3_ * g3_ / (params_.hopping * std::sqrt(double(nc_)));
    Complex y0 = d1_ * x[0];
    Complex y1 = d3_ * x[1];
    for (int q = 0; q < nc_; ++q) {
        const Complex w1 = c1 * fs_[q] * w1_[q];
        const Complex w2 = c3 * fs_[q] * w2_[q];
        const Complex xk = x[2 + q];
        y0 += w1 * xk;
        y1 += w2 * xk;
        y[2 + q] = deltaK_[q] * xk + std::conj(w1) * x[0] + std::conj(w2) * x[1];
    }
    y[0] = y0;
    y[1] = y1;
}

VectorXcd EffectiveModel::pair_state(Complex c_e) const {
    VectorXcd psi = VectorXcd::Zero(dim());
    psi[0] = c_e;
    return psi;
}

void integrate_effective(EffectiveModel& m, VectorXcd& psi,
                         const std::function<std::pair<double, double>(double)>& g_of_t,
                         double t_final, const EffectiveIntegrateOptions& opt,
                         const std::function<void(double, const VectorXcd&)>& observer) {
    if (psi.size() != m.dim())
        throw std::invalid_argument("integrate_effective: state dimension mismatch");
    KrylovOptions kopt{opt.krylov_tol, opt.max_krylov, 24};
    auto apply = [&m](const VectorXcd& x, VectorXcd& y) { m.apply(x, y); };
    const int ns = std::max(1, opt.n_samples);
    const double sample_dt = t_final / ns;
    if (observer) observer(0.0, psi);
    double t = 0.0;
    for (int s = 1; s <= ns; ++s) {
        const double t_next = s * sample_dt;
        while (t < t_next - 1e-12 * std::max(1.0, t_final)) {
            const double dt = std::min(opt.dt, t_next - t);
            if (g_of_t) {
                auto [g1, g3] = g_of_t(t + 0.5 * dt);
                m.set_couplings(g1, g3);
            }
            krylov_exp_step(apply, psi, dt, kopt);
            t += dt;
        }
        t = t_next;
        if (observer) observer(t, psi);
    }
}

// ---- bound-state condition -----------------------------------------------------

BidcRoot solve_bidc_condition(const ModelParams& p,
                              std::optional<std::pair<double, double>> g_overrides) {
    ModelParams q = p;
    if (g_overrides) {
        q.g_12 = g_overrides->first;
        q.g_34 = g_overrides->second;
    }
    const double g1 = q.g_12, g3 = q.g_34;
    if (g3 <= 0.0 || g1 < 0.0)
        throw std::invalid_argument("solve_bidc_condition: needs g_34 > 0");

    const double omega_f = effective_frame_frequency(q);
    const double k0 = resonant_wavevector(omega_f, q);
    const int nc = q.n_sites;
    const int dn = q.delta_sites();
    const auto grid = momentum_grid(nc);

    VectorXd deltaK(nc), fs(nc), num_re(nc);
    VectorXcd num(nc);
    for (int i = 0; i < nc; ++i) {
        deltaK[i] = doublon_dispersion(grid[i], q) - 2.0 * omega_f;
        fs[i] = pair_doublon_coupling(grid[i], 0, q);
        num[i] = std::exp(Complex(0, k0 * dn)) * std::exp(Complex(0, -grid[i] * dn)) - 1.0;
        num_re[i] = num[i].real();
    }

    const double pref = std::pow(g1, 4) / (q.hopping * q.hopping * nc);
    auto condition = [&](double eps) {
        double s = 0.0;
        for (int i = 0; i < nc; ++i) {
            if (std::abs(eps - deltaK[i]) < 1e-11) continue; // excluded grid term
            s += pref * fs[i] * fs[i] * num_re[i] / (eps - deltaK[i]);
        }
        return -eps - s;
    };

    // bracket: the pole-gap around eps = 0 (poles only where the numerator
    // does not vanish)
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nc; ++i) {
        if (std::abs(num_re[i]) < 1e-12 && std::abs(num[i].imag()) < 1e-12) continue;
        if (deltaK[i] < 0.0) lo = std::max(lo, deltaK[i]);
        else if (deltaK[i] > 0.0) hi = std::min(hi, deltaK[i]);
    }
    const auto [band_lo, band_hi] = doublon_band_edges(q);
    if (!std::isfinite(lo)) lo = band_lo - 2.0 * omega_f;
    if (!std::isfinite(hi)) hi = band_hi - 2.0 * omega_f;
    const double margin = 1e-9 * std::max(1.0, std::abs(band_hi - band_lo));
    lo += margin;
    hi -= margin;

    BidcRoot root;
    root.k0 = k0;
    root.omega_frame = omega_f;
    root.ratio = -(g1 * g1 / (g3 * g3)) * std::exp(Complex(0, k0 * dn));

    double a = lo, b = hi, fa = condition(a), fb = condition(b);
    if (fa * fb > 0.0) {
        // no sign change in the central gap: scan the band for the root
        // nearest 2*Omega
        const int nscan = 4000;
        bool bracketed = false;
        double prev_x = band_lo - 2.0 * omega_f + margin, prev_f = condition(prev_x);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= nscan; ++i) {
            const double x = prev_x + (band_hi - band_lo) * i / nscan;
            if (x >= band_hi - 2.0 * omega_f - margin) break;
            const double fx = condition(x);
            if (prev_f * fx < 0.0 && std::abs(x) < best) {
                a = prev_x; b = x; fa = prev_f; fb = fx;
                best = std::abs(x);
                bracketed = true;
            }
            prev_x = x;
            prev_f = fx;
        }
        if (!bracketed) return root; // not found
    }
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = condition(m);
        if (fa * fm <= 0.0) { b = m; fb = fm; }
        else { a = m; fa = fm; }
    }
    const double eps = 0.5 * (a + b);
    root.found = true;
    root.frame_offset = eps;
    root.energy = eps + 2.0 * omega_f;
    root.residual = std::abs(condition(eps));

    root.mode_amplitudes.resize(nc);
    const double cpl = g1 * g1 / (q.hopping * std::sqrt(double(nc)));
    for (int i = 0; i < nc; ++i) {
        if (std::abs(eps - deltaK[i]) < 1e-11) {
            root.mode_amplitudes[i] = 0.0;
            continue;
        }
        const Complex numerator = std::exp(Complex(0, k0 * dn)) * std::exp(Complex(0, -grid[i] * q.site_2))
                                - std::exp(Complex(0, -grid[i] * q.site_1));
        root.mode_amplitudes[i] = cpl * fs[i] * numerator / (eps - deltaK[i]);
    }
    return root;
}

VectorXcd bidc_effective_state(const BidcRoot& root) {
    const int nm = static_cast<int>(root.mode_amplitudes.size());
    VectorXcd v(2 + nm);
    v[0] = 1.0;
    v[1] = root.ratio;
    v.segment(2, nm) = root.mode_amplitudes;
    v /= v.norm();
    return v;
}

BidcProfile bidc_real_space_profile(const ModelParams& p, const BidcRoot& root, int r_max) {
    if (!root.found)
        throw std::invalid_argument("bidc_real_space_profile: root not found");
    const int nc = p.n_sites;
    const auto grid = momentum_grid(nc);
    const int mid = (p.site_1 + p.site_2) / 2;
    const double inv = 1.0 / std::sqrt(2.0 * nc);

    // psi_K(r) on the unwrapped relative coordinate
    std::vector<std::vector<double>> psiK(nc, std::vector<double>(r_max + 1, 0.0));
    for (int q = 0; q < nc; ++q) {
        const double x = doublon_localization(grid[q], p);
        for (int r = 0; r <= r_max; ++r)
            psiK[q][r] = std::isinf(x) ? (r == 0 ? 1.0 : 0.0)
                                       : std::sqrt(std::tanh(x)) * std::exp(-r * x);
    }

    BidcProfile prof;
    prof.p_two = VectorXd::Zero(nc);
    double weight = 0.0;
    VectorXd site_sum = VectorXd::Zero(nc);
    for (int m = mid - nc / 2; m < mid - nc / 2 + nc; ++m) {
        for (int n = m - r_max; n <= m + r_max; ++n) {
            if (n < mid - nc / 2 || n >= mid - nc / 2 + nc) continue;
            const int r = std::abs(m - n);
            Complex c = 0.0;
            for (int q = 0; q < nc; ++q)
                c += root.mode_amplitudes[q]
                   * std::exp(Complex(0, grid[q] * 0.5 * (m + n))) * psiK[q][r];
            const double w = std::norm(c * inv);
            weight += w;
            site_sum[ring_site(m, nc)] += 4.0 * w;
        }
    }
    const double norm2 = 1.0 + std::norm(root.ratio) + 2.0 * weight;
    prof.p_two = site_sum / norm2;
    prof.photon_weight = 2.0 * weight / norm2;
    prof.alpha1 = std::sqrt(1.0 / norm2);
    return prof;
}

// ---- exports ----------------------------------------------------------------

void write_coupling_table_csv(const std::string& path, const ModelParams& p) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_coupling_table_csv: cannot open " + path);
    out.precision(17);
    out << "K,f_onsite,f_split\n";
    const int dn = p.delta_sites();
    for (double K : momentum_grid(p.n_sites))
        out << K << ',' << pair_doublon_coupling(K, 0, p) << ','
            << pair_doublon_coupling(K, dn, p) << '\n';
}

void write_greens_table_csv(const std::string& path, const ModelParams& p, int n_max) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_greens_table_csv: cannot open " + path);
    out.precision(17);
    out << "n,G_closed,G_quadrature\n";
    for (int n = 0; n <= n_max; ++n)
        out << n << ',' << greens_function(n, p) << ','
            << greens_function_quadrature(n, p) << '\n';
}

} // namespace bidc
