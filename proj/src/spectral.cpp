#include "bidc/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace bidc {

namespace {

void fix_phase(VectorXcd& v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Complex a = v[imax];
    if (std::abs(a) > 0.0) v *= std::conj(a) / std::abs(a);
}

double residual_of(const SparseHamiltonian& h, double e, const VectorXcd& v) {
    VectorXcd hv(v.size());
    h.apply(v, hv);
    return (hv - e * v).norm();
}

std::vector<EigenState> dense_eigensolve(const SparseHamiltonian& h) {
    MatrixXd dense = MatrixXd(h.matrix());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(dense);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolve: dense solver failed");
    std::vector<EigenState> out(dense.rows());
    for (Eigen::Index q = 0; q < dense.rows(); ++q) {
        out[q].energy = es.eigenvalues()[q];
        out[q].vector = es.eigenvectors().col(q).cast<Complex>();
        fix_phase(out[q].vector);
        out[q].residual = residual_of(h, out[q].energy, out[q].vector);
    }
    return out;
}

// shift-invert Lanczos around sigma with full reorthogonalization
std::vector<EigenState> windowed_eigensolve(const SparseHamiltonian& h,
                                            const EigensolveOptions& opt) {
    const auto [sigma, half_width] = *opt.window;
    const int n = h.dim();
    Eigen::SparseMatrix<double> shifted = h.matrix();
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("eigensolve: factorization of (H - sigma) failed; "
                                 "sigma may coincide with an eigenvalue");

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss;
    VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = gauss(rng);
    v0.normalize();

    std::vector<VectorXd> V{v0};
    std::vector<double> alpha, beta;
    const double scale = std::max(1.0, std::abs(sigma) + half_width);

    const int mmax = std::min(opt.max_iter, n);
    std::vector<EigenState> out;
    for (int j = 0; j < mmax; ++j) {
        VectorXd w = lu.solve(V[j]);
        alpha.push_back(V[j].dot(w));
        w -= alpha[j] * V[j];
        if (j > 0) w -= beta[j - 1] * V[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : V) w -= v.dot(w) * v;
        const double b = w.norm();
        const int m = j + 1;
        const bool breakdown = b < 1e-13;

        if ((m % opt.block == 0) || m == mmax || breakdown) {
            MatrixXd T = MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);

            out.clear();
            bool below = false, above = false, all_converged = true;
            for (int r = 0; r < m; ++r) {
                const double nu = es.eigenvalues()[r];
                if (std::abs(nu) < 1e-14) continue;
                const double theta = sigma + 1.0 / nu;
                const double ritz_res = breakdown ? 0.0
                    : b * std::abs(es.eigenvectors()(m - 1, r));
                const bool converged = ritz_res < 1e-10 * std::max(1.0, std::abs(nu));
                if (theta < sigma - half_width) { if (converged) below = true; continue; }
                if (theta > sigma + half_width) { if (converged) above = true; continue; }
                if (!converged) { all_converged = false; continue; }
                EigenState st;
                st.energy = theta;
                VectorXd x = VectorXd::Zero(n);
                for (int i = 0; i < m; ++i) x += es.eigenvectors()(i, r) * V[i];
                x.normalize();
                st.vector = x.cast<Complex>();
                fix_phase(st.vector);
                st.residual = residual_of(h, st.energy, st.vector);
                if (st.residual <= opt.tol * scale) out.push_back(std::move(st));
                else all_converged = false;
            }
            const bool covered = below && above;
            if ((all_converged && covered) || breakdown) {
                std::sort(out.begin(), out.end(),
                          [](const auto& a, const auto& c) { return a.energy < c.energy; });
                if (opt.count && static_cast<int>(out.size()) > *opt.count) {
                    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& c) {
                        return std::abs(a.energy - sigma) < std::abs(c.energy - sigma);
                    });
                    out.resize(*opt.count);
                    std::sort(out.begin(), out.end(),
                              [](const auto& a, const auto& c) { return a.energy < c.energy; });
                }
                return out;
            }
        }
        if (breakdown) break;
        beta.push_back(b);
        V.push_back(w / b);
    }
    throw std::runtime_error(
        "eigensolve: window not converged within the iteration budget (m = " +
        std::to_string(mmax) + ", converged " + std::to_string(out.size()) + " states)");
}

} // namespace

std::vector<EigenState> eigensolve(const SparseHamiltonian& h, const EigensolveOptions& opt) {
    if (opt.window) return windowed_eigensolve(h, opt);
    if (h.dim() > opt.dense_limit)
        throw std::invalid_argument(
            "eigensolve: dimension " + std::to_string(h.dim()) +
            " above the dense limit; pass an energy window for the iterative path");
    auto out = dense_eigensolve(h);
    if (opt.count && static_cast<int>(out.size()) > *opt.count) out.resize(*opt.count);
    return out;
}

double atomic_excitation(const TwoExcitationBasis& basis, const VectorXcd& v) {
    double pe = 0.0;
    const int np = basis.photon_pair_count();
    for (int q = 0; q < 6; ++q) pe += 2.0 * std::norm(v[np + q]);
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i < basis.n_sites(); ++i)
            pe += std::norm(v[basis.atom_photon_index(n, i)]);
    return pe;
}

PhotonDistribution photon_distribution(const TwoExcitationBasis& basis, const VectorXcd& v) {
    const int nc = basis.n_sites();
    PhotonDistribution d{VectorXd::Zero(nc), VectorXd::Zero(nc)};
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i < nc; ++i)
            d.one[i] += std::norm(v[basis.atom_photon_index(n, i)]);
    for (int i = 0; i < nc; ++i)
        for (int j = i; j < nc; ++j) {
            const double w = std::norm(v[basis.photon_pair_index(i, j)]);
            if (i == j) d.two[i] += 2.0 * w; // |c_{ii}|^2 = w/2, counted as 4|c_{ii}|^2
            else { d.two[i] += w; d.two[j] += w; }
        }
    return d;
}

MatrixXd two_photon_correlation(const TwoExcitationBasis& basis, const VectorXcd& v) {
    const int nc = basis.n_sites();
    MatrixXd corr = MatrixXd::Zero(nc, nc);
    for (int i = 0; i < nc; ++i)
        for (int j = i; j < nc; ++j) {
            const double w = std::norm(v[basis.photon_pair_index(i, j)]);
            if (i == j) corr(i, i) = 2.0 * w;
            else corr(i, j) = corr(j, i) = w;
        }
    return corr;
}

std::string to_string(BranchLabel l) {
    switch (l) {
        case BranchLabel::Scattering: return "scattering";
        case BranchLabel::SinglePhotonBound: return "single_photon_bound";
        case BranchLabel::DoublonLike: return "doublon_like";
    }
    return "?";
}

std::vector<BranchLabel> classify_branches(const std::vector<EigenState>& states,
                                           const TwoExcitationBasis& basis,
                                           const ModelParams& p, double window_tol) {
    const auto [dlo, dhi] = doublon_band_edges(p);
    const auto [slo, shi] = scattering_band_edges(p);
    std::vector<BranchLabel> labels;
    labels.reserve(states.size());
    for (const auto& st : states) {
        const double e = st.energy;
        if (e >= dlo - window_tol && e <= dhi + window_tol) {
            labels.push_back(BranchLabel::DoublonLike);
        } else if ((e < slo - window_tol || e > shi + window_tol)) {
            const double pe = atomic_excitation(basis, st.vector);
            labels.push_back(pe >= 0.8 && pe <= 1.2 ? BranchLabel::SinglePhotonBound
                                                    : BranchLabel::Scattering);
        } else {
            labels.push_back(BranchLabel::Scattering);
        }
    }
    return labels;
}

double two_photon_localization(const TwoExcitationBasis& basis, const VectorXcd& v,
                               const ModelParams& p, int pad) {
    const auto d = photon_distribution(basis, v);
    const double total = d.two.sum();
    if (total <= 0.0) return 0.0;
    double in = 0.0;
    std::vector<bool> seen(basis.n_sites(), false);
    for (int j = p.site_1 - pad; j <= p.site_2 + pad; ++j) {
        const int s = ring_site(j, basis.n_sites());
        if (!seen[s]) { in += d.two[s]; seen[s] = true; }
    }
    return in / total;
}

BidcResult find_bidc(const std::vector<EigenState>& states,
                     const TwoExcitationBasis& basis, const ModelParams& p,
                     const BidcCriteria& crit) {
    const double two_om = 2.0 * p.omega();
    const auto labels = classify_branches(states, basis, p);

    // dark-state sign from cos(K0 dN), defaulting to +1 off resonance
    double sign = 1.0;
    try {
        const double k0 = resonant_wavevector(p.omega(), p);
        sign = std::cos(k0 * p.delta_sites()) >= 0.0 ? 1.0 : -1.0;
    } catch (const std::domain_error&) {}

    const double g1 = p.g_12, g3 = p.g_34;
    BidcResult res;
    const int i12 = basis.atom_pair_index(0, 1);
    const int i34 = basis.atom_pair_index(2, 3);

    std::vector<size_t> owners; // state index per candidate
    for (size_t q = 0; q < states.size(); ++q) {
        if (labels[q] != BranchLabel::DoublonLike) continue;
        const auto& st = states[q];
        BidcCandidate c;
        c.energy = st.energy;
        c.pe = atomic_excitation(basis, st.vector);
        c.a12 = st.vector[i12];
        c.a34 = st.vector[i34];
        const double denom = std::max({std::abs(c.a12) * g3 * g3,
                                       std::abs(c.a34) * g1 * g1, 1e-300});
        c.antisym = std::abs(g3 * g3 * c.a12 + sign * g1 * g1 * c.a34) / denom;
        c.localization = two_photon_localization(basis, st.vector, p, crit.window_pad);
        c.in_phase_weight = 0.5 * std::norm(c.a12 + c.a34);
        c.passes = c.pe >= crit.pe_min && c.antisym <= crit.antisym_max
                && c.localization >= crit.loc_min;
        res.candidates.push_back(c);
        owners.push_back(q);
    }
    if (res.candidates.empty()) return res;

    auto npass = [&](const BidcCandidate& c) {
        return (c.pe >= crit.pe_min) + (c.antisym <= crit.antisym_max)
             + (c.localization >= crit.loc_min);
    };
    size_t pick = 0;
    for (size_t k = 1; k < res.candidates.size(); ++k) {
        const auto& a = res.candidates[k];
        const auto& b = res.candidates[pick];
        if (a.passes != b.passes) { if (a.passes) pick = k; continue; }
        if (a.passes) { // both pass: smallest |E - 2 Omega|
            if (std::abs(a.energy - two_om) < std::abs(b.energy - two_om)) pick = k;
        } else if (npass(a) > npass(b) ||
                   (npass(a) == npass(b) &&
                    std::abs(a.energy - two_om) < std::abs(b.energy - two_om))) {
            pick = k;
        }
    }
    res.best = res.candidates[pick];
    res.found = res.best.passes;
    res.state = states[owners[pick]];
    return res;
}

// ---- exports ---------------------------------------------------------------

void write_spectrum_csv(const std::string& path, const std::vector<EigenState>& states,
                        const std::vector<BranchLabel>& labels,
                        const TwoExcitationBasis& basis) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
    out.precision(17);
    out << "q,E,P_e,label,alpha_12_re,alpha_12_im,alpha_34_re,alpha_34_im\n";
    const int i12 = basis.atom_pair_index(0, 1);
    const int i34 = basis.atom_pair_index(2, 3);
    for (size_t q = 0; q < states.size(); ++q) {
        const auto& v = states[q].vector;
        out << q << ',' << states[q].energy << ',' << atomic_excitation(basis, v) << ','
            << to_string(labels[q]) << ',' << v[i12].real() << ',' << v[i12].imag() << ','
            << v[i34].real() << ',' << v[i34].imag() << '\n';
    }
}

void write_photon_profile_csv(const std::string& path, const PhotonDistribution& d) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_photon_profile_csv: cannot open " + path);
    out.precision(17);
    out << "site,P_one,P_two\n";
    for (Eigen::Index j = 0; j < d.one.size(); ++j)
        out << j << ',' << d.one[j] << ',' << d.two[j] << '\n';
}

void write_correlation_csv(const std::string& path, const MatrixXd& corr) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_correlation_csv: cannot open " + path);
    out.precision(17);
    out << "i,j,value\n";
    for (Eigen::Index i = 0; i < corr.rows(); ++i)
        for (Eigen::Index j = 0; j < corr.cols(); ++j)
            out << i << ',' << j << ',' << corr(i, j) << '\n';
}

} // namespace bidc
