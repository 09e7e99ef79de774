#ifndef BIDC_SPECTRAL_HPP
#define BIDC_SPECTRAL_HPP

#include "bidc/hilbert.hpp"
#include "bidc/model.hpp"
#include "bidc/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bidc {

struct EigenState {
    double energy = 0.0;
    VectorXcd vector;   // unit norm, largest-|amplitude| entry real positive
    double residual = 0.0; // ||H v - E v||
};

struct EigensolveOptions {
    // energy window {center, half_width}; absent -> full dense spectrum
    std::optional<std::pair<double, double>> window;
    std::optional<int> count;  // cap on returned states (nearest to center first)
    int dense_limit = 6000;    // dense path allowed up to this dimension
    double tol = 1e-9;         // Ritz convergence, relative to energy scale
    int max_iter = 500;
    int block = 24;            // Lanczos steps between convergence checks
    unsigned seed = 0x5eed;    // start-vector seed (fixed: deterministic runs)
};

/// Dense full diagonalization or windowed shift-invert Lanczos, both
/// returning eigenpairs sorted by energy with explicit residuals.
std::vector<EigenState> eigensolve(const SparseHamiltonian& h,
                                   const EigensolveOptions& opt = {});

// total atomic excitation sum_i <sigma_i^+ sigma_i^->
double atomic_excitation(const TwoExcitationBasis& basis, const VectorXcd& v);

struct PhotonDistribution {
    VectorXd one; // P_one(j) = sum_n |d_{n,j}|^2
    VectorXd two; // P_two(j) = sum_{m != j} |c_{j,m}|^2 + 4 |c_{j,j}|^2
};
PhotonDistribution photon_distribution(const TwoExcitationBasis& basis, const VectorXcd& v);

// <a_i^+ a_j^+ a_i a_j>; the diagonal carries the on-site pair weight
MatrixXd two_photon_correlation(const TwoExcitationBasis& basis, const VectorXcd& v);

enum class BranchLabel { Scattering, SinglePhotonBound, DoublonLike };
std::string to_string(BranchLabel l);

std::vector<BranchLabel> classify_branches(const std::vector<EigenState>& states,
                                           const TwoExcitationBasis& basis,
                                           const ModelParams& p,
                                           double window_tol = 1e-6);

struct BidcCriteria {
    double pe_min = 1.5;
    double antisym_max = 0.05;
    double loc_min = 0.9;
    int window_pad = 5; // localization window [N1 - pad, N2 + pad]
};

struct BidcCandidate {
    double energy = 0.0;
    double pe = 0.0;
    double antisym = 0.0;      // dark-ratio mismatch, 0 for a perfect dark state
    double localization = 0.0; // two-photon weight fraction in the site window
    Complex a12{}, a34{};
    double in_phase_weight = 0.0; // |a12 + a34|^2 / 2
    bool passes = false;
};

struct BidcResult {
    bool found = false;
    EigenState state;            // valid when found
    BidcCandidate best;          // the selected (or best-scoring) candidate
    std::vector<BidcCandidate> candidates; // all doublon-branch candidates
};

/// Select the bound state in the doublon continuum among doublon-branch
/// eigenstates: high atomic excitation, dark pair-amplitude ratio, and
/// localized two-photon weight. Deterministic; ties broken by |E - 2 Omega|.
BidcResult find_bidc(const std::vector<EigenState>& states,
                     const TwoExcitationBasis& basis, const ModelParams& p,
                     const BidcCriteria& crit = {});

// fraction of total P_two within [site_1 - pad, site_2 + pad] on the ring
double two_photon_localization(const TwoExcitationBasis& basis, const VectorXcd& v,
                               const ModelParams& p, int pad = 5);

// ---- exports ---------------------------------------------------------------

void write_spectrum_csv(const std::string& path, const std::vector<EigenState>& states,
                        const std::vector<BranchLabel>& labels,
                        const TwoExcitationBasis& basis);
void write_photon_profile_csv(const std::string& path, const PhotonDistribution& d);
void write_correlation_csv(const std::string& path, const MatrixXd& corr);

} // namespace bidc

#endif
