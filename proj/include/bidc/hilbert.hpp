#ifndef BIDC_HILBERT_HPP
#define BIDC_HILBERT_HPP

#include "bidc/model.hpp"
#include "bidc/types.hpp"

#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace bidc {

/// Index map of the conserved two-excitation sector:
/// photon pairs (i <= j), then the six atom pairs, then atom-photon states.
class TwoExcitationBasis {
public:
    explicit TwoExcitationBasis(int n_sites);

    int n_sites() const { return n_; }
    int dim() const { return n_ * (n_ + 1) / 2 + 6 + 4 * n_; }
    int photon_pair_count() const { return n_ * (n_ + 1) / 2; }

    int photon_pair_index(int i, int j) const; // i <= j
    int atom_pair_index(int n, int m) const;   // 0 <= n < m < 4
    int atom_photon_index(int n, int i) const; // atom n, photon site i

    enum class Block { PhotonPair, AtomPair, AtomPhoton };
    struct Labels {
        Block block;
        int a = 0; // site i / atom n / atom n
        int b = 0; // site j / atom m / site i
    };
    Labels labels(int q) const;

private:
    int n_;
};

// the six ordered atom pairs, index order used by atom_pair_index
inline constexpr std::array<std::pair<int, int>, 6> atom_pairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Real symmetric sparse Hamiltonian on a TwoExcitationBasis, with in-place
/// update of the entries that depend on the couplings g1(t), g3(t).
class SparseHamiltonian {
public:
    using Sparse = Eigen::SparseMatrix<double>;

    const Sparse& matrix() const { return mat_; }
    const TwoExcitationBasis& basis() const { return basis_; }
    const ModelParams& params() const { return params_; }
    int dim() const { return static_cast<int>(mat_.rows()); }
    double coupling_g1() const { return g1_; }
    double coupling_g3() const { return g3_; }

    // rewrite the coupling entries and (under the Stark convention) the
    // atomic diagonal entries for new instantaneous couplings
    void update_couplings(double g1, double g3);

    void apply(const VectorXcd& x, VectorXcd& y) const;

    friend SparseHamiltonian assemble_hamiltonian(const ModelParams&,
                                                  const TwoExcitationBasis&,
                                                  std::optional<std::pair<double, double>>);

private:
    Sparse mat_;
    TwoExcitationBasis basis_{2};
    ModelParams params_;
    double g1_ = 0.0, g3_ = 0.0;

    struct CouplingSlot { double* value; int atom; double factor; };
    struct AtomDiagSlot { double* value; double base; int atom_a; int atom_b; };
    std::vector<CouplingSlot> coupling_slots_;
    std::vector<AtomDiagSlot> atom_diag_slots_;
};

TwoExcitationBasis build_basis(int n_sites);

SparseHamiltonian assemble_hamiltonian(
    const ModelParams& p, const TwoExcitationBasis& basis,
    std::optional<std::pair<double, double>> g_overrides = std::nullopt);

// y = H x with dimension checks
VectorXcd apply_hamiltonian(const SparseHamiltonian& h, const VectorXcd& x);

struct EvolveOptions {
    double dt = 1.0;          // control step; schedule sampled at midpoints
    double krylov_tol = 1e-12;
    int max_krylov = 60;
    int n_samples = 200;      // observer calls, evenly spaced incl. endpoints
};

/// Integrate i d/dt psi = H(t) psi with time-dependent couplings.
/// g_of_t(t) -> {g1, g3}; pass nullptr for constant couplings.
/// The observer is called at the sample times with (t, psi).
void evolve_state(SparseHamiltonian& h, VectorXcd& psi,
                  const std::function<std::pair<double, double>(double)>& g_of_t,
                  double t_final, const EvolveOptions& opt,
                  const std::function<void(double, const VectorXcd&)>& observer);

// ---- state I/O ------------------------------------------------------------

// raw amplitude dump: 16-byte header (8-byte magic, u32 version, u32 dim),
// then dim complex doubles (re, im)
void write_state_binary(const std::string& path, const VectorXcd& psi);
VectorXcd read_state_binary(const std::string& path);

// CSV rows: time, index, real, imag (single snapshot uses time = 0)
void write_state_csv(const std::string& path, const VectorXcd& psi, double time = 0.0);

} // namespace bidc

#endif
