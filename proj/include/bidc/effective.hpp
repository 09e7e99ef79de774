#ifndef BIDC_EFFECTIVE_HPP
#define BIDC_EFFECTIVE_HPP

#include "bidc/model.hpp"
#include "bidc/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bidc {

// single-photon lattice Green's function J e^{-a|n|} / sqrt(Omega^2 - 4J^2)
// evaluated at the frame frequency; throws when |Omega| <= 2J
double greens_function(int n, const ModelParams& p);
double greens_decay_exponent(const ModelParams& p);

// independent route: (1/2pi) Int dk e^{ikn} / (omega_k - Omega) on a uniform grid
double greens_function_quadrature(int n, const ModelParams& p, int n_grid = 10000);

// Omega_i + g_i^2 / sqrt(Omega^2 - 4J^2): the compensation that keeps a
// type-II pair resonant with the doublon band
std::array<double, 4> stark_shifted_frequencies(const ModelParams& p);

// the frequency of the frame in which the dressed pair transitions sit at
// zero detuning: (dressed pair energies)/4 averaged over the two pairs;
// equals the configured Omega under the Stark convention
double effective_frame_frequency(const ModelParams& p);

// pair-doublon coupling f_K(r): discrete k-sum of
// (2 sqrt2 J / Nc) L_{k,K} cos[(k - K/2) r] / (omega_k - Omega_frame)
double pair_doublon_coupling(double K, int r, const ModelParams& p);

// fill the f_K(0) / f_K(dN) columns of a mode table
void attach_couplings(DoublonModeTable& table, const ModelParams& p);

/// Reduced pair + doublon-band model (single-photon amplitudes eliminated).
/// State layout: [Ce_12, Ce_34, C_K for K on the grid].
class EffectiveModel {
public:
    explicit EffectiveModel(const ModelParams& p);

    int dim() const { return 2 + nc_; }
    int n_modes() const { return nc_; }
    double omega_frame() const { return omega_frame_; }
    double resonant_k() const { return k0_; }
    const ModelParams& params() const { return params_; }
    const VectorXd& mode_momenta() const { return Ks_; }
    const VectorXd& mode_energies() const { return Es_; }
    const VectorXd& mode_couplings() const { return fs_; }

    void set_couplings(double g1, double g3);
    double coupling_g1() const { return g1_; }
    double coupling_g3() const { return g3_; }

    // y = H_eff x in the frame rotating at 2*omega_frame
    void apply(const VectorXcd& x, VectorXcd& y) const;

    // initial |eegg> amplitude vector scaled by c_e
    VectorXcd pair_state(Complex c_e = 1.0) const;

private:
    ModelParams params_;
    int nc_;
    double omega_frame_ = 0.0, k0_ = 0.0;
    double g1_ = 0.0, g3_ = 0.0;
    double d1_ = 0.0, d3_ = 0.0; // pair detunings from the frame (0 when compensated)
    VectorXd Ks_, Es_, fs_, deltaK_;
    VectorXcd w1_, w2_; // e^{i K N1}, e^{i K N2}
};

struct EffectiveIntegrateOptions {
    double dt = 2.0;
    double krylov_tol = 1e-12;
    int max_krylov = 40;
    int n_samples = 200;
};

/// Integrate the reduced dynamics with time-dependent couplings; the
/// observer receives (t, state) at evenly spaced sample times.
void integrate_effective(EffectiveModel& m, VectorXcd& psi,
                         const std::function<std::pair<double, double>(double)>& g_of_t,
                         double t_final, const EffectiveIntegrateOptions& opt,
                         const std::function<void(double, const VectorXcd&)>& observer);

// ---- bound-state condition and profile -------------------------------------

struct BidcRoot {
    bool found = false;
    double energy = 0.0;        // absolute energy of the root
    double frame_offset = 0.0;  // energy - 2*omega_frame
    double residual = 0.0;      // value of the condition at the root
    Complex ratio;              // alpha_2 / alpha_1
    VectorXcd mode_amplitudes;  // C_K / alpha_1 on the grid
    double k0 = 0.0;
    double omega_frame = 0.0;
};

/// Root of the discrete eigenvalue condition nearest 2*Omega; grid terms
/// whose denominator vanishes are excluded (their numerators vanish at the
/// dark points when K0*dN is a multiple of pi).
BidcRoot solve_bidc_condition(const ModelParams& p,
                              std::optional<std::pair<double, double>> g_overrides = std::nullopt);

struct BidcProfile {
    VectorXd p_two;        // per-site two-photon occupancy of the normalized state
    double photon_weight = 0.0; // total biphoton weight after normalization
    double alpha1 = 0.0;        // |alpha_1| after normalization
};

BidcProfile bidc_real_space_profile(const ModelParams& p, const BidcRoot& root,
                                    int r_max = 12);

// normalized state vector [alpha1, alpha2, C_K...] of the root, for overlaps
VectorXcd bidc_effective_state(const BidcRoot& root);

// ---- exports ----------------------------------------------------------------

void write_coupling_table_csv(const std::string& path, const ModelParams& p);
void write_greens_table_csv(const std::string& path, const ModelParams& p, int n_max);

} // namespace bidc

#endif
