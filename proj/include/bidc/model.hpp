#ifndef BIDC_MODEL_HPP
#define BIDC_MODEL_HPP

#include "bidc/types.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace bidc {

// How the configured atomic frequencies enter the Hamiltonian.
//   Bare  : omega_i are used literally.
//   Stark : omega_i are the bare frame frequencies; the Hamiltonian gets
//           omega_i + g_i^2/sqrt(Omega^2 - 4J^2), compensating the
//           single-photon Stark shift so a type-II pair stays resonant
//           with the doublon band at 2*Omega.
enum class FreqConvention { Bare, Stark };

std::string to_string(FreqConvention c);
FreqConvention convention_from_string(const std::string& s);

/// Physical parameters of the four-atom / interacting-waveguide system.
/// Energies are in units of the hopping J, times in 1/J.
struct ModelParams {
    int n_sites = 148;
    double hopping = 1.0;     // J
    double interaction = 6.0; // on-site U (>= 0)
    double cavity_freq = 0.0; // omega_c
    int site_1 = 0;           // N1, atoms 0 and 1
    int site_2 = 8;           // N2, atoms 2 and 3
    std::array<double, 4> atom_freqs{};
    double g_12 = 0.1;        // coupling of atoms 0,1
    double g_34 = 0.1;        // coupling of atoms 2,3
    FreqConvention convention = FreqConvention::Stark;

    ModelParams() { set_default_atom_freqs(); }

    int delta_sites() const { return site_2 - site_1; }
    double omega() const; // mean configured atomic frequency
    std::array<double, 4> couplings() const { return {g_12, g_12, g_34, g_34}; }
    std::array<int, 4> atom_sites() const { return {site_1, site_1, site_2, site_2}; }

    // frequencies that actually enter the Hamiltonian, for the given
    // couplings (defaults to the configured ones; schedules pass g(t))
    std::array<double, 4> hamiltonian_freqs() const;
    std::array<double, 4> hamiltonian_freqs(double g1, double g3) const;

    // set all four omega_i to E_{pi/2}/2 for the current U, J, omega_c
    void set_default_atom_freqs();

    void validate() const; // throws std::invalid_argument on hard violations
    std::vector<std::string> regime_warnings() const;
};

// flat key=value serialization (keys: n_sites, hopping, interaction,
// cavity_freq, site_1, site_2, omega_1..omega_4, g_12, g_34)
ModelParams params_from_config_text(const std::string& text);
std::string params_to_config_text(const ModelParams& p);

// ---- closed-form band structure -----------------------------------------

// single photon: omega_c - 2J cos k
double single_photon_dispersion(double k, const ModelParams& p);

// doublon band: 2 omega_c - sqrt(U^2 + 16 J^2 cos^2(K/2))
double doublon_dispersion(double K, const ModelParams& p);

// inverse localization length asinh(U / (4J cos(K/2))); throws for U = 0
double doublon_localization(double K, const ModelParams& p);

// relative wavefunction sqrt(tanh(x)) exp(-|r|x), minimal-image |r|
double doublon_wavefunction(double K, int r, const ModelParams& p);

// group velocity d E_K / dK
double group_velocity(double K, const ModelParams& p);

// positive K0 solving E_{K0} = 2*omega; throws if 2*omega is out of band
double resonant_wavevector(double omega, const ModelParams& p);

// {band bottom, band top} = {2wc - sqrt(U^2+16J^2), 2wc - U}
std::pair<double, double> doublon_band_edges(const ModelParams& p);

// two-photon scattering band edges {2wc - 4J, 2wc + 4J}
std::pair<double, double> scattering_band_edges(const ModelParams& p);

// single-photon Stark shift g^2 / sqrt(Omega^2 - 4 J^2) of one atom
double stark_shift(double g, const ModelParams& p);

// K = 2 pi m / N_c, m = 0..N_c-1, mapped to (-pi, pi], ascending order
std::vector<double> momentum_grid(int n_sites);

// ---- per-mode table -------------------------------------------------------

struct DoublonMode {
    double K = 0.0;
    double energy = 0.0;
    double lambda_inv = 0.0; // inverse localization length
    double u_ratio = 0.0;    // U / (4J cos(K/2))
    double v_group = 0.0;
    double f_onsite = 0.0;   // f_K(0), filled by effective::attach_couplings
    double f_split = 0.0;    // f_K(dN)
    double detuning = 0.0;   // E_K - 2*Omega
};

struct DoublonModeTable {
    std::vector<DoublonMode> modes; // ascending in K
    const DoublonMode& nearest(double K) const;
};

DoublonModeTable build_mode_table(const ModelParams& p);

} // namespace bidc

#endif
