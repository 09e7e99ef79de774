#ifndef BIDC_OPEN_SYSTEM_HPP
#define BIDC_OPEN_SYSTEM_HPP

#include "bidc/model.hpp"
#include "bidc/types.hpp"

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

namespace bidc {

using Matrix4cd = Eigen::Matrix4cd;
using Vector4cd = Eigen::Vector4cd;
using Matrix16cd = Eigen::Matrix<Complex, 16, 16>;

// closed atomic subspace, ordered {|G>, A1^+|G>, A2^+|G>, A1^+A2^+|G>}
Matrix4cd pair_lowering_1(); // A1 = sigma_1^- sigma_2^-
Matrix4cd pair_lowering_2(); // A2 = sigma_3^- sigma_4^-

struct LindbladParams {
    double gamma_1 = 0.0;     // individual rate, pair at N1
    double gamma_2 = 0.0;     // individual rate, pair at N2
    double gamma_c = 0.0;     // collective rate (signed by cos[K0 dN])
    double gamma_prime = 0.0; // gamma_1 + gamma_2
    double rate_a = 0.0, rate_b = 0.0, rate_c = 0.0, rate_d = 0.0; // raw integrals
    double k0 = 0.0;
    double cos_factor = 1.0;  // cos[K0 (N2 - N1)]
    double eta = 0.0;         // drive strength
    double t_0 = 0.0;         // drive cutoff
};

/// Markovian rates from the resonant doublon mode; throws when the
/// resonance sits at a band edge (vanishing group velocity).
LindbladParams decay_rates(const ModelParams& p,
                           std::optional<std::pair<double, double>> g_overrides = std::nullopt);

// sign must be +1 or -1 (the value of cos[K0 dN] in the |cos| = 1 case)
Vector4cd dark_state(double g1, double g3, int sign);
Vector4cd bright_state(double g1, double g3, int sign);

// generator of the four-term master equation (general collective form)
Matrix16cd master_generator(const Matrix4cd& hamiltonian, const LindbladParams& lp);

// single-jump form, valid when |cos[K0 dN]| = 1
Matrix16cd master_generator_single_jump(const Matrix4cd& hamiltonian, const LindbladParams& lp);

Matrix4cd apply_generator(const Matrix16cd& gen, const Matrix4cd& rho);

struct LindbladOptions {
    int n_samples = 400;
    bool use_single_jump = false; // require |cos| = 1
};

/// Propagate under the master equation with the resonant pair drive
/// H1 = eta * Theta(t0 - t) (A1 + A1^+); the cutoff is an exact breakpoint.
void lindblad_propagate(Matrix4cd& rho, const LindbladParams& lp, double t_final,
                        const LindbladOptions& opt,
                        const std::function<void(double, const Matrix4cd&)>& observer);

/// Variant with time-dependent couplings: rates are recomputed from the
/// instantaneous g1(t), g3(t) at every step midpoint (no drive).
void lindblad_propagate_schedule(Matrix4cd& rho, const ModelParams& p,
                                 const std::function<std::pair<double, double>(double)>& g_of_t,
                                 double t_final, int n_steps, int n_samples,
                                 const std::function<void(double, const Matrix4cd&)>& observer);

double fidelity(const Matrix4cd& rho, const Vector4cd& target);

double trace_error(const Matrix4cd& rho);
double min_eigenvalue(const Matrix4cd& rho);

void write_rates_json(const std::string& path, const LindbladParams& lp);

} // namespace bidc

#endif
