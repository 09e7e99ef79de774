#include "bidc/open_system.hpp"

#include "bidc/effective.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bidc {

Matrix4cd pair_lowering_1() {
    Matrix4cd a = Matrix4cd::Zero();
    a(0, 1) = 1.0; // A1^+|G> -> |G>
    a(2, 3) = 1.0; // A1^+A2^+|G> -> A2^+|G>
    return a;
}

Matrix4cd pair_lowering_2() {
    Matrix4cd a = Matrix4cd::Zero();
    a(0, 2) = 1.0;
    a(1, 3) = 1.0;
    return a;
}

LindbladParams decay_rates(const ModelParams& p,
                           std::optional<std::pair<double, double>> g_overrides) {
    ModelParams q = p;
    if (g_overrides) {
        q.g_12 = g_overrides->first;
        q.g_34 = g_overrides->second;
    }
    q.validate();
    const double k0 = resonant_wavevector(effective_frame_frequency(q), q);
    const double vg = group_velocity(k0, q);
    if (std::abs(vg) < 1e-9)
        throw std::domain_error("decay_rates: resonance at a band edge (v_g = 0)");
    const double f = pair_doublon_coupling(k0, 0, q);
    const double J2 = q.hopping * q.hopping;
    const double g1 = q.g_12, g3 = q.g_34;
    LindbladParams lp;
    lp.k0 = k0;
    lp.cos_factor = std::cos(k0 * q.delta_sites());
    lp.gamma_1 = std::pow(g1, 4) * f * f / (J2 * vg);
    lp.gamma_2 = std::pow(g3, 4) * f * f / (J2 * vg);
    lp.gamma_c = g1 * g1 * g3 * g3 * f * f * lp.cos_factor / (J2 * vg);
    lp.gamma_prime = lp.gamma_1 + lp.gamma_2;
    lp.rate_a = lp.gamma_1;
    lp.rate_d = lp.gamma_2;
    lp.rate_b = lp.rate_c = lp.gamma_c;
    return lp;
}

namespace {

int checked_sign(int sign) {
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("dark/bright state: sign must be +1 or -1");
    return sign;
}

} // namespace

Vector4cd dark_state(double g1, double g3, int sign) {
    checked_sign(sign);
    if (g1 == 0.0 && g3 == 0.0)
        throw std::invalid_argument("dark_state: g1 = g3 = 0");
    const double n = std::sqrt(std::pow(g1, 4) + std::pow(g3, 4));
    Vector4cd d = Vector4cd::Zero();
    d[1] = g3 * g3 / n;
    d[2] = -sign * g1 * g1 / n;
    return d;
}

Vector4cd bright_state(double g1, double g3, int sign) {
    checked_sign(sign);
    if (g1 == 0.0 && g3 == 0.0)
        throw std::invalid_argument("bright_state: g1 = g3 = 0");
    const double n = std::sqrt(std::pow(g1, 4) + std::pow(g3, 4));
    Vector4cd b = Vector4cd::Zero();
    b[1] = g1 * g1 / n;
    b[2] = sign * g3 * g3 / n;
    return b;
}

namespace {

// vec(A rho B) = (B^T kron A) vec(rho), column-major stacking
Matrix16cd superop(const Matrix4cd& a, const Matrix4cd& b) {
    Matrix16cd s = Matrix16cd::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            s.block<4, 4>(4 * i, 4 * j) = b(j, i) * a;
    return s;
}

// rate * (2 O2 rho O1 - rho O1 O2 - O1 O2 rho)
Matrix16cd dissipator(const Matrix4cd& o1, const Matrix4cd& o2, double rate) {
    const Matrix4cd id = Matrix4cd::Identity();
    const Matrix4cd o12 = o1 * o2;
    return rate * (2.0 * superop(o2, o1) - superop(id, o12) - superop(o12, id));
}

} // namespace

Matrix16cd master_generator(const Matrix4cd& hamiltonian, const LindbladParams& lp) {
    const Matrix4cd id = Matrix4cd::Identity();
    const Matrix4cd a1 = pair_lowering_1(), a2 = pair_lowering_2();
    const Matrix4cd a1d = a1.adjoint(), a2d = a2.adjoint();
    Matrix16cd gen = Complex(0, -1) * (superop(hamiltonian, id) - superop(id, hamiltonian));
    gen += dissipator(a1d, a1, lp.gamma_1);
    gen += dissipator(a2d, a2, lp.gamma_2);
    gen += dissipator(a1d, a2, lp.gamma_c);
    gen += dissipator(a2d, a1, lp.gamma_c);
    return gen;
}

Matrix16cd master_generator_single_jump(const Matrix4cd& hamiltonian, const LindbladParams& lp) {
    if (std::abs(std::abs(lp.cos_factor) - 1.0) > 1e-9)
        throw std::invalid_argument("master_generator_single_jump: needs |cos[K0 dN]| = 1");
    const int sign = lp.cos_factor >= 0.0 ? 1 : -1;
    const double g1sq = std::sqrt(lp.gamma_1); // g1^2 f/(J sqrt(vg)) up to common scale
    const double g3sq = std::sqrt(lp.gamma_2);
    const double n = std::sqrt(g1sq * g1sq + g3sq * g3sq);
    const Matrix4cd k = (g1sq * pair_lowering_1()
                         + static_cast<double>(sign) * g3sq * pair_lowering_2()) / n;
    const Matrix4cd id = Matrix4cd::Identity();
    Matrix16cd gen = Complex(0, -1) * (superop(hamiltonian, id) - superop(id, hamiltonian));
    gen += dissipator(k.adjoint(), k, lp.gamma_prime);
    return gen;
}

Matrix4cd apply_generator(const Matrix16cd& gen, const Matrix4cd& rho) {
    Eigen::Matrix<Complex, 16, 1> v;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) v[4 * j + i] = rho(i, j);
    v = gen * v;
    Matrix4cd out;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) out(i, j) = v[4 * j + i];
    return out;
}

namespace {

Matrix4cd step(const Matrix16cd& propagator, const Matrix4cd& rho) {
    Eigen::Matrix<Complex, 16, 1> v;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) v[4 * j + i] = rho(i, j);
    v = propagator * v;
    Matrix4cd out;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) out(i, j) = v[4 * j + i];
    return out;
}

} // namespace

void lindblad_propagate(Matrix4cd& rho, const LindbladParams& lp, double t_final,
                        const LindbladOptions& opt,
                        const std::function<void(double, const Matrix4cd&)>& observer) {
    const Matrix4cd a1 = pair_lowering_1();
    const Matrix4cd h_drive = lp.eta * (a1 + Matrix4cd(a1.adjoint()));
    auto gen_of = [&](const Matrix4cd& h) {
        return opt.use_single_jump ? master_generator_single_jump(h, lp)
                                   : master_generator(h, lp);
    };
    const Matrix16cd gen_driven = gen_of(h_drive);
    const Matrix16cd gen_free = gen_of(Matrix4cd::Zero());

    const int ns = std::max(1, opt.n_samples);
    const double dt = t_final / ns;
    const Matrix16cd prop_driven = (gen_driven * dt).exp();
    const Matrix16cd prop_free = (gen_free * dt).exp();

    if (observer) observer(0.0, rho);
    for (int s = 1; s <= ns; ++s) {
        const double t_prev = (s - 1) * dt, t_next = s * dt;
        if (t_next <= lp.t_0) {
            rho = step(prop_driven, rho);
        } else if (t_prev >= lp.t_0) {
            rho = step(prop_free, rho);
        } else { // cutoff inside this step: exact breakpoint
            rho = step((gen_driven * (lp.t_0 - t_prev)).exp(), rho);
            rho = step((gen_free * (t_next - lp.t_0)).exp(), rho);
        }
        if (observer) observer(t_next, rho);
    }
}

void lindblad_propagate_schedule(Matrix4cd& rho, const ModelParams& p,
                                 const std::function<std::pair<double, double>(double)>& g_of_t,
                                 double t_final, int n_steps, int n_samples,
                                 const std::function<void(double, const Matrix4cd&)>& observer) {
    const double dt = t_final / n_steps;
    const int every = std::max(1, n_steps / std::max(1, n_samples));
    if (observer) observer(0.0, rho);
    for (int s = 0; s < n_steps; ++s) {
        auto [g1, g3] = g_of_t((s + 0.5) * dt);
        const auto lp = decay_rates(p, std::pair{g1, g3});
        const Matrix16cd prop = (master_generator(Matrix4cd::Zero(), lp) * dt).exp();
        rho = step(prop, rho);
        if ((s + 1) % every == 0 || s + 1 == n_steps)
            if (observer) observer((s + 1) * dt, rho);
    }
}

double fidelity(const Matrix4cd& rho, const Vector4cd& target) {
    return (target.adjoint() * rho * target)(0).real();
}

double trace_error(const Matrix4cd& rho) { return std::abs(rho.trace().real() - 1.0); }

double min_eigenvalue(const Matrix4cd& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho);
    return es.eigenvalues().minCoeff();
}

void write_rates_json(const std::string& path, const LindbladParams& lp) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_rates_json: cannot open " + path);
    out.precision(17);
    out << "{\n"
        << "  \"gamma_1\": " << lp.gamma_1 << ",\n"
        << "  \"gamma_2\": " << lp.gamma_2 << ",\n"
        << "  \"gamma_c\": " << lp.gamma_c << ",\n"
        << "  \"gamma_prime\": " << lp.gamma_prime << ",\n"
        << "  \"A\": " << lp.rate_a << ",\n"
        << "  \"B\": " << lp.rate_b << ",\n"
        << "  \"C\": " << lp.rate_c << ",\n"
        << "  \"D\": " << lp.rate_d << ",\n"
        << "  \"K0\": " << lp.k0 << ",\n"
        << "  \"cos_factor\": " << lp.cos_factor << "\n"
        << "}\n";
}

} // namespace bidc
