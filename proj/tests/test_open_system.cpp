#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bidc/effective.hpp"
#include "bidc/open_system.hpp"

#include <cmath>
#include <random>

using namespace bidc;

namespace {

ModelParams paper_params() { return ModelParams{}; }

Matrix4cd random_density(unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Matrix4cd a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = Complex(g(rng), g(rng));
    Matrix4cd rho = a * a.adjoint();
    return rho / rho.trace().real();
}

} // namespace

TEST_CASE("decay rates") {
    auto p = paper_params();
    const auto lp = decay_rates(p);
    SUBCASE("equal couplings at dN = 8: collective rate equals the individual one") {
        CHECK(lp.cos_factor == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lp.gamma_c == doctest::Approx(lp.gamma_1).epsilon(1e-12));
        CHECK(lp.gamma_1 == doctest::Approx(lp.gamma_2));
        CHECK(lp.rate_a == lp.gamma_1);
        CHECK(lp.rate_d == lp.gamma_2);
        CHECK(lp.rate_b == lp.rate_c);
    }
    SUBCASE("frozen magnitude at the working point") {
        CHECK(lp.gamma_1 == doctest::Approx(2.095e-4).epsilon(5e-3));
    }
    SUBCASE("separation with cos(K0 dN) = 0 removes the collective term") {
        auto q = p;
        q.site_2 = q.site_1 + 1; // K0 dN = pi/2
        const auto l2 = decay_rates(q);
        CHECK(std::abs(l2.gamma_c) < 1e-12);
    }
    SUBCASE("Cauchy-Schwarz on rates over coupling scans") {
        for (double g1 : {0.03, 0.1, 0.17})
            for (double g3 : {0.05, 0.1, 0.2})
                for (int dn : {1, 5, 8, 10}) {
                    auto q = p;
                    q.site_2 = q.site_1 + dn;
                    const auto l = decay_rates(q, std::pair{g1, g3});
                    CHECK(l.gamma_c * l.gamma_c <= l.gamma_1 * l.gamma_2 * (1.0 + 1e-12));
                }
    }
    SUBCASE("band-edge resonance is an error") {
        auto q = p;
        q.atom_freqs.fill(-3.0); // frame at the band top: v_g(K0) = 0
        CHECK_THROWS_AS(decay_rates(q), std::domain_error);
    }
}

TEST_CASE("rate validated against the reduced-model decay") {
    auto p = paper_params();
    p.g_34 = 0.0; // isolated pair
    const double gamma = decay_rates(p, std::pair{0.1, 0.0}).gamma_1;

    EffectiveModel m(p);
    VectorXcd psi = m.pair_state();
    std::vector<double> ts, logs;
    EffectiveIntegrateOptions opt;
    opt.dt = 1.0;
    opt.n_samples = 40;
    integrate_effective(m, psi, nullptr, 200.0, opt, [&](double t, const VectorXcd& st) {
        if (t >= 20.0) {
            ts.push_back(t);
            logs.push_back(std::log(std::norm(st[0])));
        }
    });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        sx += ts[i]; sy += logs[i]; sxx += ts[i] * ts[i]; sxy += ts[i] * logs[i];
    }
    const double n = static_cast<double>(ts.size());
    const double gamma_fit = -(n * sxy - sx * sy) / (n * sxx - sx * sx) / 2.0;
    CHECK(std::abs(gamma_fit - gamma) / gamma <= 0.10);
}

TEST_CASE("dark and bright states") {
    SUBCASE("equal couplings reduce to the odd/even pair combinations") {
        const auto d = dark_state(0.1, 0.1, +1);
        CHECK(d[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(d[2].real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
    }
    SUBCASE("ratio targets") {
        // g3^2 = 2 g1^2 gives (2 A1 - A2)/sqrt5
        const auto d = dark_state(0.1 / std::sqrt(2.0), 0.1, +1); // g1^2 = g3^2 / 2
        CHECK(d[1].real() == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
        CHECK(d[2].real() == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-12));
    }
    SUBCASE("orthonormality for random couplings") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(0.02, 0.3);
        for (int it = 0; it < 20; ++it) {
            const double g1 = u(rng), g3 = u(rng);
            const int sign = it % 2 ? +1 : -1;
            const auto d = dark_state(g1, g3, sign);
            const auto b = bright_state(g1, g3, sign);
            CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(d.dot(b)) < 1e-12);
        }
    }
    SUBCASE("invalid sign") {
        CHECK_THROWS_AS(dark_state(0.1, 0.1, 0), std::invalid_argument);
    }
}

TEST_CASE("dark state is stationary") {
    auto p = paper_params();
    auto lp = decay_rates(p);
    lp.eta = 0.0;
    lp.t_0 = 0.0;
    const auto d = dark_state(p.g_12, p.g_34, +1);
    Matrix4cd rho = d * d.adjoint();
    const Matrix4cd rho0 = rho;
    LindbladOptions opt;
    opt.n_samples = 50;
    double worst = 0.0;
    lindblad_propagate(rho, lp, 1e5, opt, [&](double, const Matrix4cd& m) {
        worst = std::max(worst, (m - rho0).cwiseAbs().maxCoeff());
    });
    CHECK(worst <= 1e-10);
}

TEST_CASE("bright state decays at 2 gamma-prime") {
    auto p = paper_params();
    auto lp = decay_rates(p);
    lp.eta = 0.0;
    const auto b = bright_state(p.g_12, p.g_34, +1);
    Matrix4cd rho = b * b.adjoint();
    std::vector<double> ts, logs;
    LindbladOptions opt;
    opt.n_samples = 40;
    lindblad_propagate(rho, lp, 2000.0, opt, [&](double t, const Matrix4cd& m) {
        const double pop = std::real((b.adjoint() * m * b)(0));
        if (pop > 1e-12) {
            ts.push_back(t);
            logs.push_back(std::log(pop));
        }
    });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        sx += ts[i]; sy += logs[i]; sxx += ts[i] * ts[i]; sxy += ts[i] * logs[i];
    }
    const double n = static_cast<double>(ts.size());
    const double rate_fit = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(rate_fit == doctest::Approx(2.0 * lp.gamma_prime).epsilon(1e-6));
}

TEST_CASE("general and single-jump generators agree when |cos| = 1") {
    auto p = paper_params();
    auto lp = decay_rates(p);
    lp.eta = 2e-5;
    const Matrix4cd a1 = pair_lowering_1();
    const Matrix4cd h = lp.eta * (a1 + Matrix4cd(a1.adjoint()));
    const auto g4 = master_generator(h, lp);
    const auto g1 = master_generator_single_jump(h, lp);
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
        Matrix4cd rho = random_density(seed);
        const Matrix4cd d4 = apply_generator(g4, rho);
        const Matrix4cd d1 = apply_generator(g1, rho);
        CHECK((d4 - d1).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, d4.cwiseAbs().maxCoeff()));
    }
    SUBCASE("trajectories agree to 1e-9") {
        Matrix4cd ra = random_density(9), rb = ra;
        LindbladOptions oa;
        LindbladOptions ob;
        ob.use_single_jump = true;
        auto lp2 = lp;
        lindblad_propagate(ra, lp2, 5e4, oa, nullptr);
        lindblad_propagate(rb, lp2, 5e4, ob, nullptr);
        CHECK((ra - rb).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("single-jump form rejects |cos| != 1") {
        auto q = p;
        q.site_2 = q.site_1 + 1;
        auto lpq = decay_rates(q);
        CHECK_THROWS_AS(master_generator_single_jump(Matrix4cd::Zero(), lpq),
                        std::invalid_argument);
    }
}

TEST_CASE("trace and positivity along driven trajectories") {
    auto p = paper_params();
    auto lp = decay_rates(p);
    lp.eta = 3e-5;
    lp.t_0 = 7.3e4;
    Matrix4cd rho = Matrix4cd::Zero();
    rho(0, 0) = 1.0;
    LindbladOptions opt;
    opt.n_samples = 200;
    double trace_worst = 0.0, eig_worst = 0.0;
    lindblad_propagate(rho, lp, 2e5, opt, [&](double, const Matrix4cd& m) {
        trace_worst = std::max(trace_worst, trace_error(m));
        eig_worst = std::min(eig_worst, min_eigenvalue(m));
    });
    CHECK(trace_worst <= 1e-10);
    CHECK(eig_worst >= -1e-10);
}

TEST_CASE("fidelity basics") {
    const auto d = dark_state(0.1, 0.1, +1);
    Matrix4cd rho = d * d.adjoint();
    CHECK(fidelity(rho, d) == doctest::Approx(1.0).epsilon(1e-12));
    Matrix4cd ground = Matrix4cd::Zero();
    ground(0, 0) = 1.0;
    CHECK(fidelity(ground, d) == doctest::Approx(0.0));
}

TEST_CASE("weak drive keeps the doubly excited state empty") {
    auto p = paper_params();
    auto lp = decay_rates(p);
    lp.eta = 3e-5;
    lp.t_0 = 7.3e4;
    Matrix4cd rho = Matrix4cd::Zero();
    rho(0, 0) = 1.0;
    LindbladOptions opt;
    opt.n_samples = 100;
    double max_eeee = 0.0;
    lindblad_propagate(rho, lp, 1.5e5, opt, [&](double, const Matrix4cd& m) {
        max_eeee = std::max(max_eeee, m(3, 3).real());
    });
    CHECK(max_eeee < 5e-3);
}
