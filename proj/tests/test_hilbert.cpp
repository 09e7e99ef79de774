#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bidc/hilbert.hpp"
#include "support/oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <random>

using namespace bidc;

namespace {

ModelParams small_params(int nc) {
    ModelParams p;
    p.n_sites = nc;
    p.site_1 = 0;
    p.site_2 = std::min(8, nc - 1);
    return p;
}

VectorXcd random_state(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Complex(g(rng), g(rng));
    v.normalize();
    return v;
}

} // namespace

TEST_CASE("basis dimensions") {
    CHECK(build_basis(148).dim() == 11624); // 11026 + 6 + 592
    CHECK(build_basis(2).dim() == 17);      // 3 + 6 + 8
    CHECK_THROWS_AS(build_basis(1), std::invalid_argument);
}

TEST_CASE("basis index maps are inverse bijections") {
    const auto basis = build_basis(11);
    std::vector<int> hit(basis.dim(), 0);
    for (int i = 0; i < 11; ++i)
        for (int j = i; j < 11; ++j) {
            const int q = basis.photon_pair_index(i, j);
            const auto l = basis.labels(q);
            CHECK(l.block == TwoExcitationBasis::Block::PhotonPair);
            CHECK(l.a == i);
            CHECK(l.b == j);
            ++hit[q];
        }
    for (const auto& [n, m] : atom_pairs) {
        const int q = basis.atom_pair_index(n, m);
        const auto l = basis.labels(q);
        CHECK(l.block == TwoExcitationBasis::Block::AtomPair);
        CHECK(l.a == n);
        CHECK(l.b == m);
        ++hit[q];
    }
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i < 11; ++i) {
            const int q = basis.atom_photon_index(n, i);
            const auto l = basis.labels(q);
            CHECK(l.block == TwoExcitationBasis::Block::AtomPhoton);
            CHECK(l.a == n);
            CHECK(l.b == i);
            ++hit[q];
        }
    for (int q = 0; q < basis.dim(); ++q) CHECK(hit[q] == 1);
}

TEST_CASE("hamiltonian is exactly symmetric") {
    auto p = small_params(10);
    const auto basis = build_basis(10);
    auto h = assemble_hamiltonian(p, basis);
    const Eigen::SparseMatrix<double> diff =
        Eigen::SparseMatrix<double>(h.matrix().transpose()) - h.matrix();
    CHECK(Eigen::Map<const VectorXd>(diff.valuePtr(), diff.nonZeros()).cwiseAbs().maxCoeff()
          == 0.0);
}

TEST_CASE("free two-photon spectrum matches momentum pairs") {
    auto p = small_params(8);
    p.interaction = 0.0;
    p.g_12 = p.g_34 = 0.0;
    p.convention = FreqConvention::Bare;
    const auto basis = build_basis(8);
    auto h = assemble_hamiltonian(p, basis);
    // photon-pair block decouples at g = 0
    MatrixXd block = MatrixXd(h.matrix()).topLeftCorner(basis.photon_pair_count(),
                                                        basis.photon_pair_count());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
    const auto expected = oracles::free_pair_energies(8);
    REQUIRE(static_cast<int>(expected.size()) == basis.photon_pair_count());
    for (int q = 0; q < basis.photon_pair_count(); ++q)
        CHECK(es.eigenvalues()[q] == doctest::Approx(expected[q]).epsilon(1e-10));
}

TEST_CASE("interacting block reproduces the doublon branch") {
    auto p = small_params(12);
    p.g_12 = p.g_34 = 0.0;
    p.convention = FreqConvention::Bare;
    const auto basis = build_basis(12);
    auto h = assemble_hamiltonian(p, basis);
    MatrixXd block = MatrixXd(h.matrix()).topLeftCorner(basis.photon_pair_count(),
                                                        basis.photon_pair_count());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
    std::vector<double> below;
    for (int q = 0; q < es.eigenvalues().size(); ++q)
        if (es.eigenvalues()[q] < -4.0 - 1e-9) below.push_back(es.eigenvalues()[q]);
    CHECK(below.size() == 12); // exactly N_c doublon states under the band
    std::vector<double> closed;
    for (double k : momentum_grid(12)) closed.push_back(doublon_dispersion(k, p));
    std::sort(closed.begin(), closed.end());
    for (int q = 0; q < 12; ++q)
        CHECK(below[q] == doctest::Approx(closed[q]).epsilon(2e-5)); // ring wraparound
}

TEST_CASE("two-site ring with bosonic factors by hand") {
    // U = 0, g = 0, N_c = 2: photon block is 3x3 with hopping -2J sqrt2 and
    // eigenvalues {-4J, 0, 4J} (the ring bond is doubly counted)
    auto p = small_params(2);
    p.interaction = 0.0;
    p.g_12 = p.g_34 = 0.0;
    p.site_2 = 1;
    p.convention = FreqConvention::Bare;
    const auto basis = build_basis(2);
    auto h = assemble_hamiltonian(p, basis);
    MatrixXd block = MatrixXd(h.matrix()).topLeftCorner(3, 3);
    const double s = -2.0 * std::numbers::sqrt2_v<double>;
    CHECK(block(0, 1) == doctest::Approx(s));
    CHECK(block(1, 0) == doctest::Approx(s));
    CHECK(block(1, 2) == doctest::Approx(s));
    CHECK(block(0, 2) == doctest::Approx(0.0));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
    CHECK(es.eigenvalues()[0] == doctest::Approx(-4.0));
    CHECK(es.eigenvalues()[1] == doctest::Approx(0.0));
    CHECK(es.eigenvalues()[2] == doctest::Approx(4.0));
}

TEST_CASE("apply hamiltonian basics") {
    auto p = small_params(10);
    const auto basis = build_basis(10);
    auto h = assemble_hamiltonian(p, basis);
    SUBCASE("zero maps to zero") {
        const VectorXcd x = VectorXcd::Zero(h.dim());
        CHECK(apply_hamiltonian(h, x).norm() == 0.0);
    }
    SUBCASE("expectation values are real") {
        for (unsigned seed : {1u, 2u, 3u}) {
            const auto x = random_state(h.dim(), seed);
            const Complex e = x.dot(apply_hamiltonian(h, x));
            CHECK(std::abs(e.imag()) < 1e-14);
        }
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(apply_hamiltonian(h, VectorXcd::Zero(3)), std::invalid_argument);
    }
}

TEST_CASE("coupling update matches reassembly") {
    auto p = small_params(10);
    const auto basis = build_basis(10);
    auto h = assemble_hamiltonian(p, basis);
    h.update_couplings(0.17, 0.04);
    auto h2 = assemble_hamiltonian(p, basis, std::pair{0.17, 0.04});
    const Eigen::SparseMatrix<double> diff = h.matrix() - h2.matrix();
    CHECK(Eigen::Map<const VectorXd>(diff.valuePtr(), diff.nonZeros()).cwiseAbs().maxCoeff()
          < 1e-15);
}

TEST_CASE("evolution: stationary eigenvector") {
    auto p = small_params(8);
    const auto basis = build_basis(8);
    auto h = assemble_hamiltonian(p, basis);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es{MatrixXd(h.matrix())};
    const int q = h.dim() / 3;
    VectorXcd psi = es.eigenvectors().col(q).cast<Complex>();
    const VectorXcd psi0 = psi;
    EvolveOptions opt;
    opt.dt = 5.0;
    opt.n_samples = 10;
    double worst = 0.0;
    evolve_state(h, psi, nullptr, 1000.0, opt, [&](double, const VectorXcd& st) {
        worst = std::max(worst, std::abs(std::abs(psi0.dot(st)) - 1.0));
        worst = std::max(worst, std::abs(st.norm() - 1.0));
    });
    CHECK(worst < 1e-8);
}

TEST_CASE("evolution: decoupled atoms stay put") {
    auto p = small_params(8);
    p.g_12 = p.g_34 = 0.0;
    const auto basis = build_basis(8);
    auto h = assemble_hamiltonian(p, basis);
    VectorXcd psi = VectorXcd::Zero(h.dim());
    psi[basis.atom_pair_index(0, 1)] = 1.0;
    EvolveOptions opt;
    opt.n_samples = 5;
    evolve_state(h, psi, nullptr, 200.0, opt, nullptr);
    CHECK(std::abs(psi[basis.atom_pair_index(0, 1)]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("evolution: linearity and norm conservation with a schedule") {
    auto p = small_params(10);
    const auto basis = build_basis(10);
    auto g_of_t = [](double t) {
        return std::pair{0.05 + 1e-4 * t, 0.2 - 1e-4 * t};
    };
    const auto x = random_state(build_basis(10).dim(), 7);
    const auto y = random_state(build_basis(10).dim(), 8);
    const Complex a(0.6, 0.2), b(-0.3, 0.55);

    auto run = [&](VectorXcd psi) {
        auto h = assemble_hamiltonian(p, basis);
        EvolveOptions opt;
        opt.dt = 1.0;
        opt.n_samples = 4;
        double drift = 0.0;
        const double n0 = psi.norm();
        evolve_state(h, psi, g_of_t, 300.0, opt, [&](double, const VectorXcd& st) {
            drift = std::max(drift, std::abs(st.norm() - n0));
        });
        CHECK(drift < 1e-8);
        return psi;
    };
    const VectorXcd lhs = run(a * x + b * y);
    const VectorXcd rhs = a * run(x) + b * run(y);
    CHECK((lhs - rhs).norm() < 1e-8);
}

TEST_CASE("state round trip through the binary dump") {
    const auto psi = random_state(37, 21);
    const auto path = std::filesystem::temp_directory_path() / "bidc_state_test.bin";
    write_state_binary(path.string(), psi);
    const auto back = read_state_binary(path.string());
    REQUIRE(back.size() == psi.size());
    CHECK((back - psi).norm() == 0.0);
    std::filesystem::remove(path);
}
