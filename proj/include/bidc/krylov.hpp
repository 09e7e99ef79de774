#ifndef BIDC_KRYLOV_HPP
#define BIDC_KRYLOV_HPP

#include "bidc/types.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>
#include <vector>

namespace bidc {

struct KrylovOptions {
    double tol = 1e-12;  // per-step error estimate, relative to the state norm
    int max_dim = 60;    // Krylov dimension cap before the step is split
    int max_splits = 20; // recursion guard
};

// One step psi <- exp(-i dt H) psi for a Hermitian operator given as a
// matvec functor apply(x, y). Lanczos with full reorthogonalization; the
// result is a unit combination of an orthonormal basis, so the norm is
// preserved to roundoff.
template <typename MatVec>
void krylov_exp_step(const MatVec& apply, VectorXcd& psi, double dt,
                     const KrylovOptions& opt = {}, int depth = 0) {
    const double nrm = psi.norm();
    if (nrm == 0.0) return;

    const Eigen::Index n = psi.size();
    const int mmax = static_cast<int>(std::min<Eigen::Index>(opt.max_dim, n));
    std::vector<VectorXcd> V;
    V.reserve(mmax + 1);
    V.push_back(psi / nrm);
    std::vector<double> alpha, beta;
    VectorXcd w(n);

    for (int j = 0; j < mmax; ++j) {
        apply(V[j], w);
        Complex a = V[j].dot(w);
        alpha.push_back(a.real());
        w -= alpha[j] * V[j];
        if (j > 0) w -= beta[j - 1] * V[j - 1];
        // full reorthogonalization, twice for safety near convergence
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : V) w -= v.dot(w) * v;
        const double b = w.norm();
        const int m = j + 1;

        // tridiagonal exponential via eigendecomposition
        MatrixXd T = MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
        VectorXcd u = (es.eigenvectors()
                       * ((-Complex(0, 1) * dt * es.eigenvalues().array()).exp()
                          * es.eigenvectors().row(0).transpose().array().cast<Complex>())
                              .matrix());

        const double err = b * std::abs(u[m - 1]) * std::min(1.0, std::abs(dt));
        if (b < 1e-14 || err < opt.tol) {
            VectorXcd out = VectorXcd::Zero(n);
            for (int i = 0; i < m; ++i) out += u[i] * V[i];
            psi = nrm * out;
            return;
        }
        beta.push_back(b);
        V.push_back(w / b);
    }

    if (depth >= opt.max_splits)
        throw std::runtime_error("krylov_exp_step: step size control failed");
    krylov_exp_step(apply, psi, 0.5 * dt, opt, depth + 1);
    krylov_exp_step(apply, psi, 0.5 * dt, opt, depth + 1);
}

} // namespace bidc

#endif
