#ifndef BIDC_TYPES_HPP
#define BIDC_TYPES_HPP

#include <Eigen/Core>
#include <complex>

namespace bidc {

using Complex = std::complex<double>;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;

// wrap an angle to the principal interval (-pi, pi]
inline double principal_angle(double phi) {
    double x = std::fmod(phi + pi, 2.0 * pi);
    if (x <= 0.0) x += 2.0 * pi;
    return x - pi;
}

// wrap an integer site index onto the ring [0, n)
inline int ring_site(int j, int n) {
    int r = j % n;
    return r < 0 ? r + n : r;
}

// minimal-image separation on a ring of n sites
inline int ring_distance(int i, int j, int n) {
    int d = std::abs(i - j) % n;
    return std::min(d, n - d);
}

} // namespace bidc

#endif
