#include "bidc/hilbert.hpp"

#include "bidc/krylov.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace bidc {

TwoExcitationBasis::TwoExcitationBasis(int n_sites) : n_(n_sites) {
    if (n_sites < 2) throw std::invalid_argument("TwoExcitationBasis: n_sites must be >= 2");
}

int TwoExcitationBasis::photon_pair_index(int i, int j) const {
    // lexicographic over i <= j: block of size (n - i) starting at offset(i)
    return i * n_ - i * (i - 1) / 2 + (j - i);
}

int TwoExcitationBasis::atom_pair_index(int n, int m) const {
    for (int q = 0; q < 6; ++q)
        if (atom_pairs[q].first == n && atom_pairs[q].second == m)
            return photon_pair_count() + q;
    throw std::out_of_range("atom_pair_index: need 0 <= n < m < 4");
}

int TwoExcitationBasis::atom_photon_index(int n, int i) const {
    return photon_pair_count() + 6 + n * n_ + i;
}

TwoExcitationBasis::Labels TwoExcitationBasis::labels(int q) const {
    const int np = photon_pair_count();
    if (q < np) {
        int i = 0;
        while (photon_pair_index(i + 1, i + 1) <= q && i + 1 < n_) ++i;
        const int j = i + (q - photon_pair_index(i, i));
        return {Block::PhotonPair, i, j};
    }
    if (q < np + 6) {
        const auto& [n, m] = atom_pairs[q - np];
        return {Block::AtomPair, n, m};
    }
    const int r = q - np - 6;
    return {Block::AtomPhoton, r / n_, r % n_};
}

TwoExcitationBasis build_basis(int n_sites) { return TwoExcitationBasis(n_sites); }

SparseHamiltonian assemble_hamiltonian(const ModelParams& p,
                                       const TwoExcitationBasis& basis,
                                       std::optional<std::pair<double, double>> g_overrides) {
    p.validate();
    if (basis.n_sites() != p.n_sites)
        throw std::invalid_argument("assemble_hamiltonian: basis/params dimension mismatch");

    const int nc = p.n_sites;
    const double J = p.hopping;
    const double wc = p.cavity_freq;
    const double g1 = g_overrides ? g_overrides->first : p.g_12;
    const double g3 = g_overrides ? g_overrides->second : p.g_34;
    const auto sites = p.atom_sites();
    const auto freqs = p.hamiltonian_freqs(g1, g3);
    const auto gs = std::array<double, 4>{g1, g1, g3, g3};

    SparseHamiltonian h;
    h.basis_ = basis;
    h.params_ = p;
    h.g1_ = g1;
    h.g3_ = g3;

    using T = Eigen::Triplet<double>;
    std::vector<T> trip;
    trip.reserve(12 * basis.dim());

    // descriptors of coupling-dependent entries, resolved to pointers below
    struct CDesc { int r, c; int atom; double factor; };
    struct DDesc { int r; double base; int a, b; };
    std::vector<CDesc> cdesc;
    std::vector<DDesc> ddesc;

    auto norm2 = [](int i, int j) { return i == j ? std::numbers::sqrt2_v<double> : 1.0; };

    // photon-pair block: diagonal and hopping (literal sum over ring bonds)
    for (int i = 0; i < nc; ++i)
        for (int j = i; j < nc; ++j) {
            const int q = basis.photon_pair_index(i, j);
            trip.emplace_back(q, q, 2.0 * wc - (i == j ? p.interaction : 0.0));
            for (int b = 0; b < nc; ++b) {
                const int bp = (b + 1) % nc;
                for (auto [dst, src] : {std::pair{bp, b}, std::pair{b, bp}}) {
                    // a_dst^+ a_src |i,j>; both assignments fire when i == j
                    for (int hit = 0; hit < 2; ++hit) {
                        const int keep = hit == 0 ? j : i;
                        const int mov = hit == 0 ? i : j;
                        if (hit == 1 && i == j) continue; // handled via double count below
                        if (src != mov) continue;
                        const int a = std::min(dst, keep), bb = std::max(dst, keep);
                        const double mult = (i == j ? 2.0 : 1.0); // bosonic double count
                        const double amp = -J * mult * (a == bb ? 2.0 : 1.0)
                            / (norm2(i, j) * norm2(a, bb));
                        trip.emplace_back(basis.photon_pair_index(a, bb), q, amp);
                    }
                }
            }
        }

    // atom-pair diagonal
    for (int q = 0; q < 6; ++q) {
        const auto& [n, m] = atom_pairs[q];
        const int idx = basis.atom_pair_index(n, m);
        trip.emplace_back(idx, idx, freqs[n] + freqs[m]);
        ddesc.push_back({idx, 0.0, n, m});
    }

    // atom-photon block: diagonal + photon hopping with the atom a spectator
    for (int n = 0; n < 4; ++n) {
        for (int i = 0; i < nc; ++i) {
            const int q = basis.atom_photon_index(n, i);
            trip.emplace_back(q, q, freqs[n] + wc);
            ddesc.push_back({q, wc, n, -1});
        }
        for (int b = 0; b < nc; ++b) {
            const int bp = (b + 1) % nc;
            const int qa = basis.atom_photon_index(n, b);
            const int qb = basis.atom_photon_index(n, bp);
            trip.emplace_back(qa, qb, -J);
            trip.emplace_back(qb, qa, -J);
        }
    }

    // coupling: atom-photon <-> photon pair, sigma_n^+ a_{site_n}
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i < nc; ++i) {
            const int q = basis.atom_photon_index(n, i);
            const int a = std::min(sites[n], i), b = std::max(sites[n], i);
            const int qp = basis.photon_pair_index(a, b);
            const double factor = (a == b ? std::numbers::sqrt2_v<double> : 1.0);
            trip.emplace_back(qp, q, gs[n] * factor);
            trip.emplace_back(q, qp, gs[n] * factor);
            cdesc.push_back({qp, q, n, factor});
            cdesc.push_back({q, qp, n, factor});
        }

    // coupling: atom pair <-> atom-photon, sigma_m^+ a_{site_m} on |n, i>
    for (int q = 0; q < 6; ++q) {
        const auto& [n, m] = atom_pairs[q];
        const int idx = basis.atom_pair_index(n, m);
        for (auto [keep, move] : {std::pair{n, m}, std::pair{m, n}}) {
            const int qm = basis.atom_photon_index(keep, sites[move]);
            trip.emplace_back(idx, qm, gs[move]);
            trip.emplace_back(qm, idx, gs[move]);
            cdesc.push_back({idx, qm, move, 1.0});
            cdesc.push_back({qm, idx, move, 1.0});
        }
    }

    h.mat_.resize(basis.dim(), basis.dim());
    h.mat_.setFromTriplets(trip.begin(), trip.end());
    h.mat_.makeCompressed();

    for (const auto& d : cdesc)
        h.coupling_slots_.push_back({&h.mat_.coeffRef(d.r, d.c), d.atom, d.factor});
    for (const auto& d : ddesc)
        h.atom_diag_slots_.push_back({&h.mat_.coeffRef(d.r, d.r), d.base, d.a, d.b});
    return h;
}

void SparseHamiltonian::update_couplings(double g1, double g3) {
    if (g1 == g1_ && g3 == g3_) return;
    g1_ = g1;
    g3_ = g3;
    const std::array<double, 4> gs{g1, g1, g3, g3};
    const auto freqs = params_.hamiltonian_freqs(g1, g3);
    for (const auto& s : coupling_slots_) *s.value = gs[s.atom] * s.factor;
    for (const auto& s : atom_diag_slots_)
        *s.value = s.base + freqs[s.atom_a] + (s.atom_b >= 0 ? freqs[s.atom_b] : 0.0);
}

void SparseHamiltonian::apply(const VectorXcd& x, VectorXcd& y) const {
    y.noalias() = mat_ * x; // full symmetric storage
}

VectorXcd apply_hamiltonian(const SparseHamiltonian& h, const VectorXcd& x) {
    if (x.size() != h.dim())
        throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
    VectorXcd y(x.size());
    h.apply(x, y);
    return y;
}

void evolve_state(SparseHamiltonian& h, VectorXcd& psi,
                  const std::function<std::pair<double, double>(double)>& g_of_t,
                  double t_final, const EvolveOptions& opt,
                  const std::function<void(double, const VectorXcd&)>& observer) {
    if (psi.size() != h.dim())
        throw std::invalid_argument("evolve_state: state dimension mismatch");
    KrylovOptions kopt{opt.krylov_tol, opt.max_krylov, 20};
    auto apply = [&h](const VectorXcd& x, VectorXcd& y) { h.apply(x, y); };

    const int ns = std::max(1, opt.n_samples);
    const double sample_dt = t_final / ns;
    if (observer) observer(0.0, psi);
    double t = 0.0;
    for (int s = 1; s <= ns; ++s) {
        const double t_next = s * sample_dt;
        while (t < t_next - 1e-12 * std::max(1.0, t_final)) {
            const double dt = std::min(opt.dt, t_next - t);
            if (g_of_t) {
                auto [g1, g3] = g_of_t(t + 0.5 * dt);
                h.update_couplings(g1, g3);
            }
            krylov_exp_step(apply, psi, dt, kopt);
            t += dt;
        }
        t = t_next;
        if (observer) observer(t, psi);
    }
}

// ---- state I/O ------------------------------------------------------------

namespace {
constexpr char state_magic[8] = {'B', 'I', 'D', 'C', 'A', 'M', 'P', '\0'};
constexpr std::uint32_t state_version = 1;
} // namespace

void write_state_binary(const std::string& path, const VectorXcd& psi) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_state_binary: cannot open " + path);
    const std::uint32_t dim = static_cast<std::uint32_t>(psi.size());
    out.write(state_magic, 8);
    out.write(reinterpret_cast<const char*>(&state_version), 4);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        const double re = psi[i].real(), im = psi[i].imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
}

VectorXcd read_state_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_state_binary: cannot open " + path);
    char magic[8];
    std::uint32_t version = 0, dim = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&dim), 4);
    if (std::memcmp(magic, state_magic, 8) != 0 || version != state_version)
        throw std::runtime_error("read_state_binary: bad header in " + path);
    VectorXcd psi(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        double re = 0, im = 0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        psi[i] = Complex(re, im);
    }
    if (!in) throw std::runtime_error("read_state_binary: truncated file " + path);
    return psi;
}

void write_state_csv(const std::string& path, const VectorXcd& psi, double time) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_state_csv: cannot open " + path);
    out.precision(17);
    out << "time,index,real,imag\n";
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        out << time << ',' << i << ',' << psi[i].real() << ',' << psi[i].imag() << '\n';
}

} // namespace bidc
