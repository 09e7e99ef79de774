#include "bidc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bidc {

std::string to_string(FreqConvention c) {
    return c == FreqConvention::Bare ? "bare" : "stark";
}

FreqConvention convention_from_string(const std::string& s) {
    if (s == "bare") return FreqConvention::Bare;
    if (s == "stark") return FreqConvention::Stark;
    throw std::invalid_argument("convention: expected 'bare' or 'stark', got '" + s + "'");
}

double ModelParams::omega() const {
    return 0.25 * (atom_freqs[0] + atom_freqs[1] + atom_freqs[2] + atom_freqs[3]);
}

void ModelParams::set_default_atom_freqs() {
    // half the doublon energy at K = pi/2
    const double e = 2.0 * cavity_freq
        - std::sqrt(interaction * interaction + 8.0 * hopping * hopping);
    atom_freqs.fill(0.5 * e);
}

double stark_shift(double g, const ModelParams& p) {
    const double om = p.omega();
    const double d2 = om * om - 4.0 * p.hopping * p.hopping;
    if (d2 <= 0.0)
        throw std::domain_error("stark_shift: |Omega| <= 2J, atom inside the single-photon band");
    return g * g / std::sqrt(d2);
}

std::array<double, 4> ModelParams::hamiltonian_freqs() const {
    return hamiltonian_freqs(g_12, g_34);
}

std::array<double, 4> ModelParams::hamiltonian_freqs(double g1, double g3) const {
    std::array<double, 4> out = atom_freqs;
    if (convention == FreqConvention::Stark) {
        const double s1 = stark_shift(g1, *this);
        const double s3 = stark_shift(g3, *this);
        out[0] += s1;
        out[1] += s1;
        out[2] += s3;
        out[3] += s3;
    }
    return out;
}

void ModelParams::validate() const {
    if (n_sites < 2) throw std::invalid_argument("n_sites: must be >= 2");
    if (hopping <= 0.0) throw std::invalid_argument("hopping: must be > 0");
    if (interaction < 0.0) throw std::invalid_argument("interaction: must be >= 0");
    if (site_1 < 0 || site_1 >= n_sites) throw std::invalid_argument("site_1: out of range");
    if (site_2 < 0 || site_2 >= n_sites) throw std::invalid_argument("site_2: out of range");
    if (site_1 >= site_2) throw std::invalid_argument("site_1: must satisfy site_1 < site_2");
    if (g_12 < 0.0) throw std::invalid_argument("g_12: must be >= 0");
    if (g_34 < 0.0) throw std::invalid_argument("g_34: must be >= 0");
}

std::vector<std::string> ModelParams::regime_warnings() const {
    std::vector<std::string> w;
    const double om = omega();
    const double J = hopping;
    const double gmax = std::max(g_12, g_34);
    const double gmin = std::min(g_12, g_34);
    for (double f : atom_freqs) {
        if (gmin > 0.0 && std::abs(f - om) > 0.1 * gmin) {
            w.push_back("frequency spread |delta_i| is not small against g_i");
            break;
        }
    }
    if (gmax > 0.3 * J) w.push_back("couplings g_i are not small against J");
    if (std::abs(om) < 2.0 * J) w.push_back("|Omega| is not large against J");
    if (cavity_freq - 2.0 * J - om < 5.0 * gmax)
        w.push_back("atom is not far detuned from the single-photon band");
    return w;
}

// ---- config text ----------------------------------------------------------

namespace {

std::map<std::string, std::string, std::less<>> parse_kv(const std::string& text) {
    std::map<std::string, std::string, std::less<>> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing '='");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": not a number: '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": not an integer: '" + v + "'");
    }
}

} // namespace

ModelParams params_from_config_text(const std::string& text) {
    auto kv = parse_kv(text);
    ModelParams p;
    bool any_omega = false;
    auto take = [&kv](const char* key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };
    if (auto* v = take("n_sites")) p.n_sites = to_int("n_sites", *v);
    if (auto* v = take("hopping")) p.hopping = to_double("hopping", *v);
    if (auto* v = take("interaction")) p.interaction = to_double("interaction", *v);
    if (auto* v = take("cavity_freq")) p.cavity_freq = to_double("cavity_freq", *v);
    if (auto* v = take("site_1")) p.site_1 = to_int("site_1", *v);
    if (auto* v = take("site_2")) p.site_2 = to_int("site_2", *v);
    if (auto* v = take("g_12")) p.g_12 = to_double("g_12", *v);
    if (auto* v = take("g_34")) p.g_34 = to_double("g_34", *v);
    for (int i = 0; i < 4; ++i) {
        const std::string key = "omega_" + std::to_string(i + 1);
        if (auto it = kv.find(key); it != kv.end()) {
            p.atom_freqs[i] = to_double(key, it->second);
            any_omega = true;
        }
    }
    if (!any_omega) p.set_default_atom_freqs();
    p.validate();
    return p;
}

std::string params_to_config_text(const ModelParams& p) {
    std::ostringstream out;
    out.precision(17);
    out << "n_sites = " << p.n_sites << "\n"
        << "hopping = " << p.hopping << "\n"
        << "interaction = " << p.interaction << "\n"
        << "cavity_freq = " << p.cavity_freq << "\n"
        << "site_1 = " << p.site_1 << "\n"
        << "site_2 = " << p.site_2 << "\n";
    for (int i = 0; i < 4; ++i)
        out << "omega_" << (i + 1) << " = " << p.atom_freqs[i] << "\n";
    out << "g_12 = " << p.g_12 << "\n"
        << "g_34 = " << p.g_34 << "\n";
    return out.str();
}

// ---- band structure -------------------------------------------------------

double single_photon_dispersion(double k, const ModelParams& p) {
    return p.cavity_freq - 2.0 * p.hopping * std::cos(k);
}

double doublon_dispersion(double K, const ModelParams& p) {
    const double c = std::cos(0.5 * K);
    const double J = p.hopping;
    return 2.0 * p.cavity_freq
        - std::sqrt(p.interaction * p.interaction + 16.0 * J * J * c * c);
}

double doublon_localization(double K, const ModelParams& p) {
    if (p.interaction <= 0.0)
        throw std::domain_error("doublon_localization: U = 0 supports no bound band");
    const double c = std::abs(std::cos(0.5 * K));
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return std::asinh(p.interaction / (4.0 * p.hopping * c));
}

double doublon_wavefunction(double K, int r, const ModelParams& p) {
    const double x = doublon_localization(K, p);
    const int rr = ring_distance(0, r, p.n_sites);
    if (std::isinf(x)) return rr == 0 ? 1.0 : 0.0; // single-site doublon at K = pi
    return std::sqrt(std::tanh(x)) * std::exp(-rr * x);
}

double group_velocity(double K, const ModelParams& p) {
    const double J = p.hopping;
    const double c = std::cos(0.5 * K);
    return 4.0 * J * J * std::sin(K)
        / std::sqrt(p.interaction * p.interaction + 16.0 * J * J * c * c);
}

double resonant_wavevector(double omega, const ModelParams& p) {
    const double J = p.hopping;
    const double num = std::pow(2.0 * p.cavity_freq - 2.0 * omega, 2)
        - p.interaction * p.interaction;
    const double c2 = num / (16.0 * J * J);
    if (c2 < 0.0 || c2 > 1.0)
        throw std::domain_error("resonant_wavevector: 2*Omega lies outside the doublon band");
    return 2.0 * std::acos(std::sqrt(c2));
}

std::pair<double, double> doublon_band_edges(const ModelParams& p) {
    const double J = p.hopping;
    return {2.0 * p.cavity_freq - std::sqrt(p.interaction * p.interaction + 16.0 * J * J),
            2.0 * p.cavity_freq - p.interaction};
}

std::pair<double, double> scattering_band_edges(const ModelParams& p) {
    return {2.0 * p.cavity_freq - 4.0 * p.hopping, 2.0 * p.cavity_freq + 4.0 * p.hopping};
}

std::vector<double> momentum_grid(int n_sites) {
    std::vector<double> ks(n_sites);
    for (int m = 0; m < n_sites; ++m) {
        double K = 2.0 * pi * m / n_sites;
        if (K > pi + 1e-12) K -= 2.0 * pi;
        ks[m] = K;
    }
    std::sort(ks.begin(), ks.end());
    return ks;
}

const DoublonMode& DoublonModeTable::nearest(double K) const {
    const DoublonMode* best = &modes.front();
    for (const auto& m : modes)
        if (std::abs(m.K - K) < std::abs(best->K - K)) best = &m;
    return *best;
}

DoublonModeTable build_mode_table(const ModelParams& p) {
    DoublonModeTable t;
    const double two_om = 2.0 * p.omega();
    for (double K : momentum_grid(p.n_sites)) {
        DoublonMode m;
        m.K = K;
        m.energy = doublon_dispersion(K, p);
        m.lambda_inv = p.interaction > 0.0 ? doublon_localization(K, p) : 0.0;
        const double c = std::cos(0.5 * K);
        m.u_ratio = c != 0.0 ? p.interaction / (4.0 * p.hopping * c)
                             : std::numeric_limits<double>::infinity();
        m.v_group = group_velocity(K, p);
        m.detuning = m.energy - two_om;
        t.modes.push_back(m);
    }
    return t;
}

} // namespace bidc
