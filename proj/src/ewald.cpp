#include "neural_atoms/ewald.hpp"

#include "neural_atoms/csv.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>

namespace na::ewald {
namespace {

constexpr double kPi = std::numbers::pi;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 min_image(const Vec3& ri, const Vec3& rj, double edge) {
    Vec3 d;
    for (int k = 0; k < 3; ++k) {
        d[k] = ri[k] - rj[k];
        d[k] -= edge * std::nearbyint(d[k] / edge);
    }
    return d;
}

// Σ_{n≠0, |n|∞≤c} exp(−G²/4a²)/G² · cos(G·r) with G = 2πn/edge.
struct ReciprocalSum {
    std::vector<Vec3> g;
    std::vector<double> coeff;

    ReciprocalSum(double edge, double a, int c) {
        const double unit = 2.0 * kPi / edge;
        for (int x = -c; x <= c; ++x)
            for (int y = -c; y <= c; ++y)
                for (int z = -c; z <= c; ++z) {
                    if (x == 0 && y == 0 && z == 0) continue;
                    const Vec3 gv{unit * x, unit * y, unit * z};
                    const double g2 = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
                    g.push_back(gv);
                    coeff.push_back(std::exp(-g2 / (4.0 * a * a)) / g2);
                }
    }

    double at(const Vec3& r) const {
        double s = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            s += coeff[k] * std::cos(g[k][0] * r[0] + g[k][1] * r[1] + g[k][2] * r[2]);
        return s;
    }

    double at_origin() const {
        double s = 0.0;
        for (double c : coeff) s += c;
        return s;
    }
};

// Σ_{|n|∞≤c} erfc(a‖r + nL‖)/‖r + nL‖, skipping the origin image when `skip_origin`.
double real_space_sum(const Vec3& r, double edge, double a, int c, bool skip_origin) {
    double s = 0.0;
    for (int x = -c; x <= c; ++x)
        for (int y = -c; y <= c; ++y)
            for (int z = -c; z <= c; ++z) {
                if (skip_origin && x == 0 && y == 0 && z == 0) continue;
                const double d = norm({r[0] + x * edge, r[1] + y * edge, r[2] + z * edge});
                s += std::erfc(a * d) / d;
            }
    return s;
}

void require_distinct(const EwaldSystem& sys) {
    const double tol = 1e-12 * sys.cell_edge;
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (std::size_t j = i + 1; j < sys.size(); ++j)
            if (norm(min_image(sys.positions[i], sys.positions[j], sys.cell_edge)) < tol)
                throw GeometryError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                    " coincide (degenerate geometry)");
}

}  // namespace

void EwaldSystem::normalize() {
    if (charges.size() != positions.size())
        throw std::invalid_argument("charge count " + std::to_string(charges.size()) + " differs from position count " +
                                    std::to_string(positions.size()));
    if (charges.empty()) throw std::invalid_argument("system has no atoms");
    if (!(cell_edge > 0.0)) throw std::invalid_argument("cell_edge must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("splitting parameter a must be positive");
    if (real_cutoff < 1 || recip_cutoff < 1) throw std::invalid_argument("cutoffs must be at least 1");
    for (auto& r : positions)
        for (double& c : r) {
            if (!std::isfinite(c)) throw std::invalid_argument("non-finite position");
            c -= cell_edge * std::floor(c / cell_edge);
            if (c >= cell_edge) c = 0.0;
        }
}

EwaldMatrix ewald_sum_matrix(EwaldSystem sys) {
    sys.normalize();
    require_distinct(sys);
    const std::size_t n = sys.size();
    const double v = sys.volume();
    const double a = sys.a;
    const ReciprocalSum recip(sys.cell_edge, a, sys.recip_cutoff);
    EwaldMatrix m{Tensor({n, n}), Tensor({n, n}), Tensor({n, n}), Tensor({n, n})};
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = sys.charges[i];
        m.x_self.at(i, i) = 0.5 * std::pow(std::abs(zi), 2.4);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double zj = sys.charges[j];
            const Vec3 r = min_image(sys.positions[i], sys.positions[j], sys.cell_edge);
            const double sri = zi * zj * real_space_sum(r, sys.cell_edge, a, sys.real_cutoff, false);
            const double lri = zi * zj * 4.0 * kPi / v * recip.at(r);
            const double self = -(zi * zi + zj * zj) * a / std::sqrt(kPi) -
                                (zi + zj) * (zi + zj) * kPi / (2.0 * a * a * v);
            m.x_sri.at(i, j) = m.x_sri.at(j, i) = sri;
            m.x_lri.at(i, j) = m.x_lri.at(j, i) = lri;
            m.x_self.at(i, j) = m.x_self.at(j, i) = self;
        }
    }
    for (std::size_t k = 0; k < n * n; ++k) m.x[k] = m.x_sri[k] + m.x_lri[k] + m.x_self[k];
    return m;
}

Tensor ewald_pair_interaction(EwaldSystem sys) {
    sys.normalize();
    const EwaldMatrix m = ewald_sum_matrix(sys);
    const std::size_t n = sys.size();
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                out.at(i, j) = m.x_sri.at(i, j) + m.x_lri.at(i, j) -
                               kPi * sys.charges[i] * sys.charges[j] / (sys.volume() * sys.a * sys.a);
    return out;
}

double ewald_energy(EwaldSystem sys) {
    sys.normalize();
    const Tensor pair = ewald_pair_interaction(sys);
    const double v = sys.volume();
    const double a = sys.a;
    const ReciprocalSum recip(sys.cell_edge, a, sys.recip_cutoff);
    const double image_real = real_space_sum({0.0, 0.0, 0.0}, sys.cell_edge, a, sys.real_cutoff, true);
    const double image_recip = 4.0 * kPi / v * recip.at_origin();
    double e = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const double z2 = sys.charges[i] * sys.charges[i];
        // single charge in its own periodic images, with its share of the background
        e += 0.5 * z2 * (image_real + image_recip) - z2 * a / std::sqrt(kPi) - z2 * kPi / (2.0 * v * a * a);
        for (std::size_t j = i + 1; j < sys.size(); ++j) e += pair.at(i, j);
    }
    return e;
}

Tensor direct_sum_oracle(EwaldSystem sys, int shells) {
    if (shells < 0) throw std::invalid_argument("shells must be non-negative");
    sys.normalize();
    const std::size_t n = sys.size();
    const double edge = sys.cell_edge;
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const Vec3& ri = sys.positions[i];
            const Vec3& rj = sys.positions[j];
            double s = 0.0;
            for (int x = -shells; x <= shells; ++x)
                for (int y = -shells; y <= shells; ++y)
                    for (int z = -shells; z <= shells; ++z) {
                        const double d = norm({ri[0] - rj[0] + x * edge, ri[1] - rj[1] + y * edge,
                                               ri[2] - rj[2] + z * edge});
                        if (d > 0.0) s += 1.0 / d;
                    }
            out.at(i, j) = out.at(j, i) = sys.charges[i] * sys.charges[j] * s;
        }
    return out;
}

double direct_sum_energy(const EwaldSystem& sys, int shells) {
    const Tensor m = direct_sum_oracle(sys, shells);
    double e = 0.0;
    for (double v : m.data()) e += v;
    return 0.5 * e;
}

double dipole_surface_term(EwaldSystem sys) {
    sys.normalize();
    Vec3 d{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (int k = 0; k < 3; ++k) d[k] += sys.charges[i] * sys.positions[i][k];
    return 2.0 * kPi / (3.0 * sys.volume()) * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

double reciprocal_tail_bound(const EwaldSystem& sys) {
    const double unit = 2.0 * kPi / sys.cell_edge;
    double bound = 0.0;
    for (int s = sys.recip_cutoff + 1;; ++s) {
        // (2s+1)³ − (2s−1)³ vectors on shell s, each with ‖G‖ ≥ unit·s
        const double count = std::pow(2.0 * s + 1, 3) - std::pow(2.0 * s - 1, 3);
        const double g2 = unit * unit * s * s;
        const double term = count * std::exp(-g2 / (4.0 * sys.a * sys.a)) / g2;
        bound += term;
        if (term < 1e-300 || term < 1e-18 * bound) break;
    }
    return 4.0 * kPi / sys.volume() * bound;
}

std::pair<int, int> converged_cutoffs(double cell_edge, double a, double tol) {
    int real = 1;
    while (std::erfc(a * real * cell_edge) / (real * cell_edge) * 26.0 * real * real >= tol) ++real;
    EwaldSystem probe;
    probe.cell_edge = cell_edge;
    probe.a = a;
    probe.recip_cutoff = 1;
    while (reciprocal_tail_bound(probe) >= tol) ++probe.recip_cutoff;
    return {real + 1, probe.recip_cutoff};
}

Tensor threshold_abs(const Tensor& x, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("threshold must be non-negative");
    Tensor out = x;
    for (auto& v : out.data()) {
        v = std::abs(v);
        if (v < threshold) v = 0.0;
    }
    return out;
}

void write_interaction_heatmap(const EwaldMatrix& m, double threshold, const std::filesystem::path& path) {
    write_matrix_csv(path, threshold_abs(m.x, threshold), "atom");
}

EwaldSystem load_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    const nlohmann::json j = nlohmann::json::parse(in);
    EwaldSystem s;
    s.charges = j.at("Z").get<std::vector<double>>();
    for (const auto& p : j.at("positions")) {
        if (!p.is_array() || p.size() != 3) throw std::invalid_argument("position must have 3 coordinates");
        s.positions.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    s.cell_edge = j.at("cell_edge").get<double>();
    s.a = j.at("a").get<double>();
    s.real_cutoff = j.at("real_cutoff").get<int>();
    s.recip_cutoff = j.at("recip_cutoff").get<int>();
    s.normalize();
    return s;
}

}  // namespace na::ewald
