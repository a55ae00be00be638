#pragma once

// Ewald sum matrix for point charges in a cubic periodic cell.
//
// Off-diagonal entries split into a real-space (short-range) part
//   Z_i Z_j Σ_L erfc(a‖r_ij + L‖) / ‖r_ij + L‖,
// a reciprocal-space (long-range) part
//   (4π Z_i Z_j / V) Σ_{G≠0} exp(−‖G‖²/4a²) / ‖G‖² · cos(G·r_ij),   G = 2π n / a_cell,
// and a distance-independent self/background part
//   −(Z_i² + Z_j²) a/√π − (Z_i + Z_j)² π / (2 a² V).
// The diagonal is ½|Z_i|^2.4. Displacements use the minimum image.

#include "neural_atoms/tensor.hpp"

#include <array>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace na::ewald {

using Vec3 = std::array<double, 3>;

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EwaldSystem {
    std::vector<double> charges;   // Z_i
    std::vector<Vec3> positions;   // Cartesian, same units as cell_edge
    double cell_edge = 1.0;
    double a = 0.5;                // splitting parameter, inverse length
    int real_cutoff = 1;           // lattice shells, max-norm
    int recip_cutoff = 1;          // reciprocal shells, max-norm

    std::size_t size() const { return charges.size(); }
    double volume() const { return cell_edge * cell_edge * cell_edge; }
    /// Checks invariants and wraps positions into [0, cell_edge).
    void normalize();
};

struct EwaldMatrix {
    Tensor x;       // x_sri + x_lri + x_self
    Tensor x_sri;
    Tensor x_lri;
    Tensor x_self;
};

EwaldMatrix ewald_sum_matrix(EwaldSystem sys);

/// Standard Ewald lattice energy of the whole cell (tin-foil boundary, neutralising background).
/// Independent of `a` once the cutoffs are converged.
double ewald_energy(EwaldSystem sys);

/// Splitting-independent pair interaction x_sri + x_lri − π Z_i Z_j / (V a²); zero diagonal.
Tensor ewald_pair_interaction(EwaldSystem sys);

/// Z_i Z_j Σ_L 1/‖r_i − r_j + L‖ over lattice vectors with max-norm ≤ shells, using the
/// wrapped positions as given (no minimum image). The diagonal holds the L ≠ 0 self images.
Tensor direct_sum_oracle(EwaldSystem sys, int shells);

/// ½ Σ_ij of direct_sum_oracle: the Coulomb energy of a cube of (2·shells+1)³ cells per cell.
double direct_sum_energy(const EwaldSystem& sys, int shells);

/// Surface term 2π|Σ Z_i r_i|² / 3V separating a vacuum-bounded cubic sum from the Ewald energy.
double dipole_surface_term(EwaldSystem sys);

/// Upper bound on Σ over dropped reciprocal shells of exp(−‖G‖²/4a²)/‖G‖² times 4π/V,
/// i.e. the largest change of x_lri_ij / |Z_i Z_j| from truncating at recip_cutoff.
double reciprocal_tail_bound(const EwaldSystem& sys);

/// Smallest cutoffs whose first omitted shell contributes less than `tol` per unit charge product.
std::pair<int, int> converged_cutoffs(double cell_edge, double a, double tol);

/// CSV of |x_ij| with entries below `threshold` zeroed; header row and column are atom indices.
void write_interaction_heatmap(const EwaldMatrix& m, double threshold, const std::filesystem::path& path);
Tensor threshold_abs(const Tensor& x, double threshold);

EwaldSystem load_system(const std::filesystem::path& path);

}  // namespace na::ewald
