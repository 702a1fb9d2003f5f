#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "maxsurf/mesh.hpp"
#include "maxsurf/radial.hpp"

namespace maxsurf::analysis {

/// 1/(2 pi) for n = 2, 1/((n-2)|S^{n-1}|) for n >= 3.
double residue_normalization(int n);

struct ResidueReport {
  std::vector<double> radii;
  std::vector<double> values;    // normalized flux
  std::vector<double> raw_flux;  // int_{|x|=r} (du/dnu)/sqrt(1-|Du|^2) without normalization
  double spread = 0.0;

  double mean() const;
};

/// Flux of Du/sqrt(1-|Du|^2) through circles (spheres) of the given radii.
/// Fields use interpolated nodal gradients and trapezoidal angular sums;
/// exact solutions use closed-form gradients.
ResidueReport residue(const mesh::ScalarField& field, const std::vector<double>& radii);
ResidueReport residue(const radial::BoostedRadialSolution& exact, const std::vector<double>& radii);

struct AsymptoticFit {
  Eigen::VectorXd a;
  double c = 0.0;
  double d = 0.0;
  double rms_residual = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int samples = 0;
};

/// psi_2 = ln sqrt(|x|^2 - (a.x)^2); psi_n = -(|x|^2 - (a.x)^2)^{(2-n)/2} for n >= 3,
/// signed so that u ~ a.x + c + d psi in every dimension.
double asymptotic_basis(int n, const Eigen::VectorXd& a, const Eigen::VectorXd& x);

/// Least squares of (u - a.x) on {1, psi} with a fixed.
AsymptoticFit fit_samples(int n, const Eigen::VectorXd& a, const std::vector<Eigen::VectorXd>& points,
                          const std::vector<double>& values);

AsymptoticFit fit_asymptotics(const mesh::ScalarField& field, double lo, double hi);
AsymptoticFit fit_asymptotics(const radial::BoostedRadialSolution& exact, double lo, double hi);

/// |d - (1 - |a|^2) mean(Res)|.
double check_residue_relation(const AsymptoticFit& fit, const ResidueReport& res);

struct BlowdownSample {
  double r = 0.0;
  std::vector<Eigen::VectorXd> points;  // on the reference annulus 1 <= |x| <= 2
  std::vector<double> values;           // u(r x) / r
  double sup_distance = 0.0;            // sup |u(r x)/r - a.x|
  double lipschitz = 0.0;               // sampled pairwise Lipschitz constant
};

std::vector<BlowdownSample> blowdown_sequence(const mesh::ScalarField& field,
                                              const std::vector<double>& scales,
                                              const Eigen::VectorXd& a);
std::vector<BlowdownSample> blowdown_sequence(const radial::BoostedRadialSolution& exact,
                                              const std::vector<double>& scales,
                                              const Eigen::VectorXd& a);

/// Nodal |II| from finite-difference Hessians; NaN on the two boundary rings.
Eigen::VectorXd second_ff_norm(const mesh::ScalarField& field);

/// |II| of the boosted radial graph at x, using Lorentz invariance:
/// sqrt(n(n-1)) |lambda| / |x~|^n at the preimage x~.
double second_ff_norm_exact(const radial::BoostedRadialSolution& exact, const Eigen::VectorXd& x);

/// max over spokes of |II| * r for each interior ring (NaN rings skipped).
struct RingProfile {
  std::vector<double> radius;  // mean node radius of the ring
  std::vector<double> value;
};
RingProfile ring_max_scaled(const mesh::ScalarField& field, const Eigen::VectorXd& nodal);

/// Largest |g_a - g_b| / |x_a - x_b| over all pairs of circle samples
/// g_k = g(R (cos t_k, sin t_k)), t_k = 2 pi k / M.
double chord_lipschitz(const Eigen::VectorXd& boundary, double R);

/// w(x) = min_b { g(b) + m |x - b| } over the samples on the circle |b| = R_star,
/// on a disc grid with one spoke per sample.
mesh::ScalarField extend_infconv(const Eigen::VectorXd& boundary, double R_star, double m, int N_r);

/// w(x) = |x| (g(x/|x|) - m) + m with m = (max g + min g) / 2 on the unit disc.
mesh::ScalarField extend_radial(const Eigen::VectorXd& boundary, int N_r);

/// Brute-force Lipschitz constant over random node pairs.
double sampled_lipschitz(const mesh::ScalarField& field, int pairs, std::uint64_t seed);

}  // namespace maxsurf::analysis
