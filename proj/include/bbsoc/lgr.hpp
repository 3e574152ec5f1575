#pragma once

// Legendre-Gauss-Radau collocation primitives: quadrature rules,
// differentiation matrices, barycentric interpolation and the mesh layout
// of one domain.

#include <span>
#include <vector>

namespace bbsoc {

/// Default per-interval cap on collocation points.
inline constexpr int kDefaultMaxOrder = 14;

/// N-point LGR rule on [-1, +1): points[0] = -1, strictly increasing, positive weights.
struct QuadratureRule {
  int order = 0;
  std::vector<double> points;
  std::vector<double> weights;
  /// Barycentric weights of the N+1 support points (points plus +1).
  std::vector<double> support_barycentric;

  /// Collocation points followed by the non-collocated support point +1.
  std::vector<double> support() const;
};

/// Row-major N x (N+1) matrix D(l, j) = d l_j / d tau at tau_l.
struct DifferentiationMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;

  double operator()(int l, int j) const { return entries[static_cast<std::size_t>(l) * cols + j]; }
  double& operator()(int l, int j) { return entries[static_cast<std::size_t>(l) * cols + j]; }
};

/// Roots of P_{N-1} + P_N via the Jacobi(0, 1) eigenproblem, Newton polished.
QuadratureRule lgr_rule(int n);

/// Cached rule for order n; valid for the lifetime of the program.
const QuadratureRule& cached_lgr_rule(int n);

DifferentiationMatrix differentiation_matrix(const QuadratureRule& rule);

/// Legendre polynomial P_n and its derivative at x.
void legendre(int n, double x, double& p, double& dp);

/// Maps tau in [-1, 1] onto [t_a, t_b].
double affine_map(double tau, double t_a, double t_b);
/// Inverse of affine_map.
double affine_unmap(double t, double t_a, double t_b);

/// Barycentric weights for arbitrary distinct nodes.
std::vector<double> barycentric_weights(std::span<const double> nodes);

/// Barycentric Lagrange interpolation; exact at nodes, no range restriction.
double barycentric_interpolate(std::span<const double> nodes, std::span<const double> bary,
                               std::span<const double> values, double x);

/// Evaluates the state interpolant through the N+1 support values of `rule`.
/// Throws ErrorCode::kExtrapolation outside [-1, 1].
double interpolate_state(std::span<const double> values, const QuadratureRule& rule,
                         double tau_eval);

/// Mesh intervals of one domain in its [-1, 1] coordinate.
struct MeshLayout {
  std::vector<double> breaks;  ///< K+1 values, -1 = T_0 < ... < T_K = +1
  std::vector<int> orders;     ///< K collocation counts N_k >= 1

  int num_intervals() const { return static_cast<int>(orders.size()); }
  int num_points() const;  ///< N^[d] = sum of N_k

  static MeshLayout uniform(int intervals, int order);
  /// Throws ErrorCode::kInvalidArgument if the layout is malformed.
  void validate() const;
};

/// Collocation data of a full domain assembled from its mesh intervals.
///
/// Points are in domain coordinates tau in [-1, 1]. The domain
/// differentiation operator is block-sparse: interval k couples its N_k
/// collocation rows with its N_k + 1 support columns starting at
/// `interval_offset[k]`.
struct DomainGrid {
  MeshLayout mesh;
  std::vector<double> tau;      ///< N+1 support points (collocation points, then +1)
  std::vector<double> weights;  ///< N domain-level quadrature weights
  std::vector<int> interval_offset;
  std::vector<int> interval_of_point;                ///< interval index of each collocation point
  std::vector<DifferentiationMatrix> interval_diff;  ///< scaled by 2 / (T_k - T_{k-1})

  int num_points() const { return static_cast<int>(weights.size()); }
  /// Entry of the domain differentiation matrix (zero outside interval blocks).
  double diff(int row, int col) const;
};

DomainGrid build_domain_grid(const MeshLayout& mesh);

}  // namespace bbsoc
