#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bresse/model.hpp"

namespace bresse {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform grid of interior nodes x_j = j h, j = 1..n, h = L/(n+1).
/// Boundary values are zero and never stored.
struct Grid {
  int n = 0;
  double L = 0.0;
  double h = 0.0;
  std::vector<double> nodes;
};

Grid make_grid(double L, int n);

/// Bresse phase-space point: displacements and velocities at interior nodes.
struct State {
  Vector phi, psi, w;
  Vector phit, psit, wt;
  double t = 0.0;

  static State zeros(int n);
  int size() const { return static_cast<int>(phi.size()); }
  bool finite() const;
};

/// Timoshenko phase-space point (no longitudinal channel).
struct TimoshenkoState {
  Vector phi, psi;
  Vector phit, psit;
  double t = 0.0;

  static TimoshenkoState zeros(int n);
  int size() const { return static_cast<int>(phi.size()); }
  bool finite() const;
};

/// Drops the longitudinal displacement and velocity.
TimoshenkoState project(const State& state);
/// Embeds a Timoshenko state with w = w_t = 0.
State lift(const TimoshenkoState& state);

/// Finite-difference operators of the coupled elastic problem.
///
/// Field vectors are stacked field-major: [phi; psi; w] for the Bresse system
/// (fields = 3) and [phi; psi] for Timoshenko (fields = 2). Difference
/// quotients live on the n+1 cells between consecutive nodes; zero-order
/// terms entering a cell quantity are averaged from its two end nodes, so the
/// stiffness matrix is exactly the Hessian of the discrete elastic energy.
struct DiscreteOperators {
  Grid grid;
  BeamParams params;
  int fields = 3;

  SparseMatrix Dx;     ///< centered first difference at nodes (n x n)
  SparseMatrix Dxx;    ///< standard second difference at nodes (n x n)
  SparseMatrix Dcell;  ///< (u_{j+1} - u_j)/h on cells ((n+1) x n)
  SparseMatrix Acell;  ///< (u_{j+1} + u_j)/2 on cells ((n+1) x n)

  SparseMatrix shear;      ///< cells <- phi_x + psi + ell w
  SparseMatrix axial;      ///< cells <- w_x - ell phi (empty for Timoshenko)
  SparseMatrix bending;    ///< cells <- psi_x
  SparseMatrix stiffness;  ///< (fields n) x (fields n), symmetric PSD
  Vector mass;             ///< diagonal: rho1, rho2, rho1 per field

  int dofs() const { return fields * grid.n; }

  /// Elastic operator action K u (nodal values of the elastic forces).
  Vector apply(const Vector& u) const { return stiffness * u; }

  /// h u^T K u = b|psi_x|^2 + k|phi_x + psi + ell w|^2 + k0|w_x - ell phi|^2.
  double quadratic_form(const Vector& u) const;

  /// Discrete L2 inner product of stacked nodal vectors.
  double inner(const Vector& a, const Vector& b) const { return grid.h * a.dot(b); }
};

/// Bresse operators (three fields) at curvature params.ell.
DiscreteOperators assemble(const BeamParams& params, const Grid& grid);

/// Timoshenko operators (two fields); params.ell is ignored.
DiscreteOperators assemble_timoshenko(const BeamParams& params, const Grid& grid);

Vector stack(const Vector& a, const Vector& b);
Vector stack(const Vector& a, const Vector& b, const Vector& c);
Vector displacements(const State& s);
Vector velocities(const State& s);
Vector displacements(const TimoshenkoState& s);
Vector velocities(const TimoshenkoState& s);

/// Trapezoidal L2 norm of a nodal vector with zero boundary values.
double l2_norm(const Grid& grid, const Vector& u);
/// L2 norm of a cell-valued vector (exact for the piecewise-linear interpolant's derivative).
double cell_l2_norm(const Grid& grid, const Vector& cells);
/// |u_x| of the piecewise-linear interpolant.
double h1_seminorm(const Grid& grid, const Vector& u);
/// Norm of the cell averages; this is the L2 norm entering the elastic energy.
double averaged_l2_norm(const Grid& grid, const Vector& u);
/// (trapezoid of |u|^q)^(1/q).
double lq_norm(const Grid& grid, const Vector& u, double q);

/// |y|_H: sum of |u_x|^2 over displacements plus |v|^2 over velocities, square-rooted.
double discrete_norm_H(const Grid& grid, const State& state);
/// |y|_{H_ell}: kinetic energy weights rho plus the elastic quadratic form, square-rooted.
double discrete_norm_Hl(const DiscreteOperators& ops, const State& state);
/// |z|_{H_0} for Timoshenko states.
double discrete_norm_H0(const Grid& grid, const TimoshenkoState& state);
/// Timoshenko analogue of discrete_norm_Hl.
double discrete_norm_H0l(const DiscreteOperators& timoshenko_ops, const TimoshenkoState& state);

/// Trapezoidal quadrature of F(phi, psi, w) over [0, L] with zero boundary values.
double quad_potential(const ForcingModel& forcing, const Grid& grid, const State& state);
double quad_potential(const ForcingModel& forcing, const Grid& grid, const TimoshenkoState& state);

/// Discrete Dirichlet sine mode sin(m pi x / L) sampled at the nodes.
Vector sine_mode(const Grid& grid, int m);

}  // namespace bresse
