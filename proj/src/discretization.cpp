#include "bresse/discretization.hpp"

#include <cmath>
#include <vector>

namespace bresse {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Places blocks side by side: [B_0, B_1, ...], each (rows x n).
SparseMatrix hstack(const std::vector<SparseMatrix>& blocks) {
  const int rows = static_cast<int>(blocks.front().rows());
  int cols = 0;
  std::vector<Triplet> t;
  for (const auto& b : blocks) {
    for (int k = 0; k < b.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
        t.emplace_back(static_cast<int>(it.row()), cols + static_cast<int>(it.col()), it.value());
      }
    }
    cols += static_cast<int>(b.cols());
  }
  return from_triplets(rows, cols, t);
}

SparseMatrix zero_block(int rows, int cols) { return SparseMatrix(rows, cols); }

void build_scalar_operators(DiscreteOperators& ops) {
  const int n = ops.grid.n;
  const double h = ops.grid.h;
  std::vector<Triplet> dx, dxx, dc, ac;
  for (int i = 0; i < n; ++i) {
    dxx.emplace_back(i, i, -2.0 / (h * h));
    if (i > 0) {
      dxx.emplace_back(i, i - 1, 1.0 / (h * h));
      dx.emplace_back(i, i - 1, -0.5 / h);
    }
    if (i + 1 < n) {
      dxx.emplace_back(i, i + 1, 1.0 / (h * h));
      dx.emplace_back(i, i + 1, 0.5 / h);
    }
  }
  // Cell c lies between node c and node c+1 (nodes 0 and n+1 are the boundary).
  for (int c = 0; c <= n; ++c) {
    if (c < n) {
      dc.emplace_back(c, c, 1.0 / h);
      ac.emplace_back(c, c, 0.5);
    }
    if (c > 0) {
      dc.emplace_back(c, c - 1, -1.0 / h);
      ac.emplace_back(c, c - 1, 0.5);
    }
  }
  ops.Dx = from_triplets(n, n, dx);
  ops.Dxx = from_triplets(n, n, dxx);
  ops.Dcell = from_triplets(n + 1, n, dc);
  ops.Acell = from_triplets(n + 1, n, ac);
}

}  // namespace

Grid make_grid(double L, int n) {
  if (n < 2) throw ConfigError("grid needs at least 2 interior nodes");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid length must be positive");
  Grid g;
  g.n = n;
  g.L = L;
  g.h = L / (n + 1);
  g.nodes.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) g.nodes[static_cast<std::size_t>(j)] = (j + 1) * g.h;
  return g;
}

State State::zeros(int n) {
  State s;
  s.phi = s.psi = s.w = s.phit = s.psit = s.wt = Vector::Zero(n);
  return s;
}

bool State::finite() const {
  return phi.allFinite() && psi.allFinite() && w.allFinite() && phit.allFinite() &&
         psit.allFinite() && wt.allFinite() && std::isfinite(t);
}

TimoshenkoState TimoshenkoState::zeros(int n) {
  TimoshenkoState s;
  s.phi = s.psi = s.phit = s.psit = Vector::Zero(n);
  return s;
}

bool TimoshenkoState::finite() const {
  return phi.allFinite() && psi.allFinite() && phit.allFinite() && psit.allFinite() &&
         std::isfinite(t);
}

TimoshenkoState project(const State& s) {
  TimoshenkoState z;
  z.phi = s.phi;
  z.psi = s.psi;
  z.phit = s.phit;
  z.psit = s.psit;
  z.t = s.t;
  return z;
}

State lift(const TimoshenkoState& z) {
  State s = State::zeros(z.size());
  s.phi = z.phi;
  s.psi = z.psi;
  s.phit = z.phit;
  s.psit = z.psit;
  s.t = z.t;
  return s;
}

double DiscreteOperators::quadratic_form(const Vector& u) const {
  return grid.h * u.dot(stiffness * u);
}

DiscreteOperators assemble(const BeamParams& params, const Grid& grid) {
  params.validate();
  DiscreteOperators ops;
  ops.grid = grid;
  ops.params = params;
  ops.fields = 3;
  build_scalar_operators(ops);

  const int n = grid.n;
  const double ell = params.ell;
  const SparseMatrix Z = zero_block(n + 1, n);
  const SparseMatrix ellA = ell * ops.Acell;
  ops.shear = hstack({ops.Dcell, ops.Acell, ellA});
  ops.axial = hstack({SparseMatrix(-ellA), Z, ops.Dcell});
  ops.bending = hstack({Z, ops.Dcell, Z});

  SparseMatrix K = params.b * SparseMatrix(ops.bending.transpose()) * ops.bending +
                   params.k * SparseMatrix(ops.shear.transpose()) * ops.shear +
                   params.k0 * SparseMatrix(ops.axial.transpose()) * ops.axial;
  ops.stiffness = (K + SparseMatrix(K.transpose())) * 0.5;
  ops.stiffness.makeCompressed();

  ops.mass.resize(3 * n);
  ops.mass.segment(0, n).setConstant(params.rho1);
  ops.mass.segment(n, n).setConstant(params.rho2);
  ops.mass.segment(2 * n, n).setConstant(params.rho1);
  return ops;
}

DiscreteOperators assemble_timoshenko(const BeamParams& params, const Grid& grid) {
  params.validate();
  DiscreteOperators ops;
  ops.grid = grid;
  ops.params = params;
  ops.params.ell = 0.0;
  ops.fields = 2;
  build_scalar_operators(ops);

  const int n = grid.n;
  const SparseMatrix Z = zero_block(n + 1, n);
  ops.shear = hstack({ops.Dcell, ops.Acell});
  ops.bending = hstack({Z, ops.Dcell});
  ops.axial = SparseMatrix(n + 1, 2 * n);

  SparseMatrix K = params.b * SparseMatrix(ops.bending.transpose()) * ops.bending +
                   params.k * SparseMatrix(ops.shear.transpose()) * ops.shear;
  ops.stiffness = (K + SparseMatrix(K.transpose())) * 0.5;
  ops.stiffness.makeCompressed();

  ops.mass.resize(2 * n);
  ops.mass.segment(0, n).setConstant(params.rho1);
  ops.mass.segment(n, n).setConstant(params.rho2);
  return ops;
}

Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

Vector stack(const Vector& a, const Vector& b, const Vector& c) {
  Vector out(a.size() + b.size() + c.size());
  out << a, b, c;
  return out;
}

Vector displacements(const State& s) { return stack(s.phi, s.psi, s.w); }
Vector velocities(const State& s) { return stack(s.phit, s.psit, s.wt); }
Vector displacements(const TimoshenkoState& s) { return stack(s.phi, s.psi); }
Vector velocities(const TimoshenkoState& s) { return stack(s.phit, s.psit); }

double l2_norm(const Grid& grid, const Vector& u) { return std::sqrt(grid.h * u.squaredNorm()); }

double cell_l2_norm(const Grid& grid, const Vector& cells) {
  return std::sqrt(grid.h * cells.squaredNorm());
}

double h1_seminorm(const Grid& grid, const Vector& u) {
  double sum = 0.0;
  const auto n = u.size();
  for (Eigen::Index c = 0; c <= n; ++c) {
    const double right = c < n ? u[c] : 0.0;
    const double left = c > 0 ? u[c - 1] : 0.0;
    sum += (right - left) * (right - left);
  }
  return std::sqrt(sum / grid.h);
}

double averaged_l2_norm(const Grid& grid, const Vector& u) {
  double sum = 0.0;
  const auto n = u.size();
  for (Eigen::Index c = 0; c <= n; ++c) {
    const double right = c < n ? u[c] : 0.0;
    const double left = c > 0 ? u[c - 1] : 0.0;
    sum += 0.25 * (right + left) * (right + left);
  }
  return std::sqrt(grid.h * sum);
}

double lq_norm(const Grid& grid, const Vector& u, double q) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) sum += std::pow(std::abs(u[i]), q);
  return std::pow(grid.h * sum, 1.0 / q);
}

double discrete_norm_H(const Grid& grid, const State& s) {
  double sum = 0.0;
  for (const Vector* u : {&s.phi, &s.psi, &s.w}) sum += std::pow(h1_seminorm(grid, *u), 2);
  for (const Vector* v : {&s.phit, &s.psit, &s.wt}) sum += grid.h * v->squaredNorm();
  return std::sqrt(sum);
}

double discrete_norm_Hl(const DiscreteOperators& ops, const State& s) {
  const Vector v = velocities(s);
  const double kinetic = ops.grid.h * v.dot(ops.mass.cwiseProduct(v));
  return std::sqrt(std::max(0.0, kinetic + ops.quadratic_form(displacements(s))));
}

double discrete_norm_H0(const Grid& grid, const TimoshenkoState& s) {
  const double sum = std::pow(h1_seminorm(grid, s.phi), 2) + std::pow(h1_seminorm(grid, s.psi), 2) +
                     grid.h * (s.phit.squaredNorm() + s.psit.squaredNorm());
  return std::sqrt(sum);
}

double discrete_norm_H0l(const DiscreteOperators& ops, const TimoshenkoState& s) {
  const Vector v = velocities(s);
  const double kinetic = ops.grid.h * v.dot(ops.mass.cwiseProduct(v));
  return std::sqrt(std::max(0.0, kinetic + ops.quadratic_form(displacements(s))));
}

double quad_potential(const ForcingModel& forcing, const Grid& grid, const State& s) {
  // Boundary nodes carry half weight and zero displacement.
  double sum = forcing.potential(Vec3{0.0, 0.0, 0.0});
  for (int j = 0; j < grid.n; ++j) sum += forcing.potential(Vec3{s.phi[j], s.psi[j], s.w[j]});
  return grid.h * sum;
}

double quad_potential(const ForcingModel& forcing, const Grid& grid, const TimoshenkoState& s) {
  double sum = forcing.potential(Vec3{0.0, 0.0, 0.0});
  for (int j = 0; j < grid.n; ++j) sum += forcing.potential(Vec3{s.phi[j], s.psi[j], 0.0});
  return grid.h * sum;
}

Vector sine_mode(const Grid& grid, int m) {
  Vector u(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    u[j] = std::sin(m * std::numbers::pi * grid.nodes[static_cast<std::size_t>(j)] / grid.L);
  }
  return u;
}

}  // namespace bresse
