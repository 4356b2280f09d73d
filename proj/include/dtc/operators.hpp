#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "dtc/device.hpp"
#include "dtc/errors.hpp"

namespace dtc {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;

// n = diag(-N..N) in the Cooper-pair number basis.
inline Eigen::MatrixXcd charge_operator(int N) {
  if (N < 1) throw ConfigError("charge cutoff N must be >= 1");
  const int d = 2 * N + 1;
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k - N);
  return n;
}

// cos(phi) = (S + S^dag)/2, sin(phi) = (S - S^dag)/(2i) with S the
// lower-shift operator e^{i phi}|n> = |n-1>. The shift direction is an
// internal convention; spectra and |matrix elements| do not depend on it.
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> cos_sin_operators(int N) {
  if (N < 1) throw ConfigError("charge cutoff N must be >= 1");
  const int d = 2 * N + 1;
  Eigen::MatrixXcd cosm = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd sinm = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k + 1 < d; ++k) {
    cosm(k, k + 1) = 0.5;
    cosm(k + 1, k) = 0.5;
    sinm(k, k + 1) = cd(0.0, -0.5);
    sinm(k + 1, k) = cd(0.0, 0.5);
  }
  return {cosm, sinm};
}

namespace detail {

struct Triplet {
  int r, c;
  cd v;
};

inline std::vector<Triplet> dense_triplets(const Eigen::MatrixXcd& a) {
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(a.size()));
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r)
      if (a(r, c) != cd(0.0, 0.0)) t.push_back({r, c, a(r, c)});
  return t;
}

}  // namespace detail

// Sparse 4-site tensor product: factors[i] acts on site i, nullptr means
// identity. Site 0 is the slowest index.
inline SpMat kron4(const std::array<const Eigen::MatrixXcd*, 4>& factors,
                   const std::array<int, 4>& dims, double coeff = 1.0) {
  std::array<std::vector<detail::Triplet>, 4> site;
  for (int i = 0; i < 4; ++i) {
    if (factors[i]) {
      site[i] = detail::dense_triplets(*factors[i]);
    } else {
      site[i].reserve(dims[i]);
      for (int k = 0; k < dims[i]; ++k) site[i].push_back({k, k, cd(1.0, 0.0)});
    }
  }
  const long dim = static_cast<long>(dims[0]) * dims[1] * dims[2] * dims[3];
  const long s3 = 1, s2 = dims[3], s1 = s2 * dims[2], s0 = s1 * dims[1];
  std::vector<Eigen::Triplet<cd>> out;
  out.reserve(site[0].size() * site[1].size() * site[2].size() *
              site[3].size());
  for (const auto& t0 : site[0])
    for (const auto& t1 : site[1])
      for (const auto& t2 : site[2])
        for (const auto& t3 : site[3]) {
          const long r = t0.r * s0 + t1.r * s1 + t2.r * s2 + t3.r * s3;
          const long c = t0.c * s0 + t1.c * s1 + t2.c * s2 + t3.c * s3;
          out.emplace_back(static_cast<int>(r), static_cast<int>(c),
                           coeff * t0.v * t1.v * t2.v * t3.v);
        }
  SpMat m(dim, dim);
  m.setFromTriplets(out.begin(), out.end());
  return m;
}

// Per-transmon operators embedded into the full (2N+1)^4 charge basis.
struct OperatorSet {
  int cutoff = 0;     // N
  int site_dim = 0;   // 2N+1
  long dim = 0;       // (2N+1)^4
  std::array<SpMat, 4> n_ops, cos_ops, sin_ops;
  SpMat cos_rel, sin_rel;  // cos(phi_4 - phi_3), sin(phi_4 - phi_3)
};

inline OperatorSet build_operator_set(int N) {
  OperatorSet ops;
  ops.cutoff = N;
  ops.site_dim = 2 * N + 1;
  ops.dim = static_cast<long>(ops.site_dim) * ops.site_dim * ops.site_dim *
            ops.site_dim;
  const Eigen::MatrixXcd n = charge_operator(N);
  const auto [cosm, sinm] = cos_sin_operators(N);
  const std::array<int, 4> dims{ops.site_dim, ops.site_dim, ops.site_dim,
                                ops.site_dim};
  for (int i = 0; i < 4; ++i) {
    std::array<const Eigen::MatrixXcd*, 4> f{nullptr, nullptr, nullptr,
                                             nullptr};
    f[i] = &n;
    ops.n_ops[i] = kron4(f, dims);
    f[i] = &cosm;
    ops.cos_ops[i] = kron4(f, dims);
    f[i] = &sinm;
    ops.sin_ops[i] = kron4(f, dims);
  }
  // cos(p4 - p3) = cos p4 cos p3 + sin p4 sin p3; sites 2,3 host transmons 3,4
  {
    std::array<const Eigen::MatrixXcd*, 4> f{nullptr, nullptr, &cosm, &cosm};
    SpMat cc = kron4(f, dims);
    f = {nullptr, nullptr, &sinm, &sinm};
    SpMat ss = kron4(f, dims);
    ops.cos_rel = cc + ss;
    f = {nullptr, nullptr, &cosm, &sinm};  // sin p4 * cos p3
    SpMat sc = kron4(f, dims);
    f = {nullptr, nullptr, &sinm, &cosm};  // cos p4 * sin p3
    SpMat cs = kron4(f, dims);
    ops.sin_rel = sc - cs;
  }
  return ops;
}

// Flux-parametrized system Hamiltonian H(Theta_ex, dTheta_ex/dt) divided by
// hbar, in rad/ns. Flux enters only through the cos/sin coefficients of the
// coupler-loop terms, so re-assembly per time step is two scalar scalings.
struct HamiltonianModel {
  int levels = 0;  // per-transmon dimension in the model basis
  long dim = 0;    // levels^4
  double omega_j5 = 0.0, omega_c34 = 0.0;  // rad/ns
  SpMat h_static;           // kinetic (all W_ij terms) + four cosine potentials
  SpMat cos_rel, sin_rel;   // coupler-loop operators
  SpMat drive;              // (0,0,-1,1) W n
  std::array<Eigen::MatrixXd, 4> site_basis;     // charge basis -> bare eigenbasis
  std::array<Eigen::VectorXd, 4> site_energies;  // bare transmon levels, rad/ns
  bool product_basis = false;  // model basis == bare product basis (truncated)

  SpMat assemble(double theta, double theta_dot) const {
    SpMat h = h_static;
    h += SpMat(cd(-omega_j5 * std::cos(theta), 0.0) * cos_rel);
    h += SpMat(cd(-omega_j5 * std::sin(theta), 0.0) * sin_rel);
    if (theta_dot != 0.0)
      h += SpMat(cd(theta_dot / omega_c34, 0.0) * drive);
    return h;
  }

  // Batched y = H(theta, theta_dot) * x without materializing H.
  void apply(double theta, double theta_dot, const Eigen::MatrixXcd& x,
             Eigen::MatrixXcd& y) const {
    y.noalias() = h_static * x;
    y.noalias() -= (omega_j5 * std::cos(theta)) * (cos_rel * x);
    y.noalias() -= (omega_j5 * std::sin(theta)) * (sin_rel * x);
    if (theta_dot != 0.0) y.noalias() += (theta_dot / omega_c34) * (drive * x);
  }

  // Bare product state |n1 n2 n3 n4> expressed in the model basis.
  Eigen::VectorXcd product_state(const std::array<int, 4>& occ) const {
    for (int i = 0; i < 4; ++i)
      if (occ[i] < 0 || occ[i] >= site_basis[i].cols())
        throw NumericalError("product-state occupation outside model basis");
    if (product_basis) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      v(product_index(occ)) = 1.0;
      return v;
    }
    Eigen::VectorXd v = site_basis[0].col(occ[0]);
    for (int i = 1; i < 4; ++i) {
      const Eigen::VectorXd& b = site_basis[i].col(occ[i]);
      Eigen::VectorXd next(v.size() * b.size());
      for (long k = 0; k < v.size(); ++k)
        next.segment(k * b.size(), b.size()) = v(k) * b;
      v = std::move(next);
    }
    return v.cast<cd>();
  }

  long product_index(const std::array<int, 4>& occ) const {
    return ((static_cast<long>(occ[0]) * levels + occ[1]) * levels + occ[2]) *
               levels +
           occ[3];
  }

  std::array<int, 4> decode_index(long idx) const {
    std::array<int, 4> occ{};
    for (int i = 3; i >= 0; --i) {
      occ[i] = static_cast<int>(idx % levels);
      idx /= levels;
    }
    return occ;
  }

  // Columns of v re-expressed in the bare product basis (for labeling).
  Eigen::MatrixXcd to_bare_product_basis(const Eigen::MatrixXcd& v) const {
    if (product_basis) return v;
    Eigen::MatrixXcd w = v;
    const int L = levels;
    const long ncols = w.cols();
    // contract each site index with site_basis[i]^T
    for (int i = 0; i < 4; ++i) {
      long outer = 1, inner = 1;
      for (int k = 0; k < i; ++k) outer *= L;
      for (int k = i + 1; k < 4; ++k) inner *= L;
      const Eigen::MatrixXd bt = site_basis[i].transpose();
      Eigen::MatrixXcd next(w.rows(), ncols);
      for (long col = 0; col < ncols; ++col) {
        for (long o = 0; o < outer; ++o) {
          Eigen::Map<const Eigen::MatrixXcd> blk(
              w.col(col).data() + o * L * inner, inner, L);
          Eigen::Map<Eigen::MatrixXcd> dst(next.col(col).data() + o * L * inner,
                                           inner, L);
          dst.noalias() = blk * bt.transpose();
        }
      }
      w = std::move(next);
    }
    return w;
  }

  // Upper bound on the spectral norm of H(theta, theta_dot), via row sums.
  double norm_bound(double theta_dot_max = 0.0) const {
    auto inf_norm = [](const SpMat& m) {
      Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
      for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
          rows(it.row()) += std::abs(it.value());
      return rows.maxCoeff();
    };
    return inf_norm(h_static) + omega_j5 * (inf_norm(cos_rel) + inf_norm(sin_rel)) +
           (theta_dot_max / omega_c34) * inf_norm(drive);
  }
};

// H per Eqs.: 4 n^T W n + (theta_dot/omega_C34)(0,0,-1,1) W n + V(theta),
// V = -sum_i omega_Ji cos(phi_i) - omega_J5 cos(phi_4 - phi_3 - theta).
inline HamiltonianModel build_full_model(const DeviceParams& params,
                                         const DerivedParams& d) {
  const int N = params.charge_cutoff;
  const OperatorSet ops = build_operator_set(N);
  HamiltonianModel m;
  m.levels = ops.site_dim;
  m.dim = ops.dim;
  m.omega_j5 = d.omega_j[4];
  m.omega_c34 = d.omega_c34;
  m.cos_rel = ops.cos_rel;
  m.sin_rel = ops.sin_rel;

  SpMat h(ops.dim, ops.dim);
  for (int i = 0; i < 4; ++i) {
    h += SpMat(cd(4.0 * d.w(i, i), 0.0) * SpMat(ops.n_ops[i] * ops.n_ops[i]));
    h += SpMat(cd(-d.omega_j[i], 0.0) * ops.cos_ops[i]);
    for (int j = i + 1; j < 4; ++j)
      h += SpMat(cd(8.0 * d.w(i, j), 0.0) * SpMat(ops.n_ops[i] * ops.n_ops[j]));
  }
  m.h_static = h;

  SpMat dr(ops.dim, ops.dim);
  for (int j = 0; j < 4; ++j)
    dr += SpMat(cd(d.w(3, j) - d.w(2, j), 0.0) * ops.n_ops[j]);
  m.drive = dr;

  // bare single-transmon eigenbases, used for state labeling
  const Eigen::MatrixXcd n1 = charge_operator(N);
  const auto [cosm, sinm] = cos_sin_operators(N);
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd bare =
        (4.0 * d.w(i, i) * (n1 * n1) - d.omega_j[i] * cosm).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bare);
    Eigen::MatrixXd vecs = es.eigenvectors();
    for (int c = 0; c < vecs.cols(); ++c) {
      int imax;
      vecs.col(c).cwiseAbs().maxCoeff(&imax);
      if (vecs(imax, c) < 0) vecs.col(c) *= -1.0;
    }
    m.site_basis[i] = vecs;
    m.site_energies[i] = es.eigenvalues();
  }
  return m;
}

// Convenience wrapper matching the operator-level contract.
inline SpMat assemble_hamiltonian(const OperatorSet& ops,
                                  const DerivedParams& d, double theta,
                                  double theta_dot) {
  SpMat h(ops.dim, ops.dim);
  for (int i = 0; i < 4; ++i) {
    h += SpMat(cd(4.0 * d.w(i, i), 0.0) * SpMat(ops.n_ops[i] * ops.n_ops[i]));
    h += SpMat(cd(-d.omega_j[i], 0.0) * ops.cos_ops[i]);
    for (int j = i + 1; j < 4; ++j)
      h += SpMat(cd(8.0 * d.w(i, j), 0.0) * SpMat(ops.n_ops[i] * ops.n_ops[j]));
  }
  h += SpMat(cd(-d.omega_j[4] * std::cos(theta), 0.0) * ops.cos_rel);
  h += SpMat(cd(-d.omega_j[4] * std::sin(theta), 0.0) * ops.sin_rel);
  if (theta_dot != 0.0) {
    for (int j = 0; j < 4; ++j)
      h += SpMat(cd((theta_dot / d.omega_c34) * (d.w(3, j) - d.w(2, j)), 0.0) *
                 ops.n_ops[j]);
  }
  return h;
}

// Project onto the lowest m levels of each bare transmon (kinetic diagonal
// plus its own cosine potential). Reduces the dimension from (2N+1)^4 to m^4
// while keeping the flux-dependent loop terms as projected operators.
inline HamiltonianModel truncate_to_eigenbasis(const DeviceParams& params,
                                               const DerivedParams& d, int m) {
  const int N = params.charge_cutoff;
  const int full = 2 * N + 1;
  if (m < 2 || m > full)
    throw ConfigError("per-transmon level count must lie in [2, 2N+1]");

  const Eigen::MatrixXcd n1 = charge_operator(N);
  const auto [cosm, sinm] = cos_sin_operators(N);

  std::array<Eigen::MatrixXcd, 4> nr, cr, sr;
  HamiltonianModel mdl;
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd bare =
        (4.0 * d.w(i, i) * (n1 * n1) - d.omega_j[i] * cosm).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bare);
    Eigen::MatrixXd b = es.eigenvectors().leftCols(m);
    for (int c = 0; c < m; ++c) {
      int imax;
      b.col(c).cwiseAbs().maxCoeff(&imax);
      if (b(imax, c) < 0) b.col(c) *= -1.0;
    }
    mdl.site_basis[i] = b;
    mdl.site_energies[i] = es.eigenvalues().head(m);
    const Eigen::MatrixXcd bc = b.cast<cd>();
    nr[i] = bc.adjoint() * n1 * bc;
    cr[i] = bc.adjoint() * cosm * bc;
    sr[i] = bc.adjoint() * sinm * bc;
  }

  mdl.levels = m;
  mdl.dim = static_cast<long>(m) * m * m * m;
  mdl.omega_j5 = d.omega_j[4];
  mdl.omega_c34 = d.omega_c34;
  mdl.product_basis = true;
  const std::array<int, 4> dims{m, m, m, m};

  // static part: bare level energies on the diagonal + kinetic cross terms
  SpMat h(mdl.dim, mdl.dim);
  {
    std::vector<Eigen::Triplet<cd>> diag;
    diag.reserve(mdl.dim);
    for (long idx = 0; idx < mdl.dim; ++idx) {
      const auto occ = [&] {
        std::array<int, 4> o{};
        long r = idx;
        for (int i = 3; i >= 0; --i) {
          o[i] = static_cast<int>(r % m);
          r /= m;
        }
        return o;
      }();
      double e = 0.0;
      for (int i = 0; i < 4; ++i) e += mdl.site_energies[i](occ[i]);
      diag.emplace_back(static_cast<int>(idx), static_cast<int>(idx), cd(e, 0.0));
    }
    h.setFromTriplets(diag.begin(), diag.end());
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      std::array<const Eigen::MatrixXcd*, 4> f{nullptr, nullptr, nullptr,
                                               nullptr};
      f[i] = &nr[i];
      f[j] = &nr[j];
      h += kron4(f, dims, 8.0 * d.w(i, j));
    }
  mdl.h_static = h;

  {
    std::array<const Eigen::MatrixXcd*, 4> f{nullptr, nullptr, &cr[2], &cr[3]};
    SpMat cc = kron4(f, dims);
    f = {nullptr, nullptr, &sr[2], &sr[3]};
    SpMat ss = kron4(f, dims);
    mdl.cos_rel = cc + ss;
    f = {nullptr, nullptr, &cr[2], &sr[3]};
    SpMat sc = kron4(f, dims);
    f = {nullptr, nullptr, &sr[2], &cr[3]};
    SpMat cs = kron4(f, dims);
    mdl.sin_rel = sc - cs;
  }

  SpMat dr(mdl.dim, mdl.dim);
  for (int j = 0; j < 4; ++j) {
    std::array<const Eigen::MatrixXcd*, 4> f{nullptr, nullptr, nullptr,
                                             nullptr};
    f[j] = &nr[j];
    dr += kron4(f, dims, d.w(3, j) - d.w(2, j));
  }
  mdl.drive = dr;
  return mdl;
}

}  // namespace dtc
