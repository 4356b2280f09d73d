#pragma once

#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "dtc/errors.hpp"

namespace dtc {

struct EigenResult {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // orthonormal columns, phase-fixed
  Eigen::VectorXd residuals; // ||H v - lambda v|| per pair
  int iterations = 0;
};

struct LanczosOptions {
  double tol_rel = 1e-11;   // residual threshold relative to ||H|| estimate
  int max_subspace = 700;
  int check_every = 10;
  unsigned seed = 20240915;
};

// Lowest-k eigenpairs of a Hermitian operator by Lanczos iteration with full
// reorthogonalization. matvec must implement y = H x; norm_est is any upper
// bound or estimate of ||H|| used to scale the residual tolerance.
//
// Single-vector Krylov: an exactly degenerate eigenvalue yields one copy
// only. Clustered-but-distinct levels (avoided crossings) are resolved;
// callers that need every computational state double-check via labeling.
inline EigenResult lanczos_lowest(
    const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& matvec,
    long dim, int k, double norm_est, const LanczosOptions& opt = {}) {
  if (k < 1 || k >= dim)
    throw NumericalError("eigenpair count must satisfy 1 <= k < dim");
  const int m_max = static_cast<int>(std::min<long>(opt.max_subspace, dim));

  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (long i = 0; i < dim; ++i) v(i) = std::complex<double>(gauss(rng), gauss(rng));
  v /= v.norm();

  std::vector<Eigen::VectorXcd> basis;
  basis.reserve(m_max);
  basis.push_back(v);
  std::vector<double> alpha, beta;
  Eigen::VectorXcd w(dim);

  const double tol_abs = opt.tol_rel * norm_est;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_es;
  int converged_at = -1;

  for (int j = 0; j < m_max; ++j) {
    matvec(basis[j], w);
    const double a = std::real(basis[j].dot(w));
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    // full reorthogonalization, twice for safety
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
    const double b = w.norm();

    const int jj = j + 1;
    const bool check = (jj >= k + 2) && (jj % opt.check_every == 0 ||
                                         jj == m_max || b < 1e-14 * norm_est);
    if (check) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(jj, jj);
      for (int i = 0; i < jj; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < jj) {
          t(i, i + 1) = beta[i];
          t(i + 1, i) = beta[i];
        }
      }
      tri_es.compute(t);
      bool ok = true;
      for (int i = 0; i < k; ++i) {
        const double res = b * std::abs(tri_es.eigenvectors()(jj - 1, i));
        if (res > tol_abs) {
          ok = false;
          break;
        }
      }
      if (ok) {
        converged_at = jj;
        break;
      }
    }

    if (jj == m_max) break;
    if (b < 1e-14 * norm_est) {
      // happy breakdown: restart with a fresh orthogonal direction
      for (long i = 0; i < dim; ++i)
        w(i) = std::complex<double>(gauss(rng), gauss(rng));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) w -= q.dot(w) * q;
      w /= w.norm();
      beta.push_back(0.0);
      basis.push_back(w);
    } else {
      beta.push_back(b);
      basis.push_back(w / b);
    }
  }

  const int m = static_cast<int>(alpha.size());
  if (converged_at < 0) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) {
        t(i, i + 1) = beta[i];
        t(i + 1, i) = beta[i];
      }
    }
    tri_es.compute(t);
    double worst = 0.0;
    for (int i = 0; i < k; ++i)
      worst = std::max(worst, std::abs(tri_es.eigenvectors()(m - 1, i)));
    throw NumericalError(
        "Lanczos did not converge: subspace " + std::to_string(m) +
        ", worst bottom-row weight " + std::to_string(worst) +
        ", tol " + std::to_string(tol_abs));
  }

  const int jj = converged_at;
  EigenResult r;
  r.iterations = jj;
  r.values = tri_es.eigenvalues().head(k);
  r.vectors.resize(dim, k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    for (int q = 0; q < jj; ++q) x += tri_es.eigenvectors()(q, i) * basis[q];
    x /= x.norm();
    // phase fix: largest-magnitude component real positive
    int imax;
    x.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> ph = x(imax) / std::abs(x(imax));
    x *= std::conj(ph);
    r.vectors.col(i) = x;
  }
  r.residuals.resize(k);
  for (int i = 0; i < k; ++i) {
    matvec(r.vectors.col(i), w);
    r.residuals(i) = (w - r.values(i) * r.vectors.col(i)).norm();
  }
  return r;
}

inline EigenResult lanczos_lowest(const Eigen::SparseMatrix<std::complex<double>>& h,
                                  int k, double norm_est,
                                  const LanczosOptions& opt = {}) {
  return lanczos_lowest(
      [&h](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
        y.noalias() = h * x;
      },
      h.rows(), k, norm_est, opt);
}

}  // namespace dtc
