#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dtc/lanczos.hpp"
#include "dtc/operators.hpp"
#include "dtc/parallel.hpp"

namespace dtc {

struct LevelLabel {
  std::array<int, 4> occ{};  // bare occupation (n1, n2, n3, n4) of max overlap
  double overlap = 0.0;      // squared overlap with that product state
};

// Low-lying spectrum at one flux point. Frequencies are relative to the
// labeled |0000> state ("omega_00 is set to the origin").
struct SpectrumResult {
  double theta = 0.0;            // radians
  Eigen::VectorXd omegas;        // rad/ns, ascending, ground-referenced
  std::vector<LevelLabel> labels;
  std::array<int, 4> comp_index{};  // eigenstate index of |ij>, at 2i+j
  double zz = 0.0;     // omega_11 - omega_10 - omega_01, rad/ns
  double delta = 0.0;  // omega_01 - omega_10, rad/ns
  Eigen::MatrixXcd vectors;  // eigenvectors (model basis), kept when requested

  double comp_omega(int i, int j) const { return omegas(comp_index[2 * i + j]); }
};

struct SpectrumOptions {
  int k = 20;  // eigenpair count; covers the computational manifold plus
               // coupler-excited and second-excited levels
  LanczosOptions lanczos{};
  bool keep_vectors = false;
  int threads = 1;
  double label_floor = 0.5;  // minimum bare overlap for a computational label;
                             // lowered near avoided crossings (zz-dip search)
};

// Lowest-k eigenpairs of H(theta, 0) with orthonormality/residual checks.
inline EigenResult eigensolve(const HamiltonianModel& model, double theta,
                              int k, const LanczosOptions& opt = {}) {
  const SpMat h = model.assemble(theta, 0.0);
  auto matvec = [&h](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y.noalias() = h * x;
  };
  double norm_est = 0.0;
  {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
    for (int c = 0; c < h.outerSize(); ++c)
      for (SpMat::InnerIterator it(h, c); it; ++it)
        rows(it.row()) += std::abs(it.value());
    norm_est = rows.maxCoeff();
  }
  EigenResult r = lanczos_lowest(matvec, model.dim, k, norm_est, opt);
  for (int i = 0; i < k; ++i) {
    if (r.residuals(i) > 10.0 * opt.tol_rel * norm_est + 1e-12)
      throw NumericalError("eigensolve residual " +
                           std::to_string(r.residuals(i)) +
                           " above tolerance at pair " + std::to_string(i));
    for (int j = 0; j < i; ++j)
      if (std::abs(r.vectors.col(i).dot(r.vectors.col(j))) > 1e-10)
        throw NumericalError("eigenvectors not orthonormal to 1e-10");
  }
  return r;
}

namespace detail {

// Assign computational labels by maximal squared overlap with the bare
// product states; injective; ties broken toward lower energy.
inline void label_computational(const HamiltonianModel& model,
                                const Eigen::MatrixXcd& bare_coords,
                                SpectrumResult& out,
                                double label_floor = 0.5) {
  const int k = static_cast<int>(bare_coords.cols());
  out.labels.resize(k);
  for (int e = 0; e < k; ++e) {
    long imax = 0;
    double best = 0.0;
    for (long r = 0; r < bare_coords.rows(); ++r) {
      const double p = std::norm(bare_coords(r, e));
      if (p > best) {
        best = p;
        imax = r;
      }
    }
    out.labels[e].occ = model.decode_index(imax);
    out.labels[e].overlap = best;
  }
  std::array<int, 4> comp{-1, -1, -1, -1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const long row = model.product_index({i, j, 0, 0});
      int winner = -1;
      double best = -1.0;
      for (int e = 0; e < k; ++e) {  // ascending energy; strict > keeps the
        const double p = std::norm(bare_coords(row, e));  // lower state on ties
        if (p > best + 1e-12) {
          best = p;
          winner = e;
        }
      }
      if (best < label_floor)
        throw NumericalError("labeling ambiguity: |" + std::to_string(i) +
                             std::to_string(j) + "> overlap " +
                             std::to_string(best) + " < " +
                             std::to_string(label_floor));
      comp[2 * i + j] = winner;
    }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      if (comp[a] == comp[b])
        throw NumericalError("labeling not injective: two computational "
                             "labels map to eigenstate " +
                             std::to_string(comp[a]));
  out.comp_index = comp;
}

// Re-assign computational labels by maximal overlap with reference
// eigenvectors from a neighboring flux point (adiabatic continuation);
// re-references omegas and recomputes zz/delta. cur must carry vectors.
inline void continue_labels(const Eigen::MatrixXcd& ref_vectors,
                            const std::array<int, 4>& ref_comp,
                            SpectrumResult& cur) {
  std::array<int, 4> comp{-1, -1, -1, -1};
  for (int c = 0; c < 4; ++c) {
    const Eigen::VectorXcd vp = ref_vectors.col(ref_comp[c]);
    int winner = -1;
    double best = -1.0;
    for (int e = 0; e < cur.vectors.cols(); ++e) {
      const double p = std::norm(vp.dot(cur.vectors.col(e)));
      if (p > best + 1e-12) {
        best = p;
        winner = e;
      }
    }
    if (best < 0.5)
      throw NumericalError("label continuation ambiguity at theta/pi = " +
                           std::to_string(cur.theta / constants::pi));
    comp[c] = winner;
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      if (comp[a] == comp[b])
        throw NumericalError("label continuation not injective at theta/pi = " +
                             std::to_string(cur.theta / constants::pi));
  cur.comp_index = comp;
  const double ground = cur.omegas(comp[0]);
  cur.omegas.array() -= ground;
  cur.zz = cur.comp_omega(1, 1) - cur.comp_omega(1, 0) - cur.comp_omega(0, 1);
  cur.delta = cur.comp_omega(0, 1) - cur.comp_omega(1, 0);
}

}  // namespace detail

inline SpectrumResult spectrum_at(const HamiltonianModel& model, double theta,
                                  const SpectrumOptions& opt = {}) {
  EigenResult r = eigensolve(model, theta, opt.k, opt.lanczos);
  SpectrumResult out;
  out.theta = theta;
  const Eigen::MatrixXcd bare = model.to_bare_product_basis(r.vectors);
  detail::label_computational(model, bare, out, opt.label_floor);
  const double ground = r.values(out.comp_index[0]);
  out.omegas = r.values.array() - ground;
  out.zz = out.comp_omega(1, 1) - out.comp_omega(1, 0) - out.comp_omega(0, 1);
  out.delta = out.comp_omega(0, 1) - out.comp_omega(1, 0);
  if (opt.keep_vectors) out.vectors = r.vectors;
  return out;
}

// Spectrum along a flux grid. Points are solved concurrently; computational
// labels are then continued point-to-point by maximal overlap with the
// previous point's eigenvectors (falling back to product labeling at the
// first point), which survives avoided crossings where bare overlaps swap.
inline std::vector<SpectrumResult> sweep_spectrum(const HamiltonianModel& model,
                                                  const std::vector<double>& theta_grid,
                                                  const SpectrumOptions& opt = {}) {
  const long n = static_cast<long>(theta_grid.size());
  std::vector<SpectrumResult> out(n);
  SpectrumOptions popt = opt;
  popt.keep_vectors = true;
  // interior points are relabeled by continuation, so only the first point
  // (the anchor) needs an unambiguous bare-product assignment
  popt.label_floor = 0.0;
  parallel_for(n, opt.threads, [&](long i) {
    try {
      out[i] = spectrum_at(model, theta_grid[i], popt);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at theta/pi = " +
                           std::to_string(theta_grid[i] / constants::pi));
    }
  });
  if (n > 0)
    for (int c = 0; c < 4; ++c)
      if (out[0].labels[out[0].comp_index[c]].overlap < opt.label_floor)
        throw NumericalError(
            "sweep anchor labeling ambiguous at theta/pi = " +
            std::to_string(theta_grid[0] / constants::pi));
  // sequential label continuation
  for (long i = 1; i < n; ++i)
    detail::continue_labels(out[i - 1].vectors, out[i - 1].comp_index, out[i]);
  if (!opt.keep_vectors)
    for (auto& s : out) s.vectors.resize(0, 0);
  return out;
}

struct IdlePoint {
  double theta = 0.0;     // radians
  double zz = 0.0;        // residual ZZ at the minimum, rad/ns
  SpectrumResult spectrum;  // with eigenvectors
};

// Locate the idling point as the interior minimum of |zeta_ZZ| in the given
// bracket, by coarse scan followed by golden-section refinement.
inline IdlePoint find_idle_point(const HamiltonianModel& model, double theta_lo,
                                 double theta_hi,
                                 const SpectrumOptions& opt = {},
                                 double theta_tol = 1e-5 * constants::pi) {
  if (!(theta_hi > theta_lo)) throw CalibrationError("empty idle-point bracket");
  SpectrumOptions sopt = opt;
  sopt.keep_vectors = false;
  auto f = [&](double th) { return std::abs(spectrum_at(model, th, sopt).zz); };

  const int n_scan = 7;
  std::vector<double> ts(n_scan), fs(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    ts[i] = theta_lo + (theta_hi - theta_lo) * i / (n_scan - 1);
    fs[i] = f(ts[i]);
  }
  int imin = 0;
  for (int i = 1; i < n_scan; ++i)
    if (fs[i] < fs[imin]) imin = i;
  if (imin == 0 || imin == n_scan - 1)
    throw CalibrationError("no interior |zz| minimum in bracket [" +
                           std::to_string(theta_lo / constants::pi) + "pi, " +
                           std::to_string(theta_hi / constants::pi) + "pi]");

  double a = ts[imin - 1], b = ts[imin + 1];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > theta_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  IdlePoint ip;
  ip.theta = 0.5 * (a + b);
  SpectrumOptions vopt = opt;
  vopt.keep_vectors = true;
  ip.spectrum = spectrum_at(model, ip.theta, vopt);
  ip.zz = ip.spectrum.zz;
  return ip;
}

// Effective transverse coupling g(theta) = <01(Theta_0)| H(theta, 0) |10(Theta_0)>
// using eigenstates frozen at the idling point. Exactly zero at theta = Theta_0.
inline std::complex<double> effective_coupling(const HamiltonianModel& model,
                                               double theta,
                                               const Eigen::VectorXcd& idle_01,
                                               const Eigen::VectorXcd& idle_10) {
  if (idle_01.size() != model.dim || idle_10.size() != model.dim)
    throw NumericalError("idle states do not match model dimension");
  Eigen::MatrixXcd y(model.dim, 1);
  model.apply(theta, 0.0, idle_10, y);
  return idle_01.dot(y.col(0));
}

struct ConvergenceRow {
  int cutoff = 0;
  double value = 0.0;
  double rel_diff = 0.0;  // |v_i - v_{i-1}| / |v_i|, 0 for the first row
};

// Quantity-vs-cutoff table with successive relative differences.
inline std::vector<ConvergenceRow> cutoff_convergence(
    const std::vector<int>& n_list,
    const std::function<double(int)>& quantity) {
  std::vector<ConvergenceRow> rows;
  for (size_t i = 0; i < n_list.size(); ++i) {
    ConvergenceRow r;
    r.cutoff = n_list[i];
    r.value = quantity(n_list[i]);
    if (i > 0)
      r.rel_diff = std::abs(r.value - rows.back().value) /
                   std::max(std::abs(r.value), 1e-300);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dtc
