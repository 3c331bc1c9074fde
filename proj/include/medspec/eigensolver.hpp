#pragma once

// Sparse symmetric eigensolvers on top of ARPACK's implicitly restarted
// Lanczos (reverse communication), plus a dense path for tiny systems.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <arpack/arpack.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "medspec/error.hpp"

namespace medspec {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct EigenOptions {
  double tol = 0.0;              ///< ARPACK tolerance; 0 means machine precision
  int max_restarts = 3000;
  double residual_tol = 1e-8;    ///< accepted relative residual per pair
  int refine_sweeps = 6;
  int ncv = 0;                   ///< Lanczos basis size for largest_symmetric; 0 picks max(2 nev + 1, 24)
  std::uint64_t seed = 0x6d656469616c;
};

struct EigenResult {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< columns, B-orthonormal
  std::vector<double> residuals;
  bool dense = false;
};

namespace detail {

inline std::vector<double> start_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  return v;
}

/// Drives dsaupd/dseupd. `op(x, y)` applies the spectral operator, `bop`
/// applies B (generalized modes only).
inline void arpack_drive(int n, int nev, int ncv, arpack::which which, int mode, bool generalized, double sigma,
                         const EigenOptions& opt, const std::function<void(const double*, double*)>& op,
                         const std::function<void(const double*, double*)>& bop,
                         const std::function<void(const double*, const double*, double*)>& op_with_bx,
                         std::vector<double>& values, std::vector<double>& vectors) {
  const arpack::bmat bmat = generalized ? arpack::bmat::generalized : arpack::bmat::identity;
  std::vector<double> resid = start_vector(n, opt.seed);
  std::vector<double> v(static_cast<std::size_t>(n) * ncv), workd(3 * static_cast<std::size_t>(n));
  const int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(lworkl);
  a_int iparam[11] = {0}, ipntr[11] = {0};
  iparam[0] = 1;
  iparam[2] = opt.max_restarts;
  iparam[6] = mode;
  a_int ido = 0, info = 1;  // info = 1: use the supplied start vector
  while (true) {
    arpack::saupd(ido, bmat, n, which, nev, opt.tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
                  workl.data(), lworkl, info);
    double* x = workd.data() + ipntr[0] - 1;
    double* y = workd.data() + ipntr[1] - 1;
    if (ido == -1 || (ido == 1 && mode != 3)) {
      op(x, y);
    } else if (ido == 1) {
      op_with_bx(x, workd.data() + ipntr[2] - 1, y);
    } else if (ido == 2) {
      bop(x, y);
    } else {
      break;
    }
  }
  if (info == 1) {
    std::ostringstream msg;
    msg << "eigensolver reached " << opt.max_restarts << " restarts with " << iparam[4] << " of " << nev
        << " pairs converged";
    fail(ErrorCode::convergence, msg.str());
  }
  if (info < 0) fail(ErrorCode::convergence, "ARPACK dsaupd failed with info " + std::to_string(info));
  std::vector<a_int> select(ncv, 1);
  values.assign(nev, 0.0);
  vectors.assign(static_cast<std::size_t>(n) * nev, 0.0);
  a_int einfo = 0;
  arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), values.data(), vectors.data(), n, sigma, bmat, n,
                which, nev, opt.tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl,
                einfo);
  if (einfo != 0) fail(ErrorCode::convergence, "ARPACK dseupd failed with info " + std::to_string(einfo));
}

}  // namespace detail

/// Smallest `nev` eigenpairs of A x = lambda B x for symmetric positive
/// semidefinite A and positive diagonal B, via shift-invert about a small
/// negative shift (A - sigma B is then positive definite).
inline EigenResult smallest_generalized(const SparseMatrix& A, const Eigen::VectorXd& B, int nev,
                                        const EigenOptions& opt = {}) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.size() != n) fail(ErrorCode::shape, "eigenproblem matrices differ in size");
  if (nev < 1 || nev > n) fail(ErrorCode::domain, "requested eigenpair count outside [1, n]");
  if ((B.array() <= 0).any()) fail(ErrorCode::domain, "mass matrix must be positive");

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(A.coeff(i, i)) / B[i]);
  if (!(scale > 0)) scale = 1.0;

  EigenResult res;
  if (nev + 1 >= n) {
    const Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
    const Eigen::MatrixXd Bd = B.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Bd);
    if (es.info() != Eigen::Success) fail(ErrorCode::convergence, "dense generalized eigensolver failed");
    res.values = es.eigenvalues().head(nev);
    res.vectors = es.eigenvectors().leftCols(nev);
    res.dense = true;
  } else {
    const double sigma = -1e-6 * scale;
    SparseMatrix diag(n, n);
    diag.reserve(Eigen::VectorXi::Ones(n));
    for (int i = 0; i < n; ++i) diag.insert(i, i) = sigma * B[i];
    const SparseMatrix shifted = A - diag;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) fail(ErrorCode::convergence, "factorization of the shifted operator failed");

    auto solve = [&](const double* bx, double* y) {
      Eigen::Map<const Eigen::VectorXd> in(bx, n);
      Eigen::Map<Eigen::VectorXd>(y, n) = ldlt.solve(in);
    };
    auto bop = [&](const double* x, double* y) {
      for (int i = 0; i < n; ++i) y[i] = B[i] * x[i];
    };
    auto op = [&](const double* x, double* y) {
      Eigen::VectorXd bx(n);
      bop(x, bx.data());
      solve(bx.data(), y);
    };
    auto op_bx = [&](const double*, const double* bx, double* y) { solve(bx, y); };
    const int ncv = std::min(n, std::max(2 * nev + 1, 24));
    std::vector<double> vals, vecs;
    detail::arpack_drive(n, nev, ncv, arpack::which::largest_magnitude, 3, true, sigma, opt, op, bop, op_bx, vals,
                         vecs);
    res.values = Eigen::Map<Eigen::VectorXd>(vals.data(), nev);
    res.vectors = Eigen::Map<Eigen::MatrixXd>(vecs.data(), n, nev);

    // Subspace refinement: one shift-invert sweep plus Rayleigh-Ritz whenever
    // a pair misses the residual target.
    auto residuals = [&](const Eigen::VectorXd& lam, const Eigen::MatrixXd& X) {
      std::vector<double> r(X.cols());
      for (int j = 0; j < X.cols(); ++j)
        r[j] = (A * X.col(j) - lam[j] * B.asDiagonal() * X.col(j)).norm() / std::max(X.col(j).norm(), 1e-300);
      return r;
    };
    for (int sweep = 0; sweep < opt.refine_sweeps; ++sweep) {
      const auto r = residuals(res.values, res.vectors);
      if (*std::max_element(r.begin(), r.end()) <= 0.1 * opt.residual_tol * std::max(1.0, scale)) break;
      Eigen::MatrixXd X(n, nev);
      for (int j = 0; j < nev; ++j) X.col(j) = ldlt.solve(B.asDiagonal() * res.vectors.col(j));
      const Eigen::MatrixXd Ar = X.transpose() * (A * X);
      const Eigen::MatrixXd Br = X.transpose() * B.asDiagonal() * X;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ar + Ar.transpose()),
                                                                    0.5 * (Br + Br.transpose()));
      if (es.info() != Eigen::Success) break;
      res.values = es.eigenvalues();
      res.vectors = X * es.eigenvectors();
    }
  }

  // Ascending order, B-normalization.
  std::vector<int> order(nev);
  for (int j = 0; j < nev; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return res.values[a] < res.values[b]; });
  Eigen::VectorXd vals(nev);
  Eigen::MatrixXd vecs(n, nev);
  for (int j = 0; j < nev; ++j) {
    vals[j] = res.values[order[j]];
    Eigen::VectorXd x = res.vectors.col(order[j]);
    x /= std::sqrt(x.dot(B.asDiagonal() * x));
    vecs.col(j) = x;
  }
  res.values = vals;
  res.vectors = vecs;
  res.residuals.resize(nev);
  for (int j = 0; j < nev; ++j)
    res.residuals[j] = (A * vecs.col(j) - vals[j] * B.asDiagonal() * vecs.col(j)).norm() / vecs.col(j).norm();
  const double worst = *std::max_element(res.residuals.begin(), res.residuals.end());
  if (!(worst <= opt.residual_tol * std::max(1.0, scale))) {
    std::ostringstream msg;
    msg << "eigenpairs did not reach the residual target: worst residual " << worst;
    fail(ErrorCode::convergence, msg.str());
  }
  return res;
}

/// Largest `nev` eigenpairs of a symmetric operator given as a matvec.
inline EigenResult largest_symmetric(int n, int nev, const std::function<void(const double*, double*)>& matvec,
                                     const EigenOptions& opt = {}) {
  if (nev < 1 || nev >= n) fail(ErrorCode::domain, "requested eigenpair count outside [1, n-1]");
  const int ncv = std::min(n, opt.ncv > nev ? opt.ncv : std::max(2 * nev + 1, 24));
  std::vector<double> vals, vecs;
  auto none = [](const double*, double*) {};
  auto none3 = [](const double*, const double*, double*) {};
  detail::arpack_drive(n, nev, ncv, arpack::which::largest_algebraic, 1, false, 0.0, opt, matvec, none, none3, vals,
                       vecs);
  EigenResult res;
  std::vector<int> order(nev);
  for (int j = 0; j < nev; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] > vals[b]; });
  res.values.resize(nev);
  res.vectors.resize(n, nev);
  for (int j = 0; j < nev; ++j) {
    res.values[j] = vals[order[j]];
    res.vectors.col(j) = Eigen::Map<Eigen::VectorXd>(vecs.data() + static_cast<std::size_t>(order[j]) * n, n);
  }
  return res;
}

}  // namespace medspec
