#include "curved/linear_stability.hpp"

#include "curved/errors.hpp"
#include "curved/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace curved {

namespace {

using Complex = std::complex<double>;

std::vector<Complex> eigenvalues_of(const Eigen::MatrixXd& a) {
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  std::vector<Complex> out(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
  return out;
}

// Orthonormal basis of {v : B^T J v = 0}.
Eigen::MatrixXd skew_complement(const Eigen::MatrixXd& basis) {
  const Eigen::Index dim = basis.rows();
  const Eigen::Index half = dim / 2;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
  j.topRightCorner(half, half) = -Eigen::MatrixXd::Identity(half, half);
  j.bottomLeftCorner(half, half) = Eigen::MatrixXd::Identity(half, half);
  const Eigen::MatrixXd constraints = basis.transpose() * j;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const Eigen::Index rank = basis.cols();
  return svd.matrixV().rightCols(dim - rank);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& basis) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  return qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
}

void require_full_rank(const Eigen::MatrixXd& basis, const char* name) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 1e-10 * sv[0]) {
    throw Error(ErrorKind::DegenerateBasis, std::string(name) + " basis is rank deficient");
  }
}

double invariance_residual(const Eigen::MatrixXd& l, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd lq = l * q;
  return (lq - q * (q.transpose() * lq)).norm() / l.norm();
}

// +-sqrt(lambda) per eigenvalue; zero eigenvalues contribute a (0, 0) pair.
void append_pairs(std::vector<Complex>& out, double lambda) {
  const Complex root = std::sqrt(Complex(lambda, 0.0));
  out.push_back(root);
  out.push_back(-root);
}

}  // namespace

LinearizationBlocks assemble_blocks(const MassVector& masses, const RingConfiguration& ring,
                                    double omega, double fixed_point_tolerance) {
  const auto n = static_cast<Eigen::Index>(ring.size());
  if (static_cast<Eigen::Index>(masses.size()) != n) throw Error(ErrorKind::DimensionMismatch, "masses vs ring");
  const double residual = fixed_point_residual(masses, ring).lpNorm<Eigen::Infinity>();
  if (residual > fixed_point_tolerance) {
    std::ostringstream msg;
    msg << "criterion residual " << residual << " exceeds " << fixed_point_tolerance;
    throw Error(ErrorKind::NotAFixedPoint, msg.str());
  }

  LinearizationBlocks b;
  b.M = masses.as_vector();
  b.H = Eigen::MatrixXd::Zero(n, n);
  b.G = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double delta = ring[static_cast<std::size_t>(i)] - ring[static_cast<std::size_t>(j)];
      const double cos_d = std::cos(delta);
      const double sin_d = std::abs(std::sin(delta));
      const double w = b.M[i] * b.M[j] / (sin_d * sin_d * sin_d);
      b.H(i, j) = w;
      b.H(i, i) -= w * cos_d;
      b.G(i, j) = -2.0 * w * cos_d;
      b.G(i, i) += 2.0 * w * cos_d;
    }
  }
  b.omega = omega;
  b.Homega = b.H - omega * omega * b.M.asDiagonal().toDenseMatrix();
  return b;
}

Eigen::MatrixXd assemble_L(const LinearizationBlocks& b) {
  const Eigen::Index n = b.size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  const Eigen::MatrixXd minv = b.M.cwiseInverse().asDiagonal();
  l.block(0, 2 * n, n, n) = minv;
  l.block(n, 3 * n, n, n) = minv;
  l.block(2 * n, 0, n, n) = b.Homega;
  l.block(3 * n, n, n, n) = b.G;
  return l;
}

Eigen::MatrixXd assemble_L_general(const MassVector& masses, const PhaseState& state) {
  state.validate();
  const Eigen::Index n = state.size();
  if (static_cast<Eigen::Index>(masses.size()) != n) throw Error(ErrorKind::DimensionMismatch, "masses vs state");
  const Eigen::MatrixXd hv = force_hessian(masses, state.theta_span(), state.phi_span());

  Eigen::VectorXd minv(n), k(n), cinv(n), nn(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = masses[static_cast<std::size_t>(i)];
    const auto [s, c] = polar_trig(state.theta[i]);
    const double p = state.pphi[i];
    minv[i] = 1.0 / m;
    cinv[i] = 1.0 / (s * s);
    k[i] = -2.0 * p * c / (m * s * s * s);
    nn[i] = -p * p * (1.0 + 2.0 * c * c) / (m * s * s * s * s);
  }

  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  l.block(0, 2 * n, n, n) = minv.asDiagonal();
  l.block(n, 0, n, n) = k.asDiagonal();
  l.block(n, 3 * n, n, n) = minv.cwiseProduct(cinv).asDiagonal();
  l.block(2 * n, 0, n, n) = hv.topLeftCorner(n, n);
  l.block(2 * n, 0, n, n).diagonal() += nn;
  l.block(2 * n, n, n, n) = hv.topRightCorner(n, n);
  l.block(2 * n, 3 * n, n, n) = (-k).asDiagonal();
  l.block(3 * n, 0, n, n) = hv.bottomLeftCorner(n, n);
  l.block(3 * n, n, n, n) = hv.bottomRightCorner(n, n);
  return l;
}

NullVectors null_vectors(const RingConfiguration& ring) {
  const auto n = static_cast<Eigen::Index>(ring.size());
  NullVectors v{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd::Ones(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double delta = ring[static_cast<std::size_t>(i)] - ring[0];
    v.v1[i] = std::cos(delta);
    v.v2[i] = std::sin(delta);
  }
  return v;
}

NullResiduals null_structure_check(const LinearizationBlocks& b, const NullVectors& v) {
  return {(b.H * v.v1).norm(), (b.H * v.v2).norm(), (b.G * v.v3).norm(), b.H.norm(), b.G.norm()};
}

double lambda1_closed_form(const TriangleShape& shape, const std::array<double, 3>& m) {
  const double err = three_body_relation_error(m, shape);
  if (err > 1e-8) {
    std::ostringstream msg;
    msg << "shape and masses violate the fixed-point relations (relative error " << err << ")";
    throw Error(ErrorKind::InconsistentPair, msg.str());
  }
  const double sa = std::sin(shape.alpha());
  const double sb = std::sin(shape.beta());
  const double sab = std::sin(shape.alpha() + shape.beta());
  return -(m[1] / (sa * sa)) * sb / (sab * sa)   //
         - (m[1] / (sb * sb)) * sa / (sab * sb)  //
         - (m[2] / (sb * sb)) * sab / (sa * sb);
}

Eigen::VectorXd mass_weighted_eigenvalues(const Eigen::MatrixXd& a, const Eigen::VectorXd& masses) {
  const Eigen::VectorXd w = masses.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd sym = w.asDiagonal() * a * w.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sym + sym.transpose()),
                                                              Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

SpectralData spectral_analysis(const LinearizationBlocks& b, double zero_threshold) {
  SpectralData out;
  out.h_eigenvalues = mass_weighted_eigenvalues(b.H, b.M);
  out.homega_eigenvalues = mass_weighted_eigenvalues(b.Homega, b.M);
  out.g_eigenvalues = mass_weighted_eigenvalues(b.G, b.M);

  auto is_zero = [&](const Eigen::VectorXd& eig, Eigen::Index i) {
    const double scale = eig.cwiseAbs().maxCoeff();
    return std::abs(eig[i]) <= zero_threshold * scale;
  };

  const Eigen::Index n = b.size();
  if (n == 3) {
    const auto& h = out.h_eigenvalues;
    const auto& g = out.g_eigenvalues;
    const bool h_ok = is_zero(h, 0) && is_zero(h, 1) && !is_zero(h, 2) && h[2] > 0.0;
    const bool g_ok = !is_zero(g, 0) && g[0] < 0.0 && !is_zero(g, 1) && g[1] < 0.0 && is_zero(g, 2);
    if (!h_ok || !g_ok) {
      std::ostringstream msg;
      msg << "eigenvalues of H M^-1 " << h.transpose() << " / G M^-1 " << g.transpose()
          << " do not separate at " << zero_threshold;
      throw Error(ErrorKind::DegenerateSpectrum, msg.str());
    }
    out.lambda1 = h[2];
    out.lambda2 = g[0];
    out.lambda3 = g[1];
  } else {
    out.lambda1 = out.h_eigenvalues.maxCoeff();
    out.lambda2 = out.g_eigenvalues[0];
    out.lambda3 = out.g_eigenvalues.size() > 1 ? out.g_eigenvalues[1] : out.g_eigenvalues[0];
  }

  // Kernel directions belong to E1 (omega == 0) or E2 (omega != 0) and are dropped.
  if (b.omega == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!is_zero(out.h_eigenvalues, i)) append_pairs(out.spectrum, out.h_eigenvalues[i]);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) append_pairs(out.spectrum, out.homega_eigenvalues[i]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_zero(out.g_eigenvalues, i)) append_pairs(out.spectrum, out.g_eigenvalues[i]);
  }
  return out;
}

std::complex<double> skew_product(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) {
  if (v.size() != w.size() || v.size() % 2 != 0) {
    throw Error(ErrorKind::DimensionMismatch, "skew product needs equal, even-length vectors");
  }
  const Eigen::Index half = v.size() / 2;
  // J w = (-w_lower, w_upper)
  return -(v.head(half).transpose() * w.tail(half)).value() + (v.tail(half).transpose() * w.head(half)).value();
}

double skew_product(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return skew_product(Eigen::VectorXcd(v.cast<std::complex<double>>()),
                      Eigen::VectorXcd(w.cast<std::complex<double>>()))
      .real();
}

InvariantSubspaces invariant_subspaces(const LinearizationBlocks& b, const NullVectors& v) {
  const Eigen::Index n = b.size();
  const Eigen::Index dim = 4 * n;
  const Eigen::VectorXd mv1 = b.M.cwiseProduct(v.v1);
  const Eigen::VectorXd mv2 = b.M.cwiseProduct(v.v2);
  const Eigen::VectorXd mv3 = b.M.cwiseProduct(v.v3);

  InvariantSubspaces out;
  out.E1 = Eigen::MatrixXd::Zero(dim, 6);
  out.E1.col(0).segment(0, n) = v.v1;
  out.E1.col(1).segment(2 * n, n) = mv1;
  out.E1.col(2).segment(0, n) = v.v2;
  out.E1.col(3).segment(2 * n, n) = mv2;
  out.E1.col(4).segment(n, n) = v.v3;
  out.E1.col(5).segment(3 * n, n) = mv3;
  out.E2 = Eigen::MatrixXd::Zero(dim, 2);
  out.E2.col(0).segment(n, n) = v.v3;
  out.E2.col(1).segment(3 * n, n) = mv3;
  require_full_rank(out.E1, "E1");
  require_full_rank(out.E2, "E2");

  out.E = skew_complement(out.E1);
  out.Etilde = skew_complement(out.E2);

  LinearizationBlocks at_rest = b;
  at_rest.omega = 0.0;
  at_rest.Homega = b.H;
  const Eigen::MatrixXd l0 = assemble_L(at_rest);
  const Eigen::MatrixXd lw = assemble_L(b);

  out.e1_invariance = invariance_residual(l0, orthonormalize(out.E1));
  out.e_invariance = invariance_residual(l0, out.E);
  out.e2_invariance = invariance_residual(lw, orthonormalize(out.E2));
  out.etilde_invariance = invariance_residual(lw, out.Etilde);
  out.e1_nilpotency = (l0 * l0 * out.E1).norm() / (l0.squaredNorm() * out.E1.norm());

  out.spectrum_E = eigenvalues_of(out.E.transpose() * l0 * out.E);
  out.spectrum_Etilde = eigenvalues_of(out.Etilde.transpose() * lw * out.Etilde);
  return out;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::FixedPointUnstable: return "fixed-point-unstable";
    case Verdict::ReUnstable: return "re-unstable";
    case Verdict::ReDegenerateBoundary: return "re-degenerate-boundary";
    case Verdict::ReLinearlyStable: return "re-linearly-stable";
  }
  return "unknown";
}

StabilityReport classify(const AdmissibleMassTriple& masses, double omega, double boundary_tolerance) {
  if (!std::isfinite(omega)) throw Error(ErrorKind::InvalidInput, "omega is not finite");
  const TriangleShape shape = shape_from_masses(masses);
  const LinearizationBlocks blocks = assemble_blocks(masses.masses(), ring_from_shape(shape), omega);
  SpectralData spec = spectral_analysis(blocks);

  StabilityReport r{masses.values(), shape, spec.lambda1, spec.lambda2, spec.lambda3, omega,
                    std::sqrt(spec.lambda1), Verdict::FixedPointUnstable, std::move(spec.spectrum)};
  const double w2 = omega * omega;
  if (omega == 0.0) {
    r.verdict = Verdict::FixedPointUnstable;
  } else if (std::abs(w2 - r.lambda1) < boundary_tolerance) {
    r.verdict = Verdict::ReDegenerateBoundary;
  } else if (w2 < r.lambda1) {
    r.verdict = Verdict::ReUnstable;
  } else {
    r.verdict = Verdict::ReLinearlyStable;
  }
  return r;
}

}  // namespace curved
