#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vnq {

using cxd = std::complex<double>;

/// Dense complex operator. Every operator in this library is a square
/// matrix over C; dimensions stay at desk scale (<= 64).
using Operator = Eigen::MatrixXcd;

/// Structural tolerance: hermiticity, idempotence, unitarity, positivity.
inline constexpr double kStructuralTol = 1e-10;
/// Algebraic tolerance: identities that hold to double roundoff.
inline constexpr double kAlgebraTol = 1e-12;

//------------------------------------------------------------------------
// Residuals
//------------------------------------------------------------------------

inline double max_abs(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

inline double hermiticity_residual(const Operator& op) {
  return max_abs(op - op.adjoint());
}

inline double idempotence_residual(const Operator& op) {
  return max_abs(op * op - op);
}

inline double unitarity_residual(const Operator& op) {
  return max_abs(op.adjoint() * op - Operator::Identity(op.rows(), op.cols()));
}

/// Smallest eigenvalue of the Hermitian part (op + op^dagger)/2.
inline double min_eigenvalue(const Operator& op) {
  Eigen::SelfAdjointEigenSolver<Operator> es(Operator(0.5 * (op + op.adjoint())),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

//------------------------------------------------------------------------
// Subsystem layout
//------------------------------------------------------------------------

struct SubsystemFactor {
  std::string label;
  Eigen::Index dim = 0;
  bool operator==(const SubsystemFactor&) const = default;
};

/// Ordered tensor factorization of an operator's index space.
///
/// The first factor is the slow (most significant) Kronecker index; this
/// ordering is normative for the whole library.
class SubsystemLayout {
 public:
  SubsystemLayout() = default;

  explicit SubsystemLayout(std::vector<SubsystemFactor> factors)
      : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].dim < 1) {
        throw std::invalid_argument("subsystem factor '" + factors_[i].label +
                                    "' must have dim >= 1");
      }
      for (std::size_t j = i + 1; j < factors_.size(); ++j) {
        if (factors_[i].label == factors_[j].label) {
          throw std::invalid_argument("duplicate subsystem label '" +
                                      factors_[i].label + "'");
        }
      }
    }
  }

  static SubsystemLayout single(std::string label, Eigen::Index dim) {
    return SubsystemLayout({{std::move(label), dim}});
  }

  const std::vector<SubsystemFactor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  Eigen::Index total_dim() const {
    Eigen::Index d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
  }

  /// Position of a factor; throws on unknown label.
  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].label == label) return i;
    }
    throw std::invalid_argument("unknown subsystem label '" + label + "'");
  }

  bool operator==(const SubsystemLayout&) const = default;

 private:
  std::vector<SubsystemFactor> factors_;
};

//------------------------------------------------------------------------
// Tensor product and partial trace
//------------------------------------------------------------------------

/// Kronecker product, first factor slow:
/// out(i1*rb + i2, j1*cb + j2) = a(i1, j1) * b(i2, j2).
inline Operator tensor(const Operator& a, const Operator& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols();
  const Eigen::Index rb = b.rows(), cb = b.cols();
  Operator out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i) {
    for (Eigen::Index j = 0; j < ca; ++j) {
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    }
  }
  return out;
}

inline Operator tensor_chain(const std::vector<Operator>& ops) {
  if (ops.empty()) return Operator::Identity(1, 1);
  Operator out = ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) out = tensor(out, ops[i]);
  return out;
}

/// Trace out every factor not named in `keep`. Kept factors retain their
/// layout order; the result dimension is the product of the kept dims.
inline Operator partial_trace(const Operator& s, const SubsystemLayout& layout,
                              const std::vector<std::string>& keep) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("partial_trace: operator must be square");
  }
  if (layout.total_dim() != s.rows()) {
    throw std::invalid_argument("partial_trace: layout/dim mismatch");
  }
  if (keep.empty()) {
    throw std::invalid_argument("partial_trace: keep set is empty");
  }

  const std::size_t n = layout.size();
  std::vector<char> kept_flag(n, 0);
  for (const auto& label : keep) {
    const std::size_t k = layout.index_of(label);
    if (kept_flag[k]) {
      throw std::invalid_argument("partial_trace: duplicate keep label '" +
                                  label + "'");
    }
    kept_flag[k] = 1;
  }

  // Stride of factor k in the flat index (first factor slow).
  std::vector<Eigen::Index> stride(n, 1);
  for (std::size_t k = n; k-- > 1;) {
    stride[k - 1] = stride[k] * layout.factors()[k].dim;
  }

  std::vector<std::size_t> kept_ix, traced_ix;
  for (std::size_t k = 0; k < n; ++k) {
    (kept_flag[k] ? kept_ix : traced_ix).push_back(k);
  }

  // Flat offsets contributed by each kept / traced multi-index.
  auto offsets = [&](const std::vector<std::size_t>& which) {
    Eigen::Index count = 1;
    for (std::size_t k : which) count *= layout.factors()[k].dim;
    std::vector<Eigen::Index> out(static_cast<std::size_t>(count));
    for (Eigen::Index flat = 0; flat < count; ++flat) {
      Eigen::Index rem = flat, off = 0;
      for (std::size_t pos = which.size(); pos-- > 0;) {
        const std::size_t k = which[pos];
        const Eigen::Index d = layout.factors()[k].dim;
        off += (rem % d) * stride[k];
        rem /= d;
      }
      out[static_cast<std::size_t>(flat)] = off;
    }
    return out;
  };

  const auto kept_off = offsets(kept_ix);
  const auto traced_off = offsets(traced_ix);

  const auto dk = static_cast<Eigen::Index>(kept_off.size());
  Operator out = Operator::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      cxd sum = 0.0;
      for (const Eigen::Index t : traced_off) {
        sum += s(kept_off[static_cast<std::size_t>(r)] + t,
                 kept_off[static_cast<std::size_t>(c)] + t);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

//------------------------------------------------------------------------
// Hamiltonian and the Hermitian matrix exponential
//------------------------------------------------------------------------

/// Energy operator; Hermitian by construction (checked at 1e-10).
class Hamiltonian {
 public:
  explicit Hamiltonian(Operator op, double tol = kStructuralTol) : op_(std::move(op)) {
    if (op_.rows() != op_.cols()) {
      throw std::invalid_argument("Hamiltonian must be square");
    }
    const double r = hermiticity_residual(op_);
    if (r > tol) {
      throw std::invalid_argument("Hamiltonian is not Hermitian (residual " +
                                  std::to_string(r) + ")");
    }
  }

  const Operator& op() const { return op_; }
  Eigen::Index dim() const { return op_.rows(); }

 private:
  Operator op_;
};

/// U = exp(-i H dt) through the spectral decomposition of H. Exact up to
/// eigensolver accuracy; the result is unitary to 1e-10.
inline Operator expm_hermitian(const Hamiltonian& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Operator> es(h.op());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("expm_hermitian: eigen-decomposition failed");
  }
  const Eigen::VectorXd& e = es.eigenvalues();
  Eigen::VectorXcd phases(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    phases(k) = std::polar(1.0, -e(k) * dt);
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

//------------------------------------------------------------------------
// Structural validation
//------------------------------------------------------------------------

enum class OperatorKind { hermitian, projector, psd, unitary };

struct ValidationReport {
  bool ok = true;
  double residual = 0.0;  // largest offending magnitude among failed checks
  std::string detail;     // empty when ok
};

inline ValidationReport validate(OperatorKind kind, const Operator& op,
                                 double tol = kStructuralTol) {
  if (tol <= 0.0) throw std::invalid_argument("validate: tol must be > 0");
  if (op.rows() != op.cols()) {
    throw std::invalid_argument("validate: operator must be square");
  }

  ValidationReport rep;
  auto fail = [&rep](const std::string& what, double magnitude) {
    rep.ok = false;
    if (magnitude >= rep.residual) {
      rep.residual = magnitude;
    }
    rep.detail += (rep.detail.empty() ? "" : "; ") + what + " " +
                  std::to_string(magnitude);
  };

  const double herm = hermiticity_residual(op);
  switch (kind) {
    case OperatorKind::hermitian:
      if (herm > tol) fail("hermiticity residual", herm);
      break;
    case OperatorKind::projector: {
      if (herm > tol) fail("hermiticity residual", herm);
      const double idem = idempotence_residual(op);
      if (idem > tol) fail("idempotence residual", idem);
      break;
    }
    case OperatorKind::psd: {
      if (herm > tol) fail("hermiticity residual", herm);
      const double lo = min_eigenvalue(op);
      if (lo < -tol) fail("negative eigenvalue", -lo);
      break;
    }
    case OperatorKind::unitary: {
      const double uni = unitarity_residual(op);
      if (uni > tol) fail("unitarity residual", uni);
      break;
    }
  }
  return rep;
}

}  // namespace vnq
