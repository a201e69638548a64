#include "momap/lie.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace momap {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Structural: return "structural";
    case ErrorCode::KindMismatch: return "kind-mismatch";
    case ErrorCode::AmbiguousBranch: return "ambiguous-branch";
    case ErrorCode::DegenerateForm: return "degenerate-form";
    case ErrorCode::VerticalDegeneracy: return "vertical-degeneracy";
    case ErrorCode::SingularAction: return "singular-action";
    case ErrorCode::StepUnderflow: return "step-underflow";
    case ErrorCode::InvalidSpec: return "invalid-spec";
    case ErrorCode::NotClosed: return "not-closed";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::Structural, std::string(what) + " has non-finite components");
  }
}

void require_dim(int got, int want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::Structural, std::string(what) + ": dimension " + std::to_string(got) +
                                           ", expected " + std::to_string(want));
  }
}

}  // namespace

AlgebraVector::AlgebraVector(Eigen::VectorXd components) : c_(std::move(components)) {
  require_finite(c_, "algebra vector");
}

AlgebraVector AlgebraVector::basis(int dim, int alpha) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e[alpha] = 1.0;
  return AlgebraVector(std::move(e));
}

DualVector::DualVector(Eigen::VectorXd components) : c_(std::move(components)) {
  require_finite(c_, "dual vector");
}

DualVector DualVector::basis(int dim, int alpha) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e[alpha] = 1.0;
  return DualVector(std::move(e));
}

double pairing(const DualVector& p, const AlgebraVector& a) {
  require_dim(p.dim(), a.dim(), "pairing");
  return p.components().dot(a.components());
}

// ---------------------------------------------------------------------------
// GroupElement

GroupElement GroupElement::abelian(Eigen::VectorXd offset) {
  require_finite(offset, "abelian group element");
  GroupElement g;
  g.kind_ = GroupKind::Abelian;
  g.offset_ = std::move(offset);
  return g;
}

GroupElement rotation_unchecked(const Eigen::Matrix3d& r) {
  GroupElement g;
  g.kind_ = GroupKind::SO3;
  g.rotation_ = r;
  return g;
}

GroupElement GroupElement::rotation(const Eigen::Matrix3d& r) {
  if (!r.allFinite()) throw Error(ErrorCode::Structural, "rotation has non-finite entries");
  const double defect = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  if (defect > 1e-10 || std::abs(r.determinant() - 1.0) > 1e-10) {
    throw Error(ErrorCode::Structural, "matrix is not in SO(3): ||R^T R - 1|| = " + std::to_string(defect));
  }
  return rotation_unchecked(r);
}

GroupElement GroupElement::product(std::vector<GroupElement> parts) {
  if (parts.empty()) throw Error(ErrorCode::Structural, "product group element needs factors");
  GroupElement g;
  g.kind_ = GroupKind::Product;
  g.parts_ = std::move(parts);
  return g;
}

int GroupElement::dim() const {
  switch (kind_) {
    case GroupKind::Abelian: return static_cast<int>(offset_.size());
    case GroupKind::SO3: return 3;
    case GroupKind::Product: {
      int d = 0;
      for (const auto& p : parts_) d += p.dim();
      return d;
    }
  }
  return 0;
}

const Eigen::VectorXd& GroupElement::offset() const {
  if (kind_ != GroupKind::Abelian) throw Error(ErrorCode::KindMismatch, "offset() on non-abelian element");
  return offset_;
}

const Eigen::Matrix3d& GroupElement::rotation() const {
  if (kind_ != GroupKind::SO3) throw Error(ErrorCode::KindMismatch, "rotation() on non-SO(3) element");
  return rotation_;
}

const std::vector<GroupElement>& GroupElement::parts() const {
  if (kind_ != GroupKind::Product) throw Error(ErrorCode::KindMismatch, "parts() on non-product element");
  return parts_;
}

double GroupElement::orthogonality_defect() const {
  switch (kind_) {
    case GroupKind::Abelian: return 0.0;
    case GroupKind::SO3:
      return (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity()).norm();
    case GroupKind::Product: {
      double d = 0.0;
      for (const auto& p : parts_) d = std::max(d, p.orthogonality_defect());
      return d;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// LieStructure

LieStructure LieStructure::abelian(int k) {
  if (k <= 0) throw Error(ErrorCode::Structural, "abelian algebra needs positive dimension");
  LieStructure l;
  l.dim_ = k;
  l.kind_ = GroupKind::Abelian;
  l.c_.assign(static_cast<size_t>(k) * k * k, 0.0);
  return l;
}

LieStructure LieStructure::so3() {
  LieStructure l;
  l.dim_ = 3;
  l.kind_ = GroupKind::SO3;
  l.c_.assign(27, 0.0);
  auto eps = [](int i, int j, int k) { return 0.5 * (i - j) * (j - k) * (k - i); };
  for (int g = 0; g < 3; ++g)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) l.c_[(g * 3 + a) * 3 + b] = eps(a, b, g);
  return l;
}

LieStructure LieStructure::product(std::vector<LieStructure> factors) {
  if (factors.empty()) throw Error(ErrorCode::Structural, "product algebra needs factors");
  LieStructure l;
  l.kind_ = GroupKind::Product;
  for (const auto& f : factors) l.dim_ += f.dim();
  const int k = l.dim_;
  l.c_.assign(static_cast<size_t>(k) * k * k, 0.0);
  int off = 0;
  for (const auto& f : factors) {
    const int d = f.dim();
    for (int g = 0; g < d; ++g)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          l.c_[((off + g) * k + off + a) * k + off + b] = f.structure_constant(g, a, b);
    off += d;
  }
  l.factors_ = std::move(factors);
  return l;
}

int LieStructure::factor_offset(int i) const {
  int off = 0;
  for (int j = 0; j < i; ++j) off += factors_.at(j).dim();
  return off;
}

double LieStructure::antisymmetry_residual() const {
  double r = 0.0;
  for (int g = 0; g < dim_; ++g)
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b)
        r = std::max(r, std::abs(structure_constant(g, a, b) + structure_constant(g, b, a)));
  return r;
}

double LieStructure::jacobi_residual() const {
  const int k = dim_;
  double r = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int g = 0; g < k; ++g)
        for (int nu = 0; nu < k; ++nu) {
          double s = 0.0;
          for (int mu = 0; mu < k; ++mu) {
            s += structure_constant(mu, a, b) * structure_constant(nu, mu, g) +
                 structure_constant(mu, b, g) * structure_constant(nu, mu, a) +
                 structure_constant(mu, g, a) * structure_constant(nu, mu, b);
          }
          r = std::max(r, std::abs(s));
        }
  return r;
}

GroupElement LieStructure::identity() const {
  switch (kind_) {
    case GroupKind::Abelian: return GroupElement::abelian(Eigen::VectorXd::Zero(dim_));
    case GroupKind::SO3: return rotation_unchecked(Eigen::Matrix3d::Identity());
    case GroupKind::Product: {
      std::vector<GroupElement> parts;
      for (const auto& f : factors_) parts.push_back(f.identity());
      return GroupElement::product(std::move(parts));
    }
  }
  return GroupElement::abelian(Eigen::VectorXd::Zero(dim_));
}

bool LieStructure::compatible(const GroupElement& g) const {
  if (g.kind() != kind_) return false;
  switch (kind_) {
    case GroupKind::Abelian: return g.dim() == dim_;
    case GroupKind::SO3: return true;
    case GroupKind::Product: {
      const auto& parts = g.parts();
      if (parts.size() != factors_.size()) return false;
      for (size_t i = 0; i < parts.size(); ++i)
        if (!factors_[i].compatible(parts[i])) return false;
      return true;
    }
  }
  return false;
}

std::vector<GroupElement> LieStructure::probe_elements() const {
  // Fixed generic directions; any set that is not contained in a proper
  // subgroup is enough to detect non-invariance.
  const Eigen::Vector3d axes[] = {{0.3, -1.1, 0.7}, {1.4, 0.2, -0.5}, {-0.6, 0.9, 1.3}};
  std::vector<GroupElement> out;
  for (int s = 0; s < 3; ++s) {
    Eigen::VectorXd a(dim_);
    for (int i = 0; i < dim_; ++i) a[i] = axes[(s + i) % 3][i % 3] * (1.0 + 0.1 * i);
    out.push_back(exp_map(*this, AlgebraVector(a)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Algebra and group operations

AlgebraVector bracket(const LieStructure& lie, const AlgebraVector& a, const AlgebraVector& b) {
  require_dim(a.dim(), lie.dim(), "bracket lhs");
  require_dim(b.dim(), lie.dim(), "bracket rhs");
  const int k = lie.dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
  for (int g = 0; g < k; ++g)
    for (int x = 0; x < k; ++x)
      for (int y = 0; y < k; ++y) out[g] += lie.structure_constant(g, x, y) * a[x] * b[y];
  return AlgebraVector(std::move(out));
}

namespace {

void require_same_kind(const GroupElement& g, const GroupElement& h) {
  if (g.kind() != h.kind() || g.dim() != h.dim()) {
    throw Error(ErrorCode::KindMismatch, "group elements of different kinds");
  }
  if (g.kind() == GroupKind::Product && g.parts().size() != h.parts().size()) {
    throw Error(ErrorCode::KindMismatch, "product elements with different factor counts");
  }
}

}  // namespace

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  require_same_kind(g, h);
  switch (g.kind()) {
    case GroupKind::Abelian: return GroupElement::abelian(g.offset() + h.offset());
    case GroupKind::SO3: return rotation_unchecked(g.rotation() * h.rotation());
    case GroupKind::Product: {
      std::vector<GroupElement> parts;
      for (size_t i = 0; i < g.parts().size(); ++i) parts.push_back(compose(g.parts()[i], h.parts()[i]));
      return GroupElement::product(std::move(parts));
    }
  }
  return g;
}

GroupElement inverse(const GroupElement& g) {
  switch (g.kind()) {
    case GroupKind::Abelian: return GroupElement::abelian(-g.offset());
    case GroupKind::SO3: return rotation_unchecked(g.rotation().transpose());
    case GroupKind::Product: {
      std::vector<GroupElement> parts;
      for (const auto& p : g.parts()) parts.push_back(inverse(p));
      return GroupElement::product(std::move(parts));
    }
  }
  return g;
}

Eigen::MatrixXd adjoint_matrix(const GroupElement& g) {
  switch (g.kind()) {
    case GroupKind::Abelian: return Eigen::MatrixXd::Identity(g.dim(), g.dim());
    case GroupKind::SO3: return g.rotation();
    case GroupKind::Product: {
      const int k = g.dim();
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
      int off = 0;
      for (const auto& p : g.parts()) {
        const int d = p.dim();
        m.block(off, off, d, d) = adjoint_matrix(p);
        off += d;
      }
      return m;
    }
  }
  return {};
}

AlgebraVector adjoint(const GroupElement& g, const AlgebraVector& a) {
  require_dim(a.dim(), g.dim(), "adjoint");
  return AlgebraVector(adjoint_matrix(g) * a.components());
}

DualVector coadjoint(const GroupElement& g, const DualVector& p) {
  require_dim(p.dim(), g.dim(), "coadjoint");
  return DualVector(adjoint_matrix(g).transpose() * p.components());
}

Eigen::Matrix3d hat(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& a) {
  const double theta = a.norm();
  const Eigen::Matrix3d k = hat(a);
  double s, c;
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    c = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    s = std::sin(theta) / theta;
    c = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + s * k + c * k * k;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Eigen::Vector3d w = vee(r - r.transpose());  // = 2 sin(theta) n
  if (theta < 1e-6) {
    return 0.5 * (1.0 + theta * theta / 6.0) * w;
  }
  const double gap = std::numbers::pi - theta;
  if (gap < 1e-9) {
    throw Error(ErrorCode::AmbiguousBranch, "SO(3) log at rotation angle pi has no principal value");
  }
  if (gap < 1e-3) {
    // sin(theta) is too small to recover the axis from the antisymmetric
    // part; use (R + R^T)/2 - cos(theta) 1 = (1 - cos(theta)) n n^T.
    const Eigen::Matrix3d b = 0.5 * (r + r.transpose()) - cos_theta * Eigen::Matrix3d::Identity();
    int j = 0;
    b.diagonal().maxCoeff(&j);
    Eigen::Vector3d n = b.col(j) / std::sqrt(b(j, j) * (1.0 - cos_theta));
    n.normalize();
    if (n.dot(w) < 0.0) n = -n;
    return theta * n;
  }
  return theta / (2.0 * std::sin(theta)) * w;
}

GroupElement exp_map(const LieStructure& lie, const AlgebraVector& a) {
  require_dim(a.dim(), lie.dim(), "exp");
  switch (lie.kind()) {
    case GroupKind::Abelian: return GroupElement::abelian(a.components());
    case GroupKind::SO3: return rotation_unchecked(so3_exp(a.components().head<3>()));
    case GroupKind::Product: {
      std::vector<GroupElement> parts;
      for (size_t i = 0; i < lie.factors().size(); ++i) {
        const auto& f = lie.factors()[i];
        parts.push_back(exp_map(f, AlgebraVector(a.components().segment(lie.factor_offset(static_cast<int>(i)), f.dim()))));
      }
      return GroupElement::product(std::move(parts));
    }
  }
  return lie.identity();
}

AlgebraVector log_map(const GroupElement& g) {
  switch (g.kind()) {
    case GroupKind::Abelian: return AlgebraVector(g.offset());
    case GroupKind::SO3: return AlgebraVector(Eigen::VectorXd(so3_log(g.rotation())));
    case GroupKind::Product: {
      Eigen::VectorXd out(g.dim());
      int off = 0;
      for (const auto& p : g.parts()) {
        const int d = p.dim();
        out.segment(off, d) = log_map(p).components();
        off += d;
      }
      return AlgebraVector(std::move(out));
    }
  }
  return {};
}

AlgebraVector log_map_boundary(const GroupElement& g) {
  switch (g.kind()) {
    case GroupKind::SO3: {
      try {
        return log_map(g);
      } catch (const Error&) {
        const Eigen::Matrix3d b = 0.5 * (g.rotation() + Eigen::Matrix3d::Identity());
        int j = 0;
        b.diagonal().maxCoeff(&j);
        const Eigen::Vector3d n = b.col(j).normalized();
        return AlgebraVector(Eigen::VectorXd(std::numbers::pi * n));
      }
    }
    case GroupKind::Product: {
      Eigen::VectorXd out(g.dim());
      int off = 0;
      for (const auto& p : g.parts()) {
        out.segment(off, p.dim()) = log_map_boundary(p).components();
        off += p.dim();
      }
      return AlgebraVector(std::move(out));
    }
    default: return log_map(g);
  }
}

// ---------------------------------------------------------------------------
// Bilinear forms

BilinearForm::BilinearForm(Eigen::MatrixXd h) : h_(std::move(h)) {
  if (h_.rows() == 0 || h_.rows() != h_.cols()) {
    throw Error(ErrorCode::Structural, "bilinear form must be a non-empty square matrix");
  }
  if (!h_.allFinite()) throw Error(ErrorCode::DegenerateForm, "bilinear form has non-finite entries");
  const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
  if ((h_ - h_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::DegenerateForm, "bilinear form is not symmetric");
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h_);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 1e-12 * sv[0]) {
    throw Error(ErrorCode::DegenerateForm, "bilinear form is degenerate");
  }
}

double BilinearForm::ad_invariance_residual(const LieStructure& lie) const {
  require_dim(dim(), lie.dim(), "bilinear form");
  double r = 0.0;
  for (const auto& g : lie.probe_elements()) {
    const Eigen::MatrixXd ad = adjoint_matrix(g);
    r = std::max(r, (ad.transpose() * h_ * ad - h_).cwiseAbs().maxCoeff());
  }
  return r;
}

DualVector hat_map(const BilinearForm& h, const AlgebraVector& a) {
  require_dim(a.dim(), h.dim(), "hat_map");
  return DualVector(h.matrix().transpose() * a.components());
}

AlgebraVector hat_map_inverse(const BilinearForm& h, const DualVector& p) {
  require_dim(p.dim(), h.dim(), "hat_map_inverse");
  return AlgebraVector(h.matrix().transpose().partialPivLu().solve(p.components()));
}

double check_h_equivariance(const BilinearForm& h, const GroupElement& g, const AlgebraVector& a) {
  const DualVector lhs = coadjoint(g, hat_map(h, a));
  const DualVector rhs = hat_map(h, adjoint(inverse(g), a));
  return (lhs.components() - rhs.components()).norm();
}

Eigen::MatrixXd canonicalize(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_bar) {
  if (c.rows() != c.cols() || c.rows() != a_bar.rows()) {
    throw Error(ErrorCode::Structural, "canonicalize: C must be k x k matching the form");
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  if (!lu.isInvertible() || std::abs(lu.rcond()) < 1e-14) {
    throw Error(ErrorCode::VerticalDegeneracy,
                "C(x) is singular: some fundamental field is annihilated (action not free here)");
  }
  return lu.solve(a_bar);
}

AlgebraVector canonicalize(const Eigen::MatrixXd& c, const AlgebraVector& a_bar) {
  return AlgebraVector(Eigen::VectorXd(canonicalize(c, Eigen::MatrixXd(a_bar.components()))));
}

}  // namespace momap
