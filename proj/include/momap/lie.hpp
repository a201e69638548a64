#pragma once

#include <vector>

#include <Eigen/Dense>

#include "momap/error.hpp"

namespace momap {

enum class GroupKind { Abelian, SO3, Product };

/// Element of the Lie algebra, components in the basis E_alpha.
class AlgebraVector {
 public:
  AlgebraVector() = default;
  explicit AlgebraVector(Eigen::VectorXd components);

  static AlgebraVector zero(int dim) { return AlgebraVector(Eigen::VectorXd::Zero(dim)); }
  static AlgebraVector basis(int dim, int alpha);

  int dim() const { return static_cast<int>(c_.size()); }
  const Eigen::VectorXd& components() const { return c_; }
  double operator[](int alpha) const { return c_[alpha]; }

 private:
  Eigen::VectorXd c_;
};

/// Element of the dual algebra, components in the dual basis E^alpha.
class DualVector {
 public:
  DualVector() = default;
  explicit DualVector(Eigen::VectorXd components);

  static DualVector zero(int dim) { return DualVector(Eigen::VectorXd::Zero(dim)); }
  static DualVector basis(int dim, int alpha);

  int dim() const { return static_cast<int>(c_.size()); }
  const Eigen::VectorXd& components() const { return c_; }
  double operator[](int alpha) const { return c_[alpha]; }

 private:
  Eigen::VectorXd c_;
};

/// Canonical pairing <p, a>_0.
double pairing(const DualVector& p, const AlgebraVector& a);

/// Concrete group element. Abelian groups store an offset vector (SO(2) is
/// represented by its unwrapped angle), SO(3) a rotation matrix, products a
/// list of factor elements.
class GroupElement {
 public:
  static GroupElement abelian(Eigen::VectorXd offset);
  /// Checks R^T R = 1 and det R = +1 to 1e-10.
  static GroupElement rotation(const Eigen::Matrix3d& r);
  static GroupElement product(std::vector<GroupElement> parts);

  GroupKind kind() const { return kind_; }
  int dim() const;

  const Eigen::VectorXd& offset() const;
  const Eigen::Matrix3d& rotation() const;
  const std::vector<GroupElement>& parts() const;

  /// Deviation from the group: ||R^T R - 1|| for rotations (max over parts).
  double orthogonality_defect() const;

 private:
  friend GroupElement rotation_unchecked(const Eigen::Matrix3d& r);

  GroupKind kind_ = GroupKind::Abelian;
  Eigen::VectorXd offset_;
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  std::vector<GroupElement> parts_;
};

/// Wraps a matrix as a rotation without validating it. Used on hot paths
/// where the matrix is known to be (re)projected onto SO(3).
GroupElement rotation_unchecked(const Eigen::Matrix3d& r);

/// Finite-dimensional Lie algebra with its group: R^k, SO(3), or a direct
/// product of those handled blockwise.
class LieStructure {
 public:
  static LieStructure abelian(int k);
  /// Basis (E_i)_j^k = -eps_ijk, so c^k_ij = eps_ijk and [a,b] = a x b.
  static LieStructure so3();
  static LieStructure product(std::vector<LieStructure> factors);

  int dim() const { return dim_; }
  GroupKind kind() const { return kind_; }
  const std::vector<LieStructure>& factors() const { return factors_; }
  /// First algebra index of factor i inside a product.
  int factor_offset(int i) const;

  /// c^gamma_{alpha beta}.
  double structure_constant(int gamma, int alpha, int beta) const {
    return c_[(gamma * dim_ + alpha) * dim_ + beta];
  }

  double antisymmetry_residual() const;
  double jacobi_residual() const;

  GroupElement identity() const;
  bool compatible(const GroupElement& g) const;

  /// Deterministic handful of generic group elements, used to probe
  /// Ad-invariance of bilinear forms.
  std::vector<GroupElement> probe_elements() const;

 private:
  int dim_ = 0;
  GroupKind kind_ = GroupKind::Abelian;
  std::vector<LieStructure> factors_;
  std::vector<double> c_;
};

AlgebraVector bracket(const LieStructure& lie, const AlgebraVector& a, const AlgebraVector& b);

GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);

/// Matrix of Ad_g in the basis E_alpha.
Eigen::MatrixXd adjoint_matrix(const GroupElement& g);
AlgebraVector adjoint(const GroupElement& g, const AlgebraVector& a);
/// <Ad*_g p, a> = <p, Ad_g a>.
DualVector coadjoint(const GroupElement& g, const DualVector& p);

GroupElement exp_map(const LieStructure& lie, const AlgebraVector& a);
/// Principal branch. Throws AmbiguousBranch for SO(3) angles at pi.
AlgebraVector log_map(const GroupElement& g);
/// Like log_map, but at SO(3) angle pi returns pi times a deterministic
/// axis instead of throwing. For reporting only.
AlgebraVector log_map_boundary(const GroupElement& g);

Eigen::Matrix3d hat(const Eigen::Vector3d& a);
Eigen::Vector3d vee(const Eigen::Matrix3d& m);
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& a);
Eigen::Vector3d so3_log(const Eigen::Matrix3d& r);

/// Symmetric non-degenerate bilinear form h on the algebra.
class BilinearForm {
 public:
  explicit BilinearForm(Eigen::MatrixXd h);

  static BilinearForm identity(int k) { return BilinearForm(Eigen::MatrixXd::Identity(k, k)); }
  static BilinearForm scaled_identity(int k, double c) {
    return BilinearForm(c * Eigen::MatrixXd::Identity(k, k));
  }

  int dim() const { return static_cast<int>(h_.rows()); }
  const Eigen::MatrixXd& matrix() const { return h_; }

  /// max over probe elements of ||Ad_g^T h Ad_g - h||.
  double ad_invariance_residual(const LieStructure& lie) const;
  bool is_ad_invariant(const LieStructure& lie, double tol = 1e-10) const {
    return ad_invariance_residual(lie) < tol;
  }

 private:
  Eigen::MatrixXd h_;
};

/// (h^ a)_beta = h_{alpha beta} a^alpha.
DualVector hat_map(const BilinearForm& h, const AlgebraVector& a);
AlgebraVector hat_map_inverse(const BilinearForm& h, const DualVector& p);

/// ||Ad*_g(h^ a) - h^(Ad_{g^-1} a)||; vanishes iff h is Ad-invariant under g.
double check_h_equivariance(const BilinearForm& h, const GroupElement& g, const AlgebraVector& a);

/// C^{-1} a_bar. Throws VerticalDegeneracy when C is singular.
AlgebraVector canonicalize(const Eigen::MatrixXd& c, const AlgebraVector& a_bar);
/// Column-wise C^{-1} applied to a k x n algebra-valued form.
Eigen::MatrixXd canonicalize(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_bar);

}  // namespace momap
