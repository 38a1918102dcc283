#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "atomret/linops.hpp"
#include "atomret/types.hpp"

namespace atomret {

// ------------------------------------------------------------------ atoms

struct Atom;

/// +/- e_index (linear column-major index into the ambient shape).
struct SignedUnit {
  Index index = 0;
  int sign = 1;
};

/// e_index of the nonnegative orthant.
struct NonnegUnit {
  Index index = 0;
};

/// u v^T with unit u, v.
struct Rank1 {
  Vec u;
  Vec v;
};

/// v v^T with unit v.
struct Rank1Sym {
  Vec v;
};

/// weight * inner, weight > 0. Used for the left operand of a weighted sum.
struct Scaled {
  double weight = 1.0;
  std::shared_ptr<const Atom> inner;
};

struct Atom {
  std::variant<SignedUnit, NonnegUnit, Rank1, Rank1Sym, Scaled> value;
};

Atom make_signed(Index index, int sign);
Atom make_nonneg(Index index);
/// Throws ArgumentError unless both factors have unit norm to 1e-12.
Atom make_rank1(Vec u, Vec v);
Atom make_rank1_sym(Vec v);
Atom make_scaled(double weight, Atom inner);

/// Dense embedding of an atom into the given ambient shape.
Mat embed(const Atom& a, Shape shape);

/// <a, z> without forming the dense atom.
double atom_inner(const Atom& a, const Mat& z);

/// Canonical atoms compare exactly; rank-one atoms compare up to the
/// simultaneous sign flip (u, v) ~ (-u, -v).
bool same_atom(const Atom& a, const Atom& b, double tol = 1e-9);

nlohmann::json to_json(const Atom& a);

// ------------------------------------------------------------------ sets

class AtomicSet {
 public:
  enum class Kind { SignedCanonical, NonnegCanonical, SpectralAsym, SpectralPSD, WeightedSum };

  static AtomicSet signed_canonical(Shape shape);
  static AtomicSet signed_canonical(Index n) { return signed_canonical(Shape{n, 1}); }
  static AtomicSet nonneg_canonical(Shape shape);
  static AtomicSet nonneg_canonical(Index n) { return nonneg_canonical(Shape{n, 1}); }
  static AtomicSet spectral_asym(Index m, Index n);
  static AtomicSet spectral_psd(Index n);
  /// Atoms {lambda * a : a in left} together with the atoms of right. The
  /// support function is max(lambda * sigma_left, sigma_right) and the gauge
  /// is the infimal convolution gauge_left(L) / lambda + gauge_right(X - L).
  static AtomicSet weighted_sum(double lambda, AtomicSet left, AtomicSet right);

  Kind kind() const { return kind_; }
  Shape shape() const { return shape_; }
  bool is_polyhedral() const { return kind_ == Kind::SignedCanonical || kind_ == Kind::NonnegCanonical; }
  bool is_spectral() const { return kind_ == Kind::SpectralAsym || kind_ == Kind::SpectralPSD; }
  /// True when the set contains a spectral operand (Corollary-style eps > 0 requirement).
  bool has_spectral_part() const;
  bool is_centrosymmetric() const;

  double lambda() const { return lambda_; }
  const AtomicSet& left() const;
  const AtomicSet& right() const;

  std::string name() const;

 private:
  AtomicSet(Kind k, Shape s) : kind_(k), shape_(s) {}
  Kind kind_;
  Shape shape_;
  double lambda_ = 1.0;
  std::shared_ptr<const AtomicSet> left_;
  std::shared_ptr<const AtomicSet> right_;
};

/// sigma_A(z) = sup_{a in A} <a, z>. The nonnegative orthant is ranked by
/// max(max_i z_i, 0) (see README, "Nonnegative atoms").
double support_value(const AtomicSet& set, const Mat& z);

/// Atoms with <a, z> >= sigma_A(z) - eps. For finite sets the result is exact
/// and more than `cap` qualifying atoms raise CapacityError; for spectral
/// sets at most `cap` singular/eigen atoms are returned.
std::vector<Atom> exposed_atoms(const AtomicSet& set, const Mat& z, double eps, Index cap);

/// The k atoms with the largest <a, z>. Ties: ascending index, positive sign
/// first. For a weighted sum, k atoms from each operand (left block first,
/// wrapped in Scaled{lambda, .}).
std::vector<Atom> top_k_atoms(const AtomicSet& set, const Mat& z, Index k);
std::vector<Atom> top_k_atoms(const AtomicSet& set, const Mat& z, Index k_left, Index k_right);

/// The single best atom (linear minimization oracle). Empty when the origin
/// is the maximizer (cones, PSD with nonpositive spectrum).
struct TopAtom {
  std::optional<Atom> atom;
  double value = 0.0;
};
TopAtom top_atom(const AtomicSet& set, const Mat& z);

/// gamma_A(x). The nonnegative orthant returns 0 on the cone and infinity off
/// it; the PSD set returns the trace on PSD matrices and infinity otherwise.
/// Weighted sums are evaluated by ADMM on the infimal convolution.
ExtendedReal gauge_value(const AtomicSet& set, const Mat& x);

/// ||M||_A = max_{a in A} ||M a||_2. Exact for finite sets (one forward per
/// coordinate). Spectral sets use the operator 2-norm: exactly 1 for masks
/// and isometries, otherwise a power-iteration estimate with `trials` steps.
double atomic_opnorm(const AtomicSet& set, const LinOp& M, int trials);

// ---------------------------------------------------------- reduced model

enum class CoefficientDomain { Nonnegative, Free, FreeMatrix, PsdMatrix };

const char* to_string(CoefficientDomain d);

/// One group of identified atoms and the domain of its coefficients.
struct ModelBlock {
  CoefficientDomain domain = CoefficientDomain::Free;
  std::vector<Atom> atoms;  // polyhedral blocks
  Mat U;                    // spectral blocks: m x k (equal to V for PSD)
  Mat V;                    // spectral blocks: n x k
  double weight = 1.0;      // lambda for the left operand of a weighted sum

  Index coefficient_count() const;
  /// Dense ambient element for coefficient j. FreeMatrix/PsdMatrix use
  /// column-major C(r, c) -> weight * U_r V_c^T.
  Mat basis_element(Index j, Shape shape) const;
};

struct ReducedModel {
  Shape ambient;
  std::vector<ModelBlock> blocks;

  Index coefficient_count() const;
  /// x = sum of coefficient-weighted basis elements.
  Mat reconstruct(const Vec& coefficients) const;
  /// Atoms spanned by the model, for reports (spectral blocks give U_i V_i^T).
  std::vector<Atom> atoms() const;
};

/// Top-k essential model with the coefficient domain implied by the set:
/// signed -> Free (centrosymmetric span), nonnegative -> Nonnegative,
/// low-rank -> FreeMatrix, PSD -> PsdMatrix, weighted sum -> one block per operand.
ReducedModel ess_model(const AtomicSet& set, const Mat& z, Index k);
ReducedModel ess_model(const AtomicSet& set, const Mat& z, Index k_left, Index k_right);

// --------------------------------------------------- gauge-ball geometry

/// Euclidean projection onto radius * conv(A) (with the origin for cones).
Mat project_gauge_ball(const AtomicSet& set, const Mat& x, double radius);

/// prox of t * gamma_A, with gamma_A the gauge polar to support_value.
Mat prox_gauge(const AtomicSet& set, const Mat& x, double t);

/// Projection of v onto {w : w >= 0, sum w <= radius}.
Vec project_capped_simplex(const Vec& v, double radius);

/// Projection of v onto {w : ||w||_1 <= radius}.
Vec project_l1_ball(const Vec& v, double radius);

}  // namespace atomret
