#include "atomret/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atomret/kernels.hpp"
#include "atomret/spectral.hpp"

namespace atomret {

namespace {

void check_unit(const Vec& v, const char* what) {
  if (v.size() == 0 || std::abs(v.norm() - 1.0) > Tolerances::unit_norm)
    throw ArgumentError(std::string(what) + ": factor must have unit norm");
}

Mat sym_part(const Mat& z) { return 0.5 * (z + z.transpose()); }

// Signed candidates are laid out as 2i -> +e_i, 2i+1 -> -e_i so ascending
// candidate index is exactly "ascending index, positive sign first".
std::vector<double> signed_scores(const Mat& z) {
  std::vector<double> s(static_cast<size_t>(2 * z.size()));
  for (Index i = 0; i < z.size(); ++i) {
    s[2 * i] = z.data()[i];
    s[2 * i + 1] = -z.data()[i];
  }
  return s;
}

Atom signed_candidate(Index c) { return make_signed(c / 2, (c % 2 == 0) ? 1 : -1); }

double top_singular_value(const Mat& z) {
  if (z.squaredNorm() == 0.0) return 0.0;
  return truncated_svd(z, 1).S[0];
}

double top_eigenvalue(const Mat& z) { return truncated_eig_sym(sym_part(z), 1).values[0]; }

void check_k(Index k, Index limit, const char* what) {
  if (k < 1 || k > limit)
    throw ArgumentError(std::string(what) + ": k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(limit) + "]");
}

// Project the spectrum s onto {w >= 0, sum w <= radius}.
Vec project_spectrum(const Vec& s, double radius) { return project_capped_simplex(s, radius); }

}  // namespace

// ------------------------------------------------------------------ atoms

Atom make_signed(Index index, int sign) {
  if (index < 0) throw ArgumentError("SignedUnit: negative index");
  if (sign != 1 && sign != -1) throw ArgumentError("SignedUnit: sign must be +1 or -1");
  return Atom{SignedUnit{index, sign}};
}

Atom make_nonneg(Index index) {
  if (index < 0) throw ArgumentError("NonnegUnit: negative index");
  return Atom{NonnegUnit{index}};
}

Atom make_rank1(Vec u, Vec v) {
  check_unit(u, "Rank1");
  check_unit(v, "Rank1");
  return Atom{Rank1{std::move(u), std::move(v)}};
}

Atom make_rank1_sym(Vec v) {
  check_unit(v, "Rank1Sym");
  return Atom{Rank1Sym{std::move(v)}};
}

Atom make_scaled(double weight, Atom inner) {
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ArgumentError("Scaled: weight must be positive");
  return Atom{Scaled{weight, std::make_shared<const Atom>(std::move(inner))}};
}

Mat embed(const Atom& a, Shape shape) {
  return std::visit(
      [&](const auto& x) -> Mat {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SignedUnit> || std::is_same_v<T, NonnegUnit>) {
          if (x.index >= shape.size()) throw DimensionError("embed: index outside ambient shape");
          Mat e = Mat::Zero(shape.rows, shape.cols);
          if constexpr (std::is_same_v<T, SignedUnit>)
            e.data()[x.index] = x.sign;
          else
            e.data()[x.index] = 1.0;
          return e;
        } else if constexpr (std::is_same_v<T, Rank1>) {
          if (x.u.size() != shape.rows || x.v.size() != shape.cols)
            throw DimensionError("embed: rank-one factors do not match " + to_string(shape));
          return x.u * x.v.transpose();
        } else if constexpr (std::is_same_v<T, Rank1Sym>) {
          if (x.v.size() != shape.rows || x.v.size() != shape.cols)
            throw DimensionError("embed: symmetric factor does not match " + to_string(shape));
          return x.v * x.v.transpose();
        } else {
          return x.weight * embed(*x.inner, shape);
        }
      },
      a.value);
}

double atom_inner(const Atom& a, const Mat& z) {
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SignedUnit>)
          return x.sign * z.data()[x.index];
        else if constexpr (std::is_same_v<T, NonnegUnit>)
          return z.data()[x.index];
        else if constexpr (std::is_same_v<T, Rank1>)
          return x.u.dot(z * x.v);
        else if constexpr (std::is_same_v<T, Rank1Sym>)
          return x.v.dot(z * x.v);
        else
          return x.weight * atom_inner(*x.inner, z);
      },
      a.value);
}

bool same_atom(const Atom& a, const Atom& b, double tol) {
  if (a.value.index() != b.value.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.value);
        if constexpr (std::is_same_v<T, SignedUnit>) {
          return x.index == y.index && x.sign == y.sign;
        } else if constexpr (std::is_same_v<T, NonnegUnit>) {
          return x.index == y.index;
        } else if constexpr (std::is_same_v<T, Rank1>) {
          if (x.u.size() != y.u.size() || x.v.size() != y.v.size()) return false;
          const bool same = (x.u - y.u).norm() <= tol && (x.v - y.v).norm() <= tol;
          const bool flipped = (x.u + y.u).norm() <= tol && (x.v + y.v).norm() <= tol;
          return same || flipped;
        } else if constexpr (std::is_same_v<T, Rank1Sym>) {
          if (x.v.size() != y.v.size()) return false;
          return (x.v - y.v).norm() <= tol || (x.v + y.v).norm() <= tol;
        } else {
          return std::abs(x.weight - y.weight) <= tol && same_atom(*x.inner, *y.inner, tol);
        }
      },
      a.value);
}

nlohmann::json to_json(const Atom& a) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SignedUnit>) {
          return {{"kind", "signed"}, {"index", x.index}, {"sign", x.sign}};
        } else if constexpr (std::is_same_v<T, NonnegUnit>) {
          return {{"kind", "nonneg"}, {"index", x.index}, {"sign", 1}};
        } else if constexpr (std::is_same_v<T, Rank1>) {
          return {{"kind", "rank1"},
                  {"u", std::vector<double>(x.u.data(), x.u.data() + x.u.size())},
                  {"v", std::vector<double>(x.v.data(), x.v.data() + x.v.size())}};
        } else if constexpr (std::is_same_v<T, Rank1Sym>) {
          return {{"kind", "rank1_sym"}, {"v", std::vector<double>(x.v.data(), x.v.data() + x.v.size())}};
        } else {
          return {{"kind", "scaled"}, {"weight", x.weight}, {"inner", to_json(*x.inner)}};
        }
      },
      a.value);
}

// ------------------------------------------------------------------ sets

AtomicSet AtomicSet::signed_canonical(Shape shape) {
  if (shape.rows <= 0 || shape.cols <= 0) throw DimensionError("SignedCanonical: dimensions must be positive");
  return AtomicSet(Kind::SignedCanonical, shape);
}

AtomicSet AtomicSet::nonneg_canonical(Shape shape) {
  if (shape.rows <= 0 || shape.cols <= 0) throw DimensionError("NonnegCanonical: dimensions must be positive");
  return AtomicSet(Kind::NonnegCanonical, shape);
}

AtomicSet AtomicSet::spectral_asym(Index m, Index n) {
  if (m <= 0 || n <= 0) throw DimensionError("SpectralAsym: dimensions must be positive");
  return AtomicSet(Kind::SpectralAsym, Shape{m, n});
}

AtomicSet AtomicSet::spectral_psd(Index n) {
  if (n <= 0) throw DimensionError("SpectralPSD: dimension must be positive");
  return AtomicSet(Kind::SpectralPSD, Shape{n, n});
}

AtomicSet AtomicSet::weighted_sum(double lambda, AtomicSet left, AtomicSet right) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("WeightedSum: lambda must be positive");
  if (left.shape() != right.shape())
    throw DimensionError("WeightedSum: operand shapes " + to_string(left.shape()) + " and " +
                         to_string(right.shape()) + " differ");
  AtomicSet s(Kind::WeightedSum, left.shape());
  s.lambda_ = lambda;
  s.left_ = std::make_shared<const AtomicSet>(std::move(left));
  s.right_ = std::make_shared<const AtomicSet>(std::move(right));
  return s;
}

const AtomicSet& AtomicSet::left() const {
  if (!left_) throw StateError("AtomicSet::left: not a weighted sum");
  return *left_;
}

const AtomicSet& AtomicSet::right() const {
  if (!right_) throw StateError("AtomicSet::right: not a weighted sum");
  return *right_;
}

bool AtomicSet::has_spectral_part() const {
  if (kind_ == Kind::WeightedSum) return left_->has_spectral_part() || right_->has_spectral_part();
  return is_spectral();
}

bool AtomicSet::is_centrosymmetric() const {
  switch (kind_) {
    case Kind::SignedCanonical:
    case Kind::SpectralAsym:
      return true;
    case Kind::WeightedSum:
      return left_->is_centrosymmetric() && right_->is_centrosymmetric();
    default:
      return false;
  }
}

std::string AtomicSet::name() const {
  switch (kind_) {
    case Kind::SignedCanonical: return "signed_canonical";
    case Kind::NonnegCanonical: return "nonneg_canonical";
    case Kind::SpectralAsym: return "spectral_asym";
    case Kind::SpectralPSD: return "spectral_psd";
    case Kind::WeightedSum: return "weighted_sum(" + left_->name() + ", " + right_->name() + ")";
  }
  return "unknown";
}

// -------------------------------------------------------------- queries

double support_value(const AtomicSet& set, const Mat& z) {
  require_shape(z, set.shape(), "support_value");
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical:
      return z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
    case AtomicSet::Kind::NonnegCanonical:
      return std::max(z.maxCoeff(), 0.0);
    case AtomicSet::Kind::SpectralAsym:
      return top_singular_value(z);
    case AtomicSet::Kind::SpectralPSD:
      return std::max(top_eigenvalue(z), 0.0);
    case AtomicSet::Kind::WeightedSum:
      return std::max(set.lambda() * support_value(set.left(), z), support_value(set.right(), z));
  }
  return 0.0;
}

std::vector<Atom> exposed_atoms(const AtomicSet& set, const Mat& z, double eps, Index cap) {
  require_shape(z, set.shape(), "exposed_atoms");
  if (!(eps >= 0.0)) throw ArgumentError("exposed_atoms: eps must be nonnegative");
  if (cap < 1) throw ArgumentError("exposed_atoms: cap must be positive");
  const double sigma = support_value(set, z);
  const double threshold = sigma - eps;
  std::vector<Atom> out;
  auto push_finite = [&](Atom a) {
    if (static_cast<Index>(out.size()) >= cap)
      throw CapacityError("exposed_atoms: more than " + std::to_string(cap) + " atoms qualify");
    out.push_back(std::move(a));
  };
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical: {
      const auto s = signed_scores(z);
      std::vector<Index> idx;
      for (Index c = 0; c < static_cast<Index>(s.size()); ++c)
        if (s[c] >= threshold) idx.push_back(c);
      std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return s[a] > s[b]; });
      for (Index c : idx) push_finite(signed_candidate(c));
      break;
    }
    case AtomicSet::Kind::NonnegCanonical: {
      std::vector<Index> idx;
      for (Index i = 0; i < z.size(); ++i)
        if (z.data()[i] >= threshold) idx.push_back(i);
      std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return z.data()[a] > z.data()[b]; });
      for (Index i : idx) push_finite(make_nonneg(i));
      break;
    }
    case AtomicSet::Kind::SpectralAsym: {
      const Index kmax = std::min({cap, z.rows(), z.cols()});
      const auto svd = truncated_svd(z, kmax);
      for (Index i = 0; i < kmax; ++i)
        if (svd.S[i] >= threshold) out.push_back(make_rank1(svd.U.col(i).normalized(), svd.V.col(i).normalized()));
      break;
    }
    case AtomicSet::Kind::SpectralPSD: {
      const Index kmax = std::min(cap, z.rows());
      const auto eig = truncated_eig_sym(sym_part(z), kmax);
      for (Index i = 0; i < kmax; ++i)
        if (eig.values[i] >= threshold && eig.values[i] >= 0.0)
          out.push_back(make_rank1_sym(eig.V.col(i).normalized()));
      break;
    }
    case AtomicSet::Kind::WeightedSum: {
      const double lam = set.lambda();
      // lambda * <a, z> >= sigma - eps  <=>  <a, z> >= sigma_left - (eps + sigma - lambda sigma_left) / lambda
      const double sl = support_value(set.left(), z);
      const double sr = support_value(set.right(), z);
      if (lam * sl >= threshold) {
        const double eps_l = (lam * sl - threshold) / lam;
        for (auto& a : exposed_atoms(set.left(), z, eps_l, cap)) {
          if (static_cast<Index>(out.size()) >= cap && set.left().is_polyhedral())
            throw CapacityError("exposed_atoms: more than " + std::to_string(cap) + " atoms qualify");
          out.push_back(make_scaled(lam, std::move(a)));
        }
      }
      if (sr >= threshold) {
        const Index remaining = cap - static_cast<Index>(out.size());
        if (remaining < 1) {
          if (set.right().is_polyhedral())
            throw CapacityError("exposed_atoms: more than " + std::to_string(cap) + " atoms qualify");
          break;
        }
        for (auto& a : exposed_atoms(set.right(), z, sr - threshold, remaining)) out.push_back(std::move(a));
      }
      break;
    }
  }
  return out;
}

std::vector<Atom> top_k_atoms(const AtomicSet& set, const Mat& z, Index k) {
  if (set.kind() == AtomicSet::Kind::WeightedSum) return top_k_atoms(set, z, k, k);
  require_shape(z, set.shape(), "top_k_atoms");
  std::vector<Atom> out;
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical: {
      check_k(k, 2 * z.size(), "top_k_atoms");
      const auto s = signed_scores(z);
      for (Index c : kernels::top_k(s, k)) out.push_back(signed_candidate(c));
      break;
    }
    case AtomicSet::Kind::NonnegCanonical: {
      check_k(k, z.size(), "top_k_atoms");
      for (Index i : kernels::top_k({z.data(), static_cast<size_t>(z.size())}, k)) out.push_back(make_nonneg(i));
      break;
    }
    case AtomicSet::Kind::SpectralAsym: {
      check_k(k, std::min(z.rows(), z.cols()), "top_k_atoms");
      const auto svd = truncated_svd(z, k);
      for (Index i = 0; i < k; ++i) out.push_back(make_rank1(svd.U.col(i).normalized(), svd.V.col(i).normalized()));
      break;
    }
    case AtomicSet::Kind::SpectralPSD: {
      check_k(k, z.rows(), "top_k_atoms");
      const auto eig = truncated_eig_sym(sym_part(z), k);
      for (Index i = 0; i < k; ++i) out.push_back(make_rank1_sym(eig.V.col(i).normalized()));
      break;
    }
    case AtomicSet::Kind::WeightedSum:
      break;
  }
  return out;
}

std::vector<Atom> top_k_atoms(const AtomicSet& set, const Mat& z, Index k_left, Index k_right) {
  if (set.kind() != AtomicSet::Kind::WeightedSum) {
    if (k_left != k_right) throw ArgumentError("top_k_atoms: per-operand budgets need a weighted sum");
    return top_k_atoms(set, z, k_left);
  }
  require_shape(z, set.shape(), "top_k_atoms");
  std::vector<Atom> out;
  for (auto& a : top_k_atoms(set.left(), z, k_left)) out.push_back(make_scaled(set.lambda(), std::move(a)));
  for (auto& a : top_k_atoms(set.right(), z, k_right)) out.push_back(std::move(a));
  return out;
}

TopAtom top_atom(const AtomicSet& set, const Mat& z) {
  require_shape(z, set.shape(), "top_atom");
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical: {
      Index i = 0;
      const double v = Eigen::Map<const Vec>(z.data(), z.size()).cwiseAbs().maxCoeff(&i);
      // first maximizer of |z|; positive sign on an exact zero
      return {make_signed(i, z.data()[i] < 0.0 ? -1 : 1), v};
    }
    case AtomicSet::Kind::NonnegCanonical: {
      Index i = 0;
      const double v = Eigen::Map<const Vec>(z.data(), z.size()).maxCoeff(&i);
      if (v <= 0.0) return {std::nullopt, 0.0};
      return {make_nonneg(i), v};
    }
    case AtomicSet::Kind::SpectralAsym: {
      if (z.squaredNorm() == 0.0) {
        Vec u = Vec::Zero(z.rows()), v = Vec::Zero(z.cols());
        u[0] = v[0] = 1.0;
        return {make_rank1(u, v), 0.0};
      }
      const auto svd = truncated_svd(z, 1);
      return {make_rank1(svd.U.col(0).normalized(), svd.V.col(0).normalized()), svd.S[0]};
    }
    case AtomicSet::Kind::SpectralPSD: {
      const auto eig = truncated_eig_sym(sym_part(z), 1);
      if (eig.values[0] <= 0.0) return {std::nullopt, 0.0};
      return {make_rank1_sym(eig.V.col(0).normalized()), eig.values[0]};
    }
    case AtomicSet::Kind::WeightedSum: {
      TopAtom l = top_atom(set.left(), z);
      TopAtom r = top_atom(set.right(), z);
      const double lv = set.lambda() * l.value;
      if (lv > r.value && l.atom) return {make_scaled(set.lambda(), std::move(*l.atom)), lv};
      return r;
    }
  }
  return {};
}

// ---------------------------------------------------------------- gauge

namespace {

double nuclear_norm(const Mat& x) {
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues().sum();
}

// Infimal convolution gamma_L(L) / lambda + gamma_R(X - L) by ADMM on
// min g1(L) + g2(S) s.t. L + S = X.
ExtendedReal weighted_gauge(const AtomicSet& set, const Mat& x) {
  const AtomicSet& left = set.left();
  const AtomicSet& right = set.right();
  const double lam = set.lambda();
  const double scale = std::max(x.norm(), 1e-300);
  const double rho = 1.0;
  Mat L = Mat::Zero(x.rows(), x.cols());
  Mat S = x;
  Mat U = Mat::Zero(x.rows(), x.cols());
  for (int it = 0; it < 20000; ++it) {
    L = prox_gauge(left, x - S - U, 1.0 / (lam * rho));
    const Mat S_prev = S;
    S = prox_gauge(right, x - L - U, 1.0 / rho);
    U += L + S - x;
    const double primal = (L + S - x).norm();
    const double dual = rho * (S - S_prev).norm();
    if (primal <= 1e-11 * scale && dual <= 1e-11 * scale) break;
  }
  const ExtendedReal gl = gauge_value(left, L);
  const ExtendedReal gr = gauge_value(right, x - L);
  if (gl.is_infinite() || gr.is_infinite()) return ExtendedReal::infinite();
  return gl.value() / lam + gr.value();
}

}  // namespace

ExtendedReal gauge_value(const AtomicSet& set, const Mat& x) {
  require_shape(x, set.shape(), "gauge_value");
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical:
      return x.cwiseAbs().sum();
    case AtomicSet::Kind::NonnegCanonical:
      return x.minCoeff() >= 0.0 ? ExtendedReal(0.0) : ExtendedReal::infinite();
    case AtomicSet::Kind::SpectralAsym:
      return nuclear_norm(x);
    case AtomicSet::Kind::SpectralPSD: {
      const double mag = std::max(1.0, x.cwiseAbs().maxCoeff());
      if ((x - x.transpose()).cwiseAbs().maxCoeff() > Tolerances::symmetry * mag) return ExtendedReal::infinite();
      Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(x), Eigen::EigenvaluesOnly);
      if (es.eigenvalues()[0] < -Tolerances::symmetry * mag) return ExtendedReal::infinite();
      return x.trace();
    }
    case AtomicSet::Kind::WeightedSum:
      return weighted_gauge(set, x);
  }
  return ExtendedReal::infinite();
}

double atomic_opnorm(const AtomicSet& set, const LinOp& M, int trials) {
  if (M.in_shape() != set.shape())
    throw DimensionError("atomic_opnorm: operator input " + to_string(M.in_shape()) + " does not match set " +
                         to_string(set.shape()));
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical:
    case AtomicSet::Kind::NonnegCanonical: {
      double best = 0.0;
      for (Index i = 0; i < set.shape().size(); ++i) best = std::max(best, M.forward_unit(i).norm());
      return best;
    }
    case AtomicSet::Kind::SpectralAsym:
    case AtomicSet::Kind::SpectralPSD: {
      if (M.is_isometry()) return 1.0;
      if (const auto* mask = dynamic_cast<const EntryMaskOp*>(&M)) return mask->omega().empty() ? 0.0 : 1.0;
      return operator_norm_estimate(M, std::max(trials, 1));
    }
    case AtomicSet::Kind::WeightedSum:
      return std::max(set.lambda() * atomic_opnorm(set.left(), M, trials), atomic_opnorm(set.right(), M, trials));
  }
  return 0.0;
}

// ---------------------------------------------------------- reduced model

const char* to_string(CoefficientDomain d) {
  switch (d) {
    case CoefficientDomain::Nonnegative: return "nonnegative";
    case CoefficientDomain::Free: return "free";
    case CoefficientDomain::FreeMatrix: return "free_matrix";
    case CoefficientDomain::PsdMatrix: return "psd_matrix";
  }
  return "unknown";
}

Index ModelBlock::coefficient_count() const {
  if (domain == CoefficientDomain::FreeMatrix || domain == CoefficientDomain::PsdMatrix)
    return U.cols() * V.cols();
  return static_cast<Index>(atoms.size());
}

Mat ModelBlock::basis_element(Index j, Shape shape) const {
  if (j < 0 || j >= coefficient_count()) throw ArgumentError("basis_element: index out of range");
  if (domain == CoefficientDomain::FreeMatrix || domain == CoefficientDomain::PsdMatrix) {
    const Index r = j % U.cols();
    const Index c = j / U.cols();
    if (U.rows() != shape.rows || V.rows() != shape.cols) throw DimensionError("basis_element: factor shape");
    return weight * (U.col(r) * V.col(c).transpose());
  }
  return weight * embed(atoms[static_cast<size_t>(j)], shape);
}

Index ReducedModel::coefficient_count() const {
  Index n = 0;
  for (const auto& b : blocks) n += b.coefficient_count();
  return n;
}

Mat ReducedModel::reconstruct(const Vec& coefficients) const {
  if (coefficients.size() != coefficient_count()) throw DimensionError("reconstruct: coefficient count mismatch");
  Mat x = Mat::Zero(ambient.rows, ambient.cols);
  Index off = 0;
  for (const auto& b : blocks) {
    const Index nc = b.coefficient_count();
    if (b.domain == CoefficientDomain::FreeMatrix || b.domain == CoefficientDomain::PsdMatrix) {
      const Eigen::Map<const Mat> C(coefficients.data() + off, b.U.cols(), b.V.cols());
      x.noalias() += b.weight * (b.U * C * b.V.transpose());
    } else {
      for (Index j = 0; j < nc; ++j) {
        const double c = coefficients[off + j];
        if (c == 0.0) continue;
        std::visit(
            [&](const auto& a) {
              using T = std::decay_t<decltype(a)>;
              if constexpr (std::is_same_v<T, SignedUnit>)
                x.data()[a.index] += b.weight * c * a.sign;
              else if constexpr (std::is_same_v<T, NonnegUnit>)
                x.data()[a.index] += b.weight * c;
              else
                x += b.weight * c * embed(Atom{a}, ambient);
            },
            b.atoms[static_cast<size_t>(j)].value);
      }
    }
    off += nc;
  }
  return x;
}

std::vector<Atom> ReducedModel::atoms() const {
  std::vector<Atom> out;
  for (const auto& b : blocks) {
    std::vector<Atom> part;
    if (b.domain == CoefficientDomain::FreeMatrix) {
      for (Index i = 0; i < b.U.cols(); ++i)
        part.push_back(make_rank1(b.U.col(i).normalized(), b.V.col(i).normalized()));
    } else if (b.domain == CoefficientDomain::PsdMatrix) {
      for (Index i = 0; i < b.V.cols(); ++i) part.push_back(make_rank1_sym(b.V.col(i).normalized()));
    } else {
      part = b.atoms;
    }
    for (auto& a : part) out.push_back(b.weight != 1.0 ? make_scaled(b.weight, std::move(a)) : std::move(a));
  }
  return out;
}

namespace {

ModelBlock single_block(const AtomicSet& set, const Mat& z, Index k, double weight) {
  ModelBlock b;
  b.weight = weight;
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical:
      b.domain = CoefficientDomain::Free;
      b.atoms = top_k_atoms(set, z, k);
      break;
    case AtomicSet::Kind::NonnegCanonical:
      b.domain = CoefficientDomain::Nonnegative;
      b.atoms = top_k_atoms(set, z, k);
      break;
    case AtomicSet::Kind::SpectralAsym: {
      check_k(k, std::min(z.rows(), z.cols()), "ess_model");
      const auto svd = truncated_svd(z, k);
      b.domain = CoefficientDomain::FreeMatrix;
      b.U = svd.U;
      b.V = svd.V;
      break;
    }
    case AtomicSet::Kind::SpectralPSD: {
      check_k(k, z.rows(), "ess_model");
      const auto eig = truncated_eig_sym(sym_part(z), k);
      b.domain = CoefficientDomain::PsdMatrix;
      b.U = eig.V;
      b.V = eig.V;
      break;
    }
    case AtomicSet::Kind::WeightedSum:
      throw ArgumentError("ess_model: nested weighted sums are not supported");
  }
  return b;
}

}  // namespace

ReducedModel ess_model(const AtomicSet& set, const Mat& z, Index k) { return ess_model(set, z, k, k); }

ReducedModel ess_model(const AtomicSet& set, const Mat& z, Index k_left, Index k_right) {
  require_shape(z, set.shape(), "ess_model");
  ReducedModel m;
  m.ambient = set.shape();
  if (set.kind() == AtomicSet::Kind::WeightedSum) {
    m.blocks.push_back(single_block(set.left(), z, k_left, set.lambda()));
    m.blocks.push_back(single_block(set.right(), z, k_right, 1.0));
  } else {
    if (k_left != k_right) throw ArgumentError("ess_model: per-operand budgets need a weighted sum");
    m.blocks.push_back(single_block(set, z, k_left, 1.0));
  }
  return m;
}

// --------------------------------------------------- gauge-ball geometry

Vec project_capped_simplex(const Vec& v, double radius) {
  if (radius < 0.0) throw ArgumentError("project_capped_simplex: negative radius");
  Vec w = v.cwiseMax(0.0);
  if (w.sum() <= radius) return w;
  // projection onto the simplex {w >= 0, sum w = radius}
  std::vector<double> u(w.data(), w.data() + w.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Vec project_l1_ball(const Vec& v, double radius) {
  if (radius < 0.0) throw ArgumentError("project_l1_ball: negative radius");
  if (v.cwiseAbs().sum() <= radius) return v;
  const Vec mag = project_capped_simplex(v.cwiseAbs(), radius);
  return mag.cwiseProduct(v.unaryExpr([](double a) { return a < 0.0 ? -1.0 : 1.0; }));
}

Mat project_gauge_ball(const AtomicSet& set, const Mat& x, double radius) {
  require_shape(x, set.shape(), "project_gauge_ball");
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical: {
      const Vec p = project_l1_ball(Eigen::Map<const Vec>(x.data(), x.size()), radius);
      return Eigen::Map<const Mat>(p.data(), x.rows(), x.cols());
    }
    case AtomicSet::Kind::NonnegCanonical: {
      const Vec p = project_capped_simplex(Eigen::Map<const Vec>(x.data(), x.size()), radius);
      return Eigen::Map<const Mat>(p.data(), x.rows(), x.cols());
    }
    case AtomicSet::Kind::SpectralAsym: {
      Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vec s = project_spectrum(svd.singularValues(), radius);
      return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    }
    case AtomicSet::Kind::SpectralPSD: {
      Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(x));
      const Vec s = project_spectrum(es.eigenvalues(), radius);
      return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
    }
    case AtomicSet::Kind::WeightedSum:
      throw ArgumentError("project_gauge_ball: weighted sums have no closed-form projection");
  }
  return x;
}

Mat prox_gauge(const AtomicSet& set, const Mat& x, double t) {
  require_shape(x, set.shape(), "prox_gauge");
  if (t < 0.0) throw ArgumentError("prox_gauge: negative step");
  switch (set.kind()) {
    case AtomicSet::Kind::SignedCanonical:
      return x.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
    case AtomicSet::Kind::NonnegCanonical:
      return (x.array() - t).cwiseMax(0.0).matrix();
    case AtomicSet::Kind::SpectralAsym: {
      Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vec s = (svd.singularValues().array() - t).cwiseMax(0.0).matrix();
      return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    }
    case AtomicSet::Kind::SpectralPSD: {
      Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(x));
      const Vec s = (es.eigenvalues().array() - t).cwiseMax(0.0).matrix();
      return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
    }
    case AtomicSet::Kind::WeightedSum:
      throw ArgumentError("prox_gauge: weighted sums are not supported");
  }
  return x;
}

}  // namespace atomret
