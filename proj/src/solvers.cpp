#include "atomret/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace atomret {

namespace {

Eigen::Map<const Vec> flat(const Mat& m) { return {m.data(), m.size()}; }

Mat zeros(Shape s) { return Mat::Zero(s.rows, s.cols); }

double squared_opnorm(const LinOp& M) {
  if (M.is_isometry()) return 1.0;
  if (dynamic_cast<const EntryMaskOp*>(&M)) return 1.0;
  const double est = operator_norm_estimate(M, 100);
  return std::max(1.01 * est * est, 1e-300);
}

bool is_weighted(const ProblemSpec& spec) { return spec.set.kind() == AtomicSet::Kind::WeightedSum; }

// M applied to a (possibly scaled) atom, using forward_unit for canonical atoms.
Mat forward_atom(const LinOp& M, const Atom& a, Shape shape) {
  return std::visit(
      [&](const auto& x) -> Mat {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SignedUnit>)
          return static_cast<double>(x.sign) * M.forward_unit(x.index);
        else if constexpr (std::is_same_v<T, NonnegUnit>)
          return M.forward_unit(x.index);
        else if constexpr (std::is_same_v<T, Scaled>)
          return x.weight * forward_atom(M, *x.inner, shape);
        else
          return M.forward(embed(Atom{x}, shape));
      },
      a.value);
}

}  // namespace

OracleState initial_oracle_state(const ProblemSpec& spec, const OracleOptions& opts) {
  spec.validate();
  OracleState s;
  s.formulation = spec.formulation;
  const Shape in = spec.M->in_shape();
  const Shape out = spec.M->out_shape();
  s.dual.y = zeros(out);
  s.dual.Mty = zeros(in);
  s.dual.d_value = 0.0;
  if (spec.formulation == Formulation::P3) {
    s.x = zeros(in);
    s.xl = zeros(in);
    s.xs = zeros(in);
    s.Mx = zeros(out);
    s.r = spec.b;
    s.Mtb = spec.M->adjoint(spec.b);
    s.Mtr = s.Mtb;
    s.level.opnorm = opts.atomic_opnorm ? *opts.atomic_opnorm : atomic_opnorm(spec.set, *spec.M, 50);
  } else {
    if (is_weighted(spec)) throw ArgumentError("proximal oracle: weighted sums need the level-set oracle");
    s.lipschitz = squared_opnorm(*spec.M);
    s.w = zeros(in);
    s.w_prev = s.w;
    s.Mw = zeros(out);
    s.Mw_prev = s.Mw;
  }
  return s;
}

// ------------------------------------------------------------ proximal

OracleState dual_step_prox(const ProblemSpec& spec, const OracleState& state, const OracleOptions& opts) {
  if (spec.formulation == Formulation::P3) throw ArgumentError("dual_step_prox: needs D1 or D2");
  if (is_weighted(spec)) throw ArgumentError("dual_step_prox: weighted sums are not supported");
  if (!(opts.step > 0.0) || opts.step > 1.0) throw ArgumentError("dual_step_prox: step must lie in (0, 1]");
  const LinOp& M = *spec.M;
  OracleState s = state;
  const double t = opts.step;
  const Mat v = (1.0 - t) * s.dual.y + t * spec.b;
  const double inv_l = 1.0 / s.lipschitz;

  for (int it = 0; it < std::max(opts.inner_iters, 1); ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s.momentum * s.momentum));
    const double beta = (s.momentum - 1.0) / t_next;
    const Mat z = s.w + beta * (s.w - s.w_prev);
    const Mat Mz = s.Mw + beta * (s.Mw - s.Mw_prev);
    const Mat grad = M.adjoint(Mz - v);
    Mat w_new = z - inv_l * grad;
    if (spec.formulation == Formulation::P1)
      w_new = prox_gauge(spec.set, w_new, spec.lambda * inv_l);
    else
      w_new = project_gauge_ball(spec.set, w_new, spec.tau);
    Mat Mw_new = M.forward(w_new);
    // gradient-based adaptive restart
    if (inner(z - w_new, w_new - s.w) > 0.0)
      s.momentum = 1.0;
    else
      s.momentum = t_next;
    s.w_prev = std::move(s.w);
    s.Mw_prev = std::move(s.Mw);
    s.w = std::move(w_new);
    s.Mw = std::move(Mw_new);
  }

  DualState cand;
  cand.y = v - s.Mw;
  cand.Mty = M.adjoint(cand.y);
  if (spec.formulation == Formulation::P1) {
    const double sigma = support_value(spec.set, cand.Mty);
    if (sigma > spec.lambda) {
      cand.y *= spec.lambda / sigma;
      cand.Mty *= spec.lambda / sigma;
    }
  }
  cand.d_value = dual_objective(spec, cand);

  // weak duality: -p_i(w) <= d_i* for any primal-feasible w
  const double fit = spec.loss.value(spec.b - s.Mw);
  const ExtendedReal g = solver_gauge(spec.set, s.w);
  if (g.is_finite()) {
    if (spec.formulation == Formulation::P1)
      s.d_lower = std::max(s.d_lower, -(fit + spec.lambda * g.value()));
    else if (g.value() <= spec.tau * (1.0 + 1e-12))
      s.d_lower = std::max(s.d_lower, -fit);
  }

  if (cand.d_value <= s.dual.d_value) {
    s.dual = std::move(cand);
  } else {
    ++s.rejected;
  }
  if (std::isfinite(s.d_lower)) s.dual.gap_bound = std::max(s.dual.d_value - s.d_lower, 0.0);
  ++s.iteration;
  return s;
}

// ----------------------------------------------------------- level set

namespace {

// Move the level to tau_new, rescaling the iterate into the smaller ball when
// the level decreases. M* r is updated from the cached M* b without new
// operator applications.
void move_level(OracleState& s, const ProblemSpec& spec, double tau_new) {
  LevelSet& lv = s.level;
  if (tau_new < lv.tau && lv.tau > 0.0) {
    const double rho = tau_new / lv.tau;
    s.x *= rho;
    s.xl *= rho;
    s.xs *= rho;
    s.Mx *= rho;
    s.r = spec.b - s.Mx;
    s.Mtr = (1.0 - rho) * s.Mtb + rho * s.Mtr;
  }
  lv.tau = tau_new;
  ++lv.updates;
}

void level_update(OracleState& s, const ProblemSpec& spec, const OracleOptions& opts, double f, double sigma) {
  LevelSet& lv = s.level;
  if (lv.converged) return;
  const double alpha = spec.alpha;
  const double lower = f - s.fw_gap;
  const bool above = f <= alpha;     // tau >= tau*
  const bool below = lower > alpha;  // tau < tau*
  // lambda(tau) is nonincreasing, so every certified endpoint bounds lambda*;
  // keep the tightest.
  const double slack = lv.opnorm * std::sqrt(2.0 * spec.loss.smoothness() * s.fw_gap);
  if (!above && !below) {
    if (s.fw_gap <= 1e-13 * std::max(1.0, f)) {
      // f = alpha to roundoff: this level is tau* and closes both ends
      lv.converged = true;
      lv.tau_lo = lv.tau_hi = lv.tau;
      lv.lambda_hi = std::max(lv.lambda_hi.value_or(0.0), sigma - slack);
      lv.lambda_lo = std::min(lv.lambda_lo.value_or(sigma + slack), sigma + slack);
    }
    return;
  }
  if (above) {
    lv.tau_hi = lv.tau;
    const double lam = std::max(sigma - slack, 0.0);
    lv.lambda_hi = lv.lambda_hi ? std::max(*lv.lambda_hi, lam) : lam;
    const ExtendedReal g = solver_gauge(spec.set, s.x);
    const double gx = g.is_finite() ? g.value() : lv.tau;
    lv.feasible_gauge = lv.feasible_gauge ? std::min(*lv.feasible_gauge, gx) : gx;
  } else {
    lv.tau_lo = lv.tau;
    const double lam = sigma + slack;
    lv.lambda_lo = lv.lambda_lo ? std::min(*lv.lambda_lo, lam) : lam;
  }
  if (std::isfinite(lv.tau_hi) && (lv.tau_hi - lv.tau_lo) / std::max(1.0, lv.tau_hi) <= opts.level_tol) {
    lv.converged = true;
    return;
  }
  if (sigma <= 0.0) {
    lv.converged = true;
    return;
  }
  double cand = lv.tau + (f - alpha) / sigma;
  const bool inside = cand > lv.tau_lo && cand < lv.tau_hi;
  if (!inside) {
    if (std::isfinite(lv.tau_hi))
      cand = 0.5 * (lv.tau_lo + lv.tau_hi);
    else
      cand = std::max(2.0 * lv.tau_lo, lv.tau_lo + 1.0);
  }
  move_level(s, spec, cand);
}

// Plain Frank-Wolfe step toward tau * atom with exact line search.
void plain_step(OracleState& s, const ProblemSpec& spec, double tau, const Atom* atom, bool weighted) {
  const LinOp& M = *spec.M;
  const Shape in = M.in_shape();
  Mat S = zeros(in);
  Mat MS = zeros(M.out_shape());
  bool left_atom = false;
  if (atom && tau > 0.0) {
    S = tau * embed(*atom, in);
    MS = tau * forward_atom(M, *atom, in);
    left_atom = std::holds_alternative<Scaled>(atom->value);
  }
  const Mat Md = MS - s.Mx;
  const double denom = Md.squaredNorm();
  if (!(denom > 0.0)) return;
  const double gamma = std::clamp(inner(s.r, Md) / denom, 0.0, 1.0);
  if (gamma <= 0.0) return;
  s.x = (1.0 - gamma) * s.x + gamma * S;
  if (weighted) {
    s.xl *= (1.0 - gamma);
    s.xs *= (1.0 - gamma);
    (left_atom ? s.xl : s.xs) += gamma * S;
  }
  s.Mx += gamma * Md;
  s.r = spec.b - s.Mx;
  s.Mtr = M.adjoint(s.r);
}

// Pairwise Frank-Wolfe step on the canonical tau-ball: mass moves from the
// worst active vertex (or the origin, which carries the slack) to the
// Frank-Wolfe vertex. Converges linearly on these polytopes where the plain
// step zigzags. Returns false when there is no away vertex distinct from the
// Frank-Wolfe one; the caller then takes a plain step.
bool pairwise_step(OracleState& s, const LinOp& M, const Mat& b, double tau, const Atom* fw) {
  Index fw_i = -1;
  double fw_sign = 0.0;
  if (fw) {
    if (const auto* u = std::get_if<SignedUnit>(&fw->value)) {
      fw_i = u->index;
      fw_sign = u->sign;
    } else if (const auto* u = std::get_if<NonnegUnit>(&fw->value)) {
      fw_i = u->index;
      fw_sign = 1.0;
    } else {
      return false;
    }
  }
  const Index n = s.x.size();
  double mass = 0.0;
  Index away = -1;  // -1 is the origin
  double away_score = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double xi = s.x.data()[i];
    if (xi == 0.0) continue;
    mass += std::abs(xi);
    const double score = (xi > 0 ? 1.0 : -1.0) * s.Mtr.data()[i];
    if (score < away_score) {
      away_score = score;
      away = i;
    }
  }
  const double slack = std::max(1.0 - mass / tau, 0.0);
  // the origin is a better away vertex when its score 0 is lower
  if (slack > 1e-15 && away_score > 0.0) away = -1;
  if (away == -1 && slack <= 1e-15) return false;
  const double away_sign = away >= 0 ? (s.x.data()[away] > 0 ? 1.0 : -1.0) : 0.0;
  if (away == fw_i && away_sign == fw_sign) return false;
  const double cap = away >= 0 ? std::abs(s.x.data()[away]) / tau : slack;
  Mat Md = Mat::Zero(s.Mx.rows(), s.Mx.cols());
  if (fw_i >= 0) Md += (tau * fw_sign) * M.forward_unit(fw_i);
  if (away >= 0) Md -= (tau * away_sign) * M.forward_unit(away);
  const double denom = Md.squaredNorm();
  if (!(denom > 0.0)) return false;
  const double gamma = std::clamp(inner(s.r, Md) / denom, 0.0, cap);
  if (gamma <= 0.0) return true;
  if (fw_i >= 0) s.x.data()[fw_i] += gamma * tau * fw_sign;
  if (away >= 0) {
    if (gamma >= cap)
      s.x.data()[away] = 0.0;
    else
      s.x.data()[away] -= gamma * tau * away_sign;
  }
  s.Mx += gamma * Md;
  s.r = b - s.Mx;
  s.Mtr = M.adjoint(s.r);
  return true;
}

}  // namespace

OracleState dual_step_levelset_cg(const ProblemSpec& spec, const OracleState& state, const OracleOptions& opts) {
  if (spec.formulation != Formulation::P3) throw ArgumentError("dual_step_levelset_cg: needs D3");
  const LinOp& M = *spec.M;
  OracleState s = state;
  const bool weighted = is_weighted(spec);
  const bool canonical = spec.set.kind() == AtomicSet::Kind::SignedCanonical ||
                         spec.set.kind() == AtomicSet::Kind::NonnegCanonical;

  double sigma = support_value(spec.set, s.Mtr);
  double f = spec.loss.value(s.r);
  if (s.level.tau == 0.0 && s.level.updates == 0) {
    // first level: Newton step from tau = 0 where x = 0 and the gap is zero
    s.fw_gap = 0.0;
    level_update(s, spec, opts, f, sigma);
  }

  for (int step = 0; step < std::max(opts.cg_steps, 1); ++step) {
    const double tau = s.level.tau;
    const TopAtom ta = top_atom(spec.set, s.Mtr);
    s.last_atom = ta.atom;
    if (!(canonical && tau > 0.0 && pairwise_step(s, M, spec.b, tau, ta.atom ? &*ta.atom : nullptr)))
      plain_step(s, spec, tau, ta.atom ? &*ta.atom : nullptr, weighted);
    sigma = support_value(spec.set, s.Mtr);
    f = spec.loss.value(s.r);
    s.fw_gap = std::max(s.level.tau * sigma - inner(s.x, s.Mtr), 0.0);
    level_update(s, spec, opts, f, sigma);
  }

  // dual candidate on the boundary sigma(M* y) = 1
  sigma = support_value(spec.set, s.Mtr);
  if (sigma > 0.0) {
    DualState cand;
    cand.y = s.r / sigma;
    cand.Mty = s.Mtr / sigma;
    cand.d_value = dual_objective(spec, cand);
    if (cand.d_value <= s.dual.d_value) {
      cand.beta_bracket = s.dual.beta_bracket;
      s.dual = std::move(cand);
    } else {
      ++s.rejected;
    }
  }
  if (s.level.lambda_lo && s.level.lambda_hi) {
    const double lo = std::min(*s.level.lambda_lo, *s.level.lambda_hi);
    const double hi = std::max(*s.level.lambda_lo, *s.level.lambda_hi);
    if (lo > 0.0) s.dual.beta_bracket = perspective_bracket({lo, hi});
  }
  if (s.level.feasible_gauge) s.d_lower = std::max(s.d_lower, -*s.level.feasible_gauge);
  s.dual.gap_bound = s.fw_gap;
  ++s.iteration;
  return s;
}

OracleState dual_step(const ProblemSpec& spec, const OracleState& state, const OracleOptions& opts) {
  if (spec.formulation == Formulation::P3) return dual_step_levelset_cg(spec, state, opts);
  return dual_step_prox(spec, state, opts);
}

// ------------------------------------------------------------- reduced

Mat reduced_design(const LinOp& M, const ReducedModel& model) {
  if (model.ambient != M.in_shape()) throw DimensionError("reduced_design: model and operator shapes differ");
  const Index rows = M.out_shape().size();
  Mat G(rows, model.coefficient_count());
  Index col = 0;
  for (const auto& b : model.blocks) {
    const Index nc = b.coefficient_count();
    const bool spectral = b.domain == CoefficientDomain::FreeMatrix || b.domain == CoefficientDomain::PsdMatrix;
    for (Index j = 0; j < nc; ++j, ++col) {
      const Mat img = spectral ? M.forward(b.basis_element(j, model.ambient))
                               : b.weight * forward_atom(M, b.atoms[static_cast<size_t>(j)], model.ambient);
      G.col(col) = flat(img);
    }
  }
  return G;
}

namespace {

Vec project_psd_block(const Vec& c, Index k, std::optional<double> radius) {
  const Eigen::Map<const Mat> C(c.data(), k, k);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(0.0);
  if (radius) ev = project_capped_simplex(es.eigenvalues(), *radius);
  const Mat P = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return Eigen::Map<const Vec>(P.data(), P.size());
}

Vec project_nuclear_block(const Vec& c, Index rows, Index cols, double radius) {
  const Eigen::Map<const Mat> C(c.data(), rows, cols);
  Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec s = project_capped_simplex(svd.singularValues(), radius);
  const Mat P = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return Eigen::Map<const Vec>(P.data(), P.size());
}

bool unconstrained(const ReducedModel& model, const ReducedOptions& opts) {
  if (opts.radius) return false;
  for (const auto& b : model.blocks)
    if (b.domain == CoefficientDomain::Nonnegative || b.domain == CoefficientDomain::PsdMatrix) return false;
  return true;
}

}  // namespace

Vec project_coefficients(const ReducedModel& model, const Vec& c, std::optional<double> radius) {
  if (c.size() != model.coefficient_count()) throw DimensionError("project_coefficients: size mismatch");
  if (radius && model.blocks.size() != 1) throw ArgumentError("project_coefficients: radius needs a single block");
  Vec out = c;
  Index off = 0;
  for (const auto& b : model.blocks) {
    const Index nc = b.coefficient_count();
    auto seg = out.segment(off, nc);
    switch (b.domain) {
      case CoefficientDomain::Nonnegative:
        seg = radius ? project_capped_simplex(seg, *radius) : Vec(seg.cwiseMax(0.0));
        break;
      case CoefficientDomain::Free:
        if (radius) seg = project_l1_ball(seg, *radius);
        break;
      case CoefficientDomain::FreeMatrix:
        if (radius) seg = project_nuclear_block(seg, b.U.cols(), b.V.cols(), *radius);
        break;
      case CoefficientDomain::PsdMatrix:
        seg = project_psd_block(seg, b.V.cols(), radius);
        break;
    }
    off += nc;
  }
  return out;
}

ReducedSolution solve_reduced(const ProblemSpec& spec, const ReducedModel& model, const ReducedOptions& opts) {
  const Mat G = reduced_design(*spec.M, model);
  const Vec bvec = flat(spec.b);
  ReducedSolution sol;
  Vec c = G.completeOrthogonalDecomposition().solve(bvec);

  if (!unconstrained(model, opts)) {
    const Mat H = G.transpose() * G;
    const Vec g0 = G.transpose() * bvec;
    const double bb = 0.5 * bvec.squaredNorm();
    auto objective = [&](const Vec& v) { return bb - g0.dot(v) + 0.5 * v.dot(H * v); };
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    const double L = std::max(es.eigenvalues().maxCoeff(), 1e-300);

    c = project_coefficients(model, c, opts.radius);
    double fc = objective(c);
    Vec yk = c;
    double tk = 1.0;
    sol.unconverged = true;
    for (int it = 1; it <= opts.max_iter; ++it) {
      sol.iterations = it;
      Vec cn = project_coefficients(model, yk - (H * yk - g0) / L, opts.radius);
      double fn = objective(cn);
      if (fn > fc) {
        // restart from the current point with a plain projected step
        tk = 1.0;
        cn = project_coefficients(model, c - (H * c - g0) / L, opts.radius);
        fn = objective(cn);
        if (fn > fc) {
          sol.unconverged = false;
          break;
        }
      }
      const double decrease = fc - fn;
      const double move = (cn - c).norm();
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      yk = cn + ((tk - 1.0) / t_next) * (cn - c);
      tk = t_next;
      c = std::move(cn);
      fc = fn;
      if (decrease <= opts.tol * std::max(1.0, std::abs(fc)) && move <= 1e-10 * std::max(1.0, c.norm())) {
        sol.unconverged = false;
        break;
      }
    }
  }

  const Vec Gc = G * c;
  sol.coefficients = c;
  sol.f_k = spec.loss.value(bvec - Gc);
  sol.x = model.reconstruct(c);
  sol.Mx = Eigen::Map<const Mat>(Gc.data(), spec.M->out_shape().rows, spec.M->out_shape().cols);
  return sol;
}

}  // namespace atomret
