#include "atomret/retrieval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace atomret {

const char* to_string(RetrievalStatus s) {
  switch (s) {
    case RetrievalStatus::FeasibleFound: return "feasible_found";
    case RetrievalStatus::MaxIter: return "max_iter";
    case RetrievalStatus::OracleFailed: return "oracle_failed";
  }
  return "unknown";
}

namespace {

bool same_model(const ReducedModel& a, const ReducedModel& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    const auto& x = a.blocks[i];
    const auto& y = b.blocks[i];
    if (x.domain != y.domain || x.weight != y.weight) return false;
    if (x.domain == CoefficientDomain::FreeMatrix || x.domain == CoefficientDomain::PsdMatrix) return false;
    if (x.atoms.size() != y.atoms.size()) return false;
    for (size_t j = 0; j < x.atoms.size(); ++j)
      if (!same_atom(x.atoms[j], y.atoms[j])) return false;
  }
  return true;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::vector<WeightedAtom> summarize(const ReducedModel& model, const Vec& c, double rel_tol) {
  if (c.size() != model.coefficient_count()) throw DimensionError("summarize: coefficient count mismatch");
  std::vector<WeightedAtom> out;
  const double scale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  const double cut = rel_tol * std::max(scale, 1e-300);
  Index off = 0;
  for (const auto& b : model.blocks) {
    const Index nc = b.coefficient_count();
    auto wrap = [&](Atom a) { return b.weight != 1.0 ? make_scaled(b.weight, std::move(a)) : a; };
    if (b.domain == CoefficientDomain::FreeMatrix) {
      const Eigen::Map<const Mat> C(c.data() + off, b.U.cols(), b.V.cols());
      Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
      for (Index i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()[i];
        if (s <= cut) continue;
        out.push_back({wrap(make_rank1((b.U * svd.matrixU().col(i)).normalized(),
                                       (b.V * svd.matrixV().col(i)).normalized())),
                       s});
      }
    } else if (b.domain == CoefficientDomain::PsdMatrix) {
      const Eigen::Map<const Mat> C(c.data() + off, b.V.cols(), b.V.cols());
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.transpose()));
      for (Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
        const double s = es.eigenvalues()[i];
        if (s <= cut) continue;
        out.push_back({wrap(make_rank1_sym((b.V * es.eigenvectors().col(i)).normalized())), s});
      }
    } else {
      // merge duplicate canonical atoms (e.g. +e_i and -e_i both selected)
      std::vector<std::pair<Index, double>> acc;
      for (Index j = 0; j < nc; ++j) {
        const double v = c[off + j];
        const Atom& a = b.atoms[static_cast<size_t>(j)];
        Index idx = 0;
        double signed_v = v;
        if (const auto* su = std::get_if<SignedUnit>(&a.value)) {
          idx = su->index;
          signed_v = v * su->sign;
        } else if (const auto* nu = std::get_if<NonnegUnit>(&a.value)) {
          idx = nu->index;
        }
        auto it = std::find_if(acc.begin(), acc.end(), [&](const auto& p) { return p.first == idx; });
        if (it == acc.end())
          acc.emplace_back(idx, signed_v);
        else
          it->second += signed_v;
      }
      for (const auto& [idx, v] : acc) {
        if (std::abs(v) <= cut) continue;
        if (b.domain == CoefficientDomain::Nonnegative)
          out.push_back({wrap(make_nonneg(idx)), v});
        else
          out.push_back({wrap(make_signed(idx, v < 0 ? -1 : 1)), std::abs(v)});
      }
    }
    off += nc;
  }
  return out;
}

RetrievalReport run_retrieval(const ProblemSpec& spec, const RetrievalLimits& limits) {
  spec.validate();
  if (spec.set.has_spectral_part() && !(spec.eps_tol > 0.0))
    throw ConfigError(
        "run_retrieval: spectral atomic sets need eps_tol > 0; termination of the truncated-SVD retrieval "
        "is only guaranteed for a positive tolerance");
  if (limits.max_iter < 1) throw ConfigError("run_retrieval: max_iter must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const LinOp& M = *spec.M;

  RetrievalReport rep;
  M.counter_reset();
  if (!limits.skip_opnorm) rep.opnorm = atomic_opnorm(spec.set, M, limits.opnorm_trials);
  OracleOptions oracle = limits.oracle;
  if (!limits.skip_opnorm) oracle.atomic_opnorm = rep.opnorm;
  OracleState state = initial_oracle_state(spec, oracle);
  rep.setup_nmat = M.counter_snapshot().nmat();
  M.counter_reset();

  const int cadence = limits.cadence > 0 ? limits.cadence : (spec.set.has_spectral_part() ? 5 : 1);
  const bool weighted = spec.set.kind() == AtomicSet::Kind::WeightedSum;
  std::optional<ReducedModel> last_model;
  std::optional<ReducedSolution> last_solution;
  bool done = false;

  for (int t = 1; t <= limits.max_iter && !done; ++t) {
    try {
      state = dual_step(spec, state, limits.oracle);
    } catch (const NumericalError& e) {
      rep.status = RetrievalStatus::OracleFailed;
      rep.message = e.what();
      break;
    }
    IterationRow row;
    row.t = t;
    row.d_value = state.dual.d_value;
    if (!limits.skip_opnorm && std::isfinite(state.d_lower) &&
        (spec.formulation != Formulation::P3 || state.dual.beta_bracket))
      row.eps_bound = epsilon_bound(spec, state.dual, state.d_lower, rep.opnorm);

    std::optional<ReducedModel> model;
    std::optional<ReducedSolution> sol;
    if (t % cadence == 0 || t == limits.max_iter) {
      model = ess_model(spec.set, state.dual.Mty, spec.k, weighted ? spec.budget_right() : spec.k);
      if (last_model && last_solution && same_model(*model, *last_model))
        sol = last_solution;
      else
        sol = solve_reduced(spec, *model, limits.reduced);
      row.f_reduced = sol->f_k;
      row.feasible = sol->f_k <= spec.alpha + spec.eps_tol;
      last_model = model;
      last_solution = sol;
      if (row.feasible) {
        rep.status = RetrievalStatus::FeasibleFound;
        done = true;
      }
    }
    row.nmat = M.counter_snapshot().nmat();
    rep.rows.push_back(row);
    rep.iterations = t;
    if (limits.observer) {
      IterationView view{t, &state, model ? &*model : nullptr, sol ? &*sol : nullptr, &rep.rows.back()};
      limits.observer(view);
    }
  }

  if (last_model && last_solution) {
    rep.x = last_solution->x;
    rep.f_final = last_solution->f_k;
    rep.atoms = summarize(*last_model, last_solution->coefficients);
    rep.card = static_cast<Index>(rep.atoms.size());
    for (const auto& wa : rep.atoms) {
      if (std::holds_alternative<Scaled>(wa.atom.value))
        ++rep.card_left;
      else
        ++rep.card_right;
    }
  }
  rep.nmat = M.counter_snapshot().nmat();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

nlohmann::json RetrievalReport::to_json() const {
  nlohmann::json j;
  j["status"] = to_string(status);
  if (!message.empty()) j["message"] = message;
  j["iterations"] = iterations;
  j["f_final"] = json_number(f_final);
  j["card"] = card;
  j["card_left"] = card_left;
  j["card_right"] = card_right;
  j["nmat"] = nmat;
  j["setup_nmat"] = setup_nmat;
  j["nmat_convention"] = "forward + adjoint applications, one per leaf operator of a composite";
  j["atomic_opnorm"] = json_number(opnorm);
  j["wall_seconds"] = wall_seconds;
  auto& atoms_json = j["atoms"] = nlohmann::json::array();
  for (const auto& wa : atoms) atoms_json.push_back({{"atom", atomret::to_json(wa.atom)}, {"coefficient", wa.coefficient}});
  auto& trace = j["trace"] = nlohmann::json::array();
  for (const auto& r : rows) {
    trace.push_back({{"t", r.t},
                     {"d_value", json_number(r.d_value)},
                     {"eps_bound", r.eps_bound ? json_number(*r.eps_bound) : nlohmann::json(nullptr)},
                     {"f_reduced", r.f_reduced ? json_number(*r.f_reduced) : nlohmann::json(nullptr)},
                     {"feasible", r.feasible},
                     {"nMat", r.nmat}});
  }
  return j;
}

std::string RetrievalReport::to_csv() const {
  std::ostringstream os;
  os << "t,d_value,eps_bound,f_reduced,feasible,nMat\n";
  for (const auto& r : rows)
    os << r.t << ',' << fmt(r.d_value) << ',' << fmt(r.eps_bound) << ',' << fmt(r.f_reduced) << ','
       << (r.feasible ? 1 : 0) << ',' << r.nmat << '\n';
  return os.str();
}

// --------------------------------------------------------- diagnostics

bool hausdorff_degenerate(const TruncatedSvd& svd) {
  if (svd.S.size() == 0) return true;
  return svd.S[0] - svd.sigma_next_bound <= 0.0;
}

double hausdorff_bound(const TruncatedSvd& svd, double eps) {
  if (eps < 0.0) throw ArgumentError("hausdorff_bound: eps must be nonnegative");
  if (hausdorff_degenerate(svd)) return std::sqrt(2.0);
  const double ratio = std::min(eps / (svd.S[0] - svd.sigma_next_bound), 1.0);
  return std::sqrt(2.0 * ratio);
}

double nondegeneracy_margin(const AtomicSet& set, const LinOp& M, const Mat& y_star, const std::vector<Atom>& support) {
  if (!set.is_polyhedral()) throw ArgumentError("nondegeneracy_margin: finite atomic sets only");
  const Mat z = M.adjoint(y_star);
  require_shape(z, set.shape(), "nondegeneracy_margin");
  const double sigma = support_value(set, z);
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Atom& a) {
    for (const auto& s : support)
      if (same_atom(a, s)) return;
    best = std::max(best, atom_inner(a, z));
  };
  for (Index i = 0; i < z.size(); ++i) {
    if (set.kind() == AtomicSet::Kind::SignedCanonical) {
      consider(make_signed(i, 1));
      consider(make_signed(i, -1));
    } else {
      consider(make_nonneg(i));
    }
  }
  if (!std::isfinite(best)) return std::numeric_limits<double>::infinity();
  return sigma - best;
}

double hausdorff_recovery_bound(double D, Index s, double x_star_norm, double M_norm, double L, double alpha) {
  if (D < 0 || s < 0 || x_star_norm < 0 || M_norm < 0 || L < 0 || alpha < 0)
    throw ArgumentError("hausdorff_recovery_bound: inputs must be nonnegative");
  const double ss = static_cast<double>(s);
  return std::sqrt(2.0 * L * alpha) * M_norm * D * std::sqrt(ss) * x_star_norm +
         0.5 * L * M_norm * M_norm * D * D * ss * x_star_norm * x_star_norm;
}

double hausdorff_recovery_bound(const TruncatedSvd& svd, double eps, Index s, double x_star_norm, double M_norm,
                                double L, double alpha) {
  return hausdorff_recovery_bound(hausdorff_bound(svd, eps), s, x_star_norm, M_norm, L, alpha);
}

}  // namespace atomret
