#include "hopflab/pinching.hpp"

#include <algorithm>
#include <cmath>

#include "hopflab/errors.hpp"
#include "hopflab/io.hpp"
#include "hopflab/rng.hpp"

namespace hopflab {

Theorem theorem_from_string(const std::string& s) {
  if (s == "A1") return Theorem::kA1;
  if (s == "A2") return Theorem::kA2;
  if (s == "C") return Theorem::kC;
  if (s == "B-constant-u") return Theorem::kBConstU;
  if (s == "B-constant-d2") return Theorem::kBConstD2;
  if (s == "B-custom-W") return Theorem::kBCustomW;
  throw UsageError("unknown theorem selector '" + s + "'");
}

std::string theorem_to_string(Theorem t) {
  switch (t) {
    case Theorem::kA1: return "A1";
    case Theorem::kA2: return "A2";
    case Theorem::kC: return "C";
    case Theorem::kBConstU: return "B-constant-u";
    case Theorem::kBConstD2: return "B-constant-d2";
    case Theorem::kBCustomW: return "B-custom-W";
  }
  return "?";
}

double margin_A(const SphereMap& f, const Vec4& p, double a,
                const FDConfig& cfg) {
  SingularData s = svd(f, p, cfg);
  double d2 = s.lambda * s.mu;
  auto [b2, g2] = hessian_gradient_norms(f, s, cfg);
  (void)g2;
  return d2 * (d2 + a) - b2;
}

double margin_C(const SphereMap& f, const Vec4& p, const FDConfig& cfg,
                double* bzz) {
  SingularData s = svd(f, p, cfg);
  double d2 = s.lambda * s.mu;
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  if (bzz) {
    double b433 = B.b[0][2][2], b533 = B.b[1][2][2];
    *bzz = std::sqrt(b433 * b433 + b533 * b533);
  }
  double b2 = B.norm2();
  return 2.0 * d2 * (d2 + 2.0) - b2;
}

namespace {

std::vector<Vec4> sample_points(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec4> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = rng.unit4();
  return pts;
}

}  // namespace

std::vector<std::pair<Vec4, double>> margin_samples(const SphereMap& f,
                                                    Theorem theorem, double a,
                                                    int n, std::uint64_t seed,
                                                    const PinchOptions& opt) {
  auto pts = sample_points(n, seed);
  std::vector<std::pair<Vec4, double>> out(pts.size());
  parallel_for(opt.mode, pts.size(), [&](std::size_t i) {
    double m = (theorem == Theorem::kC)
                   ? margin_C(f, pts[i], opt.cfg)
                   : margin_A(f, pts[i], (theorem == Theorem::kA2) ? 2.0 : a,
                              opt.cfg);
    out[i] = {pts[i], m};
  });
  return out;
}

PinchReport scan(const SphereMap& f, Theorem theorem, double a, int n,
                 std::uint64_t seed, const PinchOptions& opt) {
  if (theorem == Theorem::kBConstU || theorem == Theorem::kBConstD2 ||
      theorem == Theorem::kBCustomW)
    return check_thmB(f, theorem, std::nullopt, n, seed, opt);
  if (theorem == Theorem::kA1 && !(a >= 0.0 && a < 2.0))
    throw UsageError("theorem A1 needs a in [0, 2)");
  double a_eff = (theorem == Theorem::kA2) ? 2.0 : a;

  auto pts = sample_points(n, seed);
  std::vector<double> margins(pts.size());
  std::vector<double> bzz(pts.size(), 0.0);
  parallel_for(opt.mode, pts.size(), [&](std::size_t i) {
    if (theorem == Theorem::kC)
      margins[i] = margin_C(f, pts[i], opt.cfg, &bzz[i]);
    else
      margins[i] = margin_A(f, pts[i], a_eff, opt.cfg);
  });

  PinchReport r;
  r.theorem = theorem;
  r.a_param = a_eff;
  r.n_samples = n;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (margins[i] < margins[arg]) arg = i;
    r.max_margin = (i == 0) ? margins[i] : std::max(r.max_margin, margins[i]);
  }
  r.min_margin = margins[arg];
  r.argmin = pts[arg];

  if (theorem == Theorem::kC) {
    r.precondition_measure = *std::max_element(bzz.begin(), bzz.end());
    if (r.precondition_measure > opt.fiber_tol) {
      r.verdict = "vacuous";
      r.note = "fibers are not totally geodesic: max |B(zeta,zeta)| = " +
               format_double(r.precondition_measure);
      return r;
    }
  }
  bool ok = (theorem == Theorem::kA2) ? (r.min_margin > opt.strict_eps)
                                      : (r.min_margin >= 0.0);
  r.verdict = ok ? "satisfied" : "violated";
  return r;
}

PinchReport check_thmB(const SphereMap& f, Theorem mode,
                       const std::optional<RelationW>& relation, int n,
                       std::uint64_t seed, const PinchOptions& opt) {
  PinchReport r;
  r.theorem = mode;
  r.n_samples = n;

  auto pts = sample_points(n, seed);

  // harmonicity gate on a fixed subsample
  {
    int m = std::min<int>(20, n);
    double worst = 0;
    for (int i = 0; i < m; ++i)
      worst = std::max(worst, tension(f, pts[i], opt.cfg).norm);
    if (worst > 1e-5)
      throw PreconditionError("check_thmB: map is not harmonic, |tau| up to " +
                              format_double(worst) + " on samples");
  }

  std::vector<double> lam(pts.size()), mu(pts.size());
  parallel_for(opt.mode, pts.size(), [&](std::size_t i) {
    SingularData s = svd(f, pts[i], opt.cfg);
    lam[i] = s.lambda;
    mu[i] = s.mu;
  });

  if (mode == Theorem::kBConstU || mode == Theorem::kBConstD2) {
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      vals[i] = (mode == Theorem::kBConstU) ? lam[i] * lam[i] + mu[i] * mu[i]
                                            : lam[i] * mu[i];
    auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    r.value_min = *mn;
    r.value_max = *mx;
    r.spread = *mx - *mn;
    double scale = opt.tol * std::max(1.0, *mx);
    r.min_margin = scale - r.spread;
    r.max_margin = r.min_margin;
    std::size_t arg = std::distance(vals.begin(),
                                    std::max_element(vals.begin(), vals.end()));
    r.argmin = pts[arg];
    if (r.spread < scale) {
      r.verdict = "satisfied";
      r.note =
          "Hopf fibration candidate (possibly constant): sampled " +
          std::string(mode == Theorem::kBConstU ? "energy density"
                                                : "2-dilation") +
          " is constant to " + format_double(r.spread);
    } else {
      r.verdict = "violated";
      r.note = "sampled spread " + format_double(r.spread) +
               " exceeds tolerance " + format_double(scale);
    }
    return r;
  }

  if (!relation)
    throw UsageError("check_thmB: custom mode needs a relation W");
  // relation must hold on the samples before the nondegeneracy means anything
  double worstW = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    worstW = std::max(worstW, std::abs(relation->W(lam[i], mu[i])));
  if (worstW > opt.relation_tol)
    throw PreconditionError(
        "check_thmB: relation W(lambda, mu) = 0 fails on samples, |W| up to " +
        format_double(worstW));
  double minnd = 0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nd = std::abs(mu[i] * relation->Wx(lam[i], mu[i]) +
                         lam[i] * relation->Wy(lam[i], mu[i]));
    if (i == 0 || nd < minnd) {
      minnd = nd;
      arg = i;
    }
  }
  r.min_margin = minnd - 1e-6;  // bounded away from zero
  r.max_margin = r.min_margin;
  r.spread = worstW;
  r.argmin = pts[arg];
  r.note = "min |mu Wx + lambda Wy| = " + format_double(minnd) +
           " on the sampled zero set";
  r.verdict = (r.min_margin >= 0) ? "satisfied" : "violated";
  if (r.verdict == "satisfied")
    r.note += "; Hopf fibration candidate (possibly constant)";
  return r;
}

nlohmann::ordered_json pinch_report_to_json(const PinchReport& r) {
  nlohmann::ordered_json j{
      {"theorem", theorem_to_string(r.theorem)},
      {"a", r.a_param},
      {"n_samples", r.n_samples},
      {"min_margin", r.min_margin},
      {"max_margin", r.max_margin},
      {"argmin", {r.argmin[0], r.argmin[1], r.argmin[2], r.argmin[3]}},
      {"verdict", r.verdict}};
  if (r.theorem == Theorem::kBConstU || r.theorem == Theorem::kBConstD2) {
    j["spread"] = r.spread;
    j["value_min"] = r.value_min;
    j["value_max"] = r.value_max;
  }
  if (r.theorem == Theorem::kC)
    j["max_fiber_hessian"] = r.precondition_measure;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace hopflab
