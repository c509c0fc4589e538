#include "hopflab/map_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hopflab/errors.hpp"
#include "hopflab/quaternion.hpp"
#include "hopflab/rng.hpp"

namespace hopflab {

using cplx = std::complex<double>;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Riemann sphere via homogeneous pairs. Working with [z0 : z1] instead of a
// literal chart z = z0/z1 evaluates the algebraic limit at the pole exactly
// and never overflows; poles of rational maps need no special case because
// only |P|^2 + |Q|^2 appears in denominators.
// ---------------------------------------------------------------------------

Vec3 cp_to_sphere(cplx z0, cplx z1) {
  double n = std::norm(z0) + std::norm(z1);
  cplx m = z0 * std::conj(z1);
  return {2.0 * m.real() / n, 2.0 * m.imag() / n,
          (std::norm(z0) - std::norm(z1)) / n};
}

void sphere_to_cp(const Vec3& x, cplx& z0, cplx& z1) {
  // two equivalent lifts of the chart from the north pole; pick the better
  // conditioned one
  if (x[2] <= 0) {
    z0 = cplx(x[0], x[1]);
    z1 = cplx(1.0 - x[2], 0.0);
  } else {
    z0 = cplx(1.0 + x[2], 0.0);
    z1 = cplx(x[0], -x[1]);
  }
  double s = 1.0 / std::sqrt(std::norm(z0) + std::norm(z1));
  z0 *= s;
  z1 *= s;
}

namespace {

struct Cp2 {
  cplx z0, z1;
};

// differential of the lift used in sphere_to_cp (unnormalized branch; the
// projection below is scale invariant and kills the normalization terms)
Cp2 dlift(const Vec3& x, const Vec3& v) {
  if (x[2] <= 0) return {cplx(v[0], v[1]), cplx(-v[2], 0.0)};
  return {cplx(v[2], 0.0), cplx(v[0], -v[1])};
}

Cp2 lift_raw(const Vec3& x) {
  if (x[2] <= 0) return {cplx(x[0], x[1]), cplx(1.0 - x[2], 0.0)};
  return {cplx(1.0 + x[2], 0.0), cplx(x[0], -x[1])};
}

// exact differential of cp_to_sphere at Z applied to dZ
Vec3 dcp_to_sphere(const Cp2& Z, const Cp2& dZ) {
  double n = std::norm(Z.z0) + std::norm(Z.z1);
  cplx m = Z.z0 * std::conj(Z.z1);
  Vec3 val{2.0 * m.real(), 2.0 * m.imag(), std::norm(Z.z0) - std::norm(Z.z1)};
  cplx dm = dZ.z0 * std::conj(Z.z1) + Z.z0 * std::conj(dZ.z1);
  double d0 = 2.0 * (std::conj(Z.z0) * dZ.z0).real();
  double d1 = 2.0 * (std::conj(Z.z1) * dZ.z1).real();
  Vec3 dval{2.0 * dm.real(), 2.0 * dm.imag(), d0 - d1};
  double dn = d0 + d1;
  return (1.0 / n) * dval - (dn / (n * n)) * val;
}

// Homogeneous bivariate polynomial pair for a rational map of degree d:
// P_h(z0, z1) = sum_k c_k z0^k z1^(d-k).
struct HomogeneousPair {
  std::vector<cplx> p, q;  // ascending, padded to common length d+1
  int d = 0;

  void eval(const Cp2& Z, cplx& P, cplx& Q) const {
    std::vector<cplx> pw0(d + 1), pw1(d + 1);
    pw0[0] = 1.0;
    pw1[0] = 1.0;
    for (int k = 1; k <= d; ++k) {
      pw0[k] = pw0[k - 1] * Z.z0;
      pw1[k] = pw1[k - 1] * Z.z1;
    }
    P = 0;
    Q = 0;
    for (int k = 0; k <= d; ++k) {
      cplx mono = pw0[k] * pw1[d - k];
      P += p[k] * mono;
      Q += q[k] * mono;
    }
  }

  // holomorphic Jacobian applied to dZ, and the partials themselves
  void partials(const Cp2& Z, cplx& P0, cplx& P1, cplx& Q0, cplx& Q1) const {
    P0 = P1 = Q0 = Q1 = 0;
    std::vector<cplx> pw0(d + 1), pw1(d + 1);
    pw0[0] = 1.0;
    pw1[0] = 1.0;
    for (int k = 1; k <= d; ++k) {
      pw0[k] = pw0[k - 1] * Z.z0;
      pw1[k] = pw1[k - 1] * Z.z1;
    }
    for (int k = 0; k <= d; ++k) {
      if (k > 0) {
        cplx mono = double(k) * pw0[k - 1] * pw1[d - k];
        P0 += p[k] * mono;
        Q0 += q[k] * mono;
      }
      if (d - k > 0) {
        cplx mono = double(d - k) * pw0[k] * pw1[d - k - 1];
        P1 += p[k] * mono;
        Q1 += q[k] * mono;
      }
    }
  }
};

HomogeneousPair homogenize(const std::vector<cplx>& num,
                           const std::vector<cplx>& den) {
  HomogeneousPair h;
  h.d = static_cast<int>(std::max(num.size(), den.size())) - 1;
  h.p.assign(h.d + 1, 0.0);
  h.q.assign(h.d + 1, 0.0);
  std::copy(num.begin(), num.end(), h.p.begin());
  std::copy(den.begin(), den.end(), h.q.begin());
  return h;
}

SphereSelfMap self_map_from_pair(const HomogeneousPair& h, bool conjugate,
                                 const std::string& label) {
  SphereSelfMap g;
  g.label = label;
  auto lift_in = [conjugate](const Vec3& x) {
    Cp2 Z = lift_raw(x);
    double s = 1.0 / std::sqrt(std::norm(Z.z0) + std::norm(Z.z1));
    Z.z0 *= s;
    Z.z1 *= s;
    if (conjugate) {
      Z.z0 = std::conj(Z.z0);
      Z.z1 = std::conj(Z.z1);
    }
    return Z;
  };
  g.eval = [h, lift_in](const Vec3& x) {
    Cp2 Z = lift_in(x);
    cplx P, Q;
    h.eval(Z, P, Q);
    return cp_to_sphere(P, Q);
  };
  g.diff = [h, lift_in, conjugate](const Vec3& x, const Vec3& v) {
    Cp2 Z0 = lift_raw(x);
    double s = 1.0 / std::sqrt(std::norm(Z0.z0) + std::norm(Z0.z1));
    Cp2 Z{Z0.z0 * s, Z0.z1 * s};
    Cp2 dZ = dlift(x, v);
    dZ.z0 *= s;
    dZ.z1 *= s;
    if (conjugate) {
      Z.z0 = std::conj(Z.z0);
      Z.z1 = std::conj(Z.z1);
      dZ.z0 = std::conj(dZ.z0);
      dZ.z1 = std::conj(dZ.z1);
    }
    cplx P, Q, P0, P1, Q0, Q1;
    h.eval(Z, P, Q);
    h.partials(Z, P0, P1, Q0, Q1);
    Cp2 W{P, Q};
    Cp2 dW{P0 * dZ.z0 + P1 * dZ.z1, Q0 * dZ.z0 + Q1 * dZ.z1};
    return dcp_to_sphere(W, dW);
  };
  // common singular value via the chart-free Wronskian formula; on the unit
  // lift: sigma = |P0 Q1 - P1 Q0| / (d (|P|^2 + |Q|^2))
  int degree = h.d;
  g.conformal_factor = [h, lift_in, degree](const Vec3& x) {
    Cp2 Z = lift_in(x);
    cplx P, Q, P0, P1, Q0, Q1;
    h.eval(Z, P, Q);
    h.partials(Z, P0, P1, Q0, Q1);
    double wr = std::abs(P0 * Q1 - P1 * Q0);
    return wr / (degree * (std::norm(P) + std::norm(Q)));
  };
  return g;
}

// resultant of two complex polynomials via the Sylvester matrix (LU with
// partial pivoting); scale-invariant relative magnitude
double resultant_relative(const std::vector<cplx>& pc,
                          const std::vector<cplx>& qc) {
  auto trimmed = [](std::vector<cplx> v) {
    while (v.size() > 1 && std::abs(v.back()) < 1e-14 * (1.0 + std::abs(v[0])))
      v.pop_back();
    return v;
  };
  std::vector<cplx> p = trimmed(pc), q = trimmed(qc);
  int m = static_cast<int>(p.size()) - 1, n = static_cast<int>(q.size()) - 1;
  if (m == 0 || n == 0) return 1.0;  // a nonzero constant shares no root
  int dim = m + n;
  std::vector<cplx> S(dim * dim, 0.0);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= m; ++k) S[r * dim + r + k] = p[m - k];
  for (int r = 0; r < m; ++r)
    for (int k = 0; k <= n; ++k) S[(n + r) * dim + r + k] = q[n - k];
  double logdet = 0.0;
  for (int col = 0; col < dim; ++col) {
    int piv = col;
    for (int r = col + 1; r < dim; ++r)
      if (std::abs(S[r * dim + col]) > std::abs(S[piv * dim + col])) piv = r;
    if (std::abs(S[piv * dim + col]) < 1e-300) return 0.0;
    if (piv != col)
      for (int c = 0; c < dim; ++c) std::swap(S[piv * dim + c], S[col * dim + c]);
    logdet += std::log(std::abs(S[col * dim + col]));
    for (int r = col + 1; r < dim; ++r) {
      cplx f = S[r * dim + col] / S[col * dim + col];
      for (int c = col; c < dim; ++c) S[r * dim + c] -= f * S[col * dim + c];
    }
  }
  double pn = 0, qn = 0;
  for (auto& c : p) pn = std::max(pn, std::abs(c));
  for (auto& c : q) qn = std::max(qn, std::abs(c));
  // |Res(p, q)| normalized by ||p||^n ||q||^m
  return std::exp(logdet - n * std::log(pn) - m * std::log(qn));
}

cplx parse_cplx_token(const std::string& tok) {
  // re | re+imi | re-imi
  std::size_t i = tok.find_first_of("+-", 1);
  // skip exponent signs like 1e-3
  while (i != std::string::npos && (tok[i - 1] == 'e' || tok[i - 1] == 'E'))
    i = tok.find_first_of("+-", i + 1);
  try {
    if (i == std::string::npos || tok.back() != 'i')
      return cplx(std::stod(tok), 0.0);
    double re = std::stod(tok.substr(0, i));
    std::string imtok = tok.substr(i, tok.size() - i - 1);
    if (imtok == "+" || imtok == "-") imtok += "1";
    return cplx(re, std::stod(imtok));
  } catch (const std::exception&) {
    throw UsageError("bad numeric token '" + tok + "' in map descriptor");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

json coeffs_to_json(const std::vector<cplx>& v) {
  json arr = json::array();
  for (auto& c : v) arr.push_back(json::array({c.real(), c.imag()}));
  return arr;
}

std::vector<cplx> coeffs_from_json(const json& arr) {
  std::vector<cplx> out;
  for (auto& e : arr) out.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return out;
}

}  // namespace

void MobiusMap::validate() const {
  if (std::abs(a * d - b * c) <= 1e-12)
    throw UsageError("MobiusMap: ad - bc vanishes");
}

void RationalMap::validate() const {
  if (num.empty() || den.empty())
    throw UsageError("RationalMap: empty coefficient list");
  auto maxabs = [](const std::vector<cplx>& v) {
    double m = 0;
    for (auto& c : v) m = std::max(m, std::abs(c));
    return m;
  };
  if (maxabs(num) < 1e-14 || maxabs(den) < 1e-14)
    throw UsageError("RationalMap: numerator or denominator is zero");
  if (num.size() <= 1 && den.size() <= 1)
    throw UsageError("RationalMap: constant map; use 'constant' instead");
  if (resultant_relative(num, den) < 1e-12)
    throw UsageError("RationalMap: numerator and denominator share a root");
}

SphereMap hopf_map() {
  SphereMap f;
  f.label = "hopf";
  f.descriptor = json{{"kind", "hopf"}};
  f.eval = [](const Vec4& p) { return hopf_pi(p); };
  f.diff = [](const Vec4& p, const Vec4& v) { return hopf_dpi(p, v); };
  return f;
}

SphereMap constant_map(const Vec3& value) {
  SphereMap f;
  f.label = "constant";
  f.descriptor = json{{"kind", "constant"},
                      {"value", {value[0], value[1], value[2]}}};
  Vec3 y = normalized(value);
  f.eval = [y](const Vec4&) { return y; };
  f.diff = [](const Vec4&, const Vec4&) { return Vec3{0, 0, 0}; };
  return f;
}

SphereSelfMap identity_s2() {
  SphereSelfMap g;
  g.label = "id";
  g.eval = [](const Vec3& x) { return x; };
  g.diff = [](const Vec3& x, const Vec3& v) { return project_tangent(x, v); };
  g.conformal_factor = [](const Vec3&) { return 1.0; };
  return g;
}

SphereSelfMap mobius_on_sphere(const MobiusMap& m) {
  m.validate();
  HomogeneousPair h = homogenize({m.b, m.a}, {m.d, m.c});
  std::string label = m.conjugate_input ? "mobiusbar" : "mobius";
  return self_map_from_pair(h, m.conjugate_input, label);
}

SphereSelfMap rational_on_sphere(const RationalMap& r) {
  r.validate();
  return self_map_from_pair(homogenize(r.num, r.den), false, "rational");
}

SphereMap compose_with_hopf(const SphereSelfMap& g, const std::string& label,
                            json descriptor) {
  SphereMap f;
  f.label = label;
  f.descriptor = std::move(descriptor);
  auto ge = g.eval;
  f.eval = [ge](const Vec4& p) { return ge(hopf_pi(p)); };
  if (g.diff) {
    auto gd = g.diff;
    f.diff = [gd](const Vec4& p, const Vec4& v) {
      return gd(hopf_pi(p), hopf_dpi(p, v));
    };
  }
  return f;
}

SphereMap perturb(const SphereMap& f, std::uint64_t seed, double amplitude) {
  if (amplitude < 0) throw UsageError("perturb: amplitude must be >= 0");
  if (amplitude == 0) return f;
  Rng rng(seed);
  // quadratic polynomial vector field on R^3 with seeded coefficients
  Vec3 c0;
  double L[3][3], Q[3][3][3];
  for (int i = 0; i < 3; ++i) c0[i] = 0.5 * rng.normal();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) L[i][j] = 0.5 * rng.normal();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) Q[i][j][k] = 0.3 * rng.normal();

  auto V = [=](const Vec3& y) {
    Vec3 out = c0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        out[i] += L[i][j] * y[j];
        for (int k = 0; k < 3; ++k) out[i] += Q[i][j][k] * y[j] * y[k];
      }
    return out;
  };
  auto dV = [=](const Vec3& y, const Vec3& w) {
    Vec3 out{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        out[i] += L[i][j] * w[j];
        for (int k = 0; k < 3; ++k)
          out[i] += Q[i][j][k] * (w[j] * y[k] + y[j] * w[k]);
      }
    return out;
  };

  SphereMap out;
  out.label = "perturbed(" + f.label + ")";
  out.descriptor = json{{"kind", "perturbed"},
                        {"base", f.descriptor},
                        {"amplitude", amplitude},
                        {"seed", seed}};
  auto base_eval = f.eval;
  out.eval = [base_eval, V, amplitude](const Vec4& p) {
    Vec3 y = base_eval(p);
    return normalized(y + amplitude * V(y));
  };
  if (f.diff) {
    auto base_diff = f.diff;
    out.diff = [base_eval, base_diff, V, dV, amplitude](const Vec4& p,
                                                        const Vec4& v) {
      Vec3 y = base_eval(p);
      Vec3 w = base_diff(p, v);
      Vec3 z = y + amplitude * V(y);
      Vec3 dz = w + amplitude * dV(y, w);
      double n = norm(z);
      Vec3 zh = z * (1.0 / n);
      return (1.0 / n) * project_tangent(zh, dz);
    };
  }
  return out;
}

namespace {

SphereMap mobius_composed(const std::array<cplx, 4>& co, bool conjugate) {
  MobiusMap m{co[0], co[1], co[2], co[3], conjugate};
  json desc{{"kind", conjugate ? "mobiusbar∘hopf" : "mobius∘hopf"},
            {"coefficients",
             coeffs_to_json({co[0], co[1], co[2], co[3]})}};
  return compose_with_hopf(mobius_on_sphere(m),
                           (conjugate ? "mobiusbar∘hopf" : "mobius∘hopf"),
                           desc);
}

SphereMap rational_composed(const RationalMap& r) {
  json desc{{"kind", "rational∘hopf"},
            {"numerator", coeffs_to_json(r.num)},
            {"denominator", coeffs_to_json(r.den)}};
  return compose_with_hopf(rational_on_sphere(r), "rational∘hopf", desc);
}

}  // namespace

SphereMap parse_map_descriptor(const std::string& text) {
  if (text == "hopf") return hopf_map();
  if (text == "constant") return constant_map();
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "mobius" || head == "mobiusbar") {
    auto toks = split(rest, ',');
    if (toks.size() != 4)
      throw UsageError("mobius descriptor needs 4 coefficients, got '" + text +
                       "'");
    std::array<cplx, 4> co;
    for (int i = 0; i < 4; ++i) co[i] = parse_cplx_token(toks[i]);
    return mobius_composed(co, head == "mobiusbar");
  }
  if (head == "rational") {
    auto sides = split(rest, '/');
    if (sides.size() != 2)
      throw UsageError("rational descriptor needs p/q coefficient lists");
    RationalMap r;
    r.num.clear();
    r.den.clear();
    for (auto& t : split(sides[0], ',')) r.num.push_back(parse_cplx_token(t));
    for (auto& t : split(sides[1], ',')) r.den.push_back(parse_cplx_token(t));
    return rational_composed(r);
  }
  if (head == "perturbed") {
    // base may itself contain commas; amplitude and seed are the last two
    auto last = rest.rfind(',');
    auto second = last == std::string::npos ? std::string::npos
                                            : rest.rfind(',', last - 1);
    if (second == std::string::npos)
      throw UsageError("perturbed descriptor: perturbed:<base>,<amp>,<seed>");
    std::string base = rest.substr(0, second);
    std::string amp = rest.substr(second + 1, last - second - 1);
    std::string seed = rest.substr(last + 1);
    try {
      return perturb(parse_map_descriptor(base), std::stoull(seed),
                     std::stod(amp));
    } catch (const std::invalid_argument&) {
      throw UsageError("perturbed descriptor: bad amplitude or seed in '" +
                       text + "'");
    }
  }
  throw UsageError("unknown map descriptor '" + text + "'");
}

SphereMap map_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "hopf") return hopf_map();
  if (kind == "constant") {
    auto v = j.at("value");
    return constant_map(Vec3{v.at(0).get<double>(), v.at(1).get<double>(),
                             v.at(2).get<double>()});
  }
  if (kind == "mobius∘hopf" || kind == "mobiusbar∘hopf") {
    auto co = coeffs_from_json(j.at("coefficients"));
    return mobius_composed({co.at(0), co.at(1), co.at(2), co.at(3)},
                           kind == "mobiusbar∘hopf");
  }
  if (kind == "rational∘hopf") {
    RationalMap r;
    r.num = coeffs_from_json(j.at("numerator"));
    r.den = coeffs_from_json(j.at("denominator"));
    return rational_composed(r);
  }
  if (kind == "perturbed") {
    SphereMap base = map_from_json(j.at("base"));
    return perturb(base, j.at("seed").get<std::uint64_t>(),
                   j.at("amplitude").get<double>());
  }
  throw UsageError("unknown map kind '" + kind + "' in JSON descriptor");
}

}  // namespace hopflab
