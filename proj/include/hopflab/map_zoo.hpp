#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hopflab/sphere_calculus.hpp"
#include "hopflab/vec.hpp"

#include "json.hpp"

namespace hopflab {

/// Evaluatable map S^3 -> S^2. diff is the closed-form differential when one
/// is available (empty otherwise; consumers fall back to finite differences).
struct SphereMap {
  std::function<Vec3(const Vec4&)> eval;
  std::function<Vec3(const Vec4&, const Vec4&)> diff;
  std::string label;
  nlohmann::ordered_json descriptor;

  bool has_analytic_differential() const { return static_cast<bool>(diff); }
};

/// Self-map of S^2 with optional closed-form differential and conformal
/// factor handle (the common singular value, where the map is conformal).
struct SphereSelfMap {
  std::function<Vec3(const Vec3&)> eval;
  std::function<Vec3(const Vec3&, const Vec3&)> diff;
  std::function<double(const Vec3&)> conformal_factor;
  std::string label;
};

struct MobiusMap {
  std::complex<double> a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};
  /// Conjugate the chart coordinate first (orientation-reversing factor).
  bool conjugate_input = false;

  void validate() const;  // ad - bc must not vanish
};

/// Rational map p(z)/q(z) with ascending coefficient lists.
struct RationalMap {
  std::vector<std::complex<double>> num{{0, 0}, {1, 0}};
  std::vector<std::complex<double>> den{{1, 0}};

  void validate() const;  // no common roots (resultant), not both constant
};

SphereMap hopf_map();
SphereMap constant_map(const Vec3& value = Vec3{0, 0, 1});
SphereSelfMap identity_s2();
SphereSelfMap mobius_on_sphere(const MobiusMap& m);
SphereSelfMap rational_on_sphere(const RationalMap& r);
SphereMap compose_with_hopf(const SphereSelfMap& g, const std::string& label,
                            nlohmann::ordered_json descriptor);

/// normalize(f + amplitude * V(f)) for a fixed low-degree polynomial vector
/// field V with coefficients drawn from the seeded generator. Amplitude 0
/// returns f itself.
SphereMap perturb(const SphereMap& f, std::uint64_t seed, double amplitude);

/// Text grammar: hopf | constant | mobius:a,b,c,d | mobiusbar:a,b,c,d |
/// rational:p/q | perturbed:<base>,<amplitude>,<seed>.
/// Complex entries are re or re+imi / re-imi tokens.
SphereMap parse_map_descriptor(const std::string& text);

SphereMap map_from_json(const nlohmann::ordered_json& j);

// Stereographic machinery shared with tests: the sphere point of a
// homogeneous coordinate pair [z0 : z1], z = z0/z1 the chart from the north
// pole, and its exact differential.
Vec3 cp_to_sphere(std::complex<double> z0, std::complex<double> z1);
void sphere_to_cp(const Vec3& x, std::complex<double>& z0,
                  std::complex<double>& z1);

}  // namespace hopflab
