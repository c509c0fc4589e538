#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "hopflab/svd_analysis.hpp"

namespace hopflab {

enum class Theorem { kA1, kA2, kC, kBConstU, kBConstD2, kBCustomW };

Theorem theorem_from_string(const std::string& s);
std::string theorem_to_string(Theorem t);

/// C^1 relation W(lambda, mu) = 0 with its partial derivatives; the
/// nondegeneracy mu Wx + lambda Wy != 0 on the zero set is what the
/// hypothesis requires.
struct RelationW {
  std::function<double(double, double)> W;
  std::function<double(double, double)> Wx;
  std::function<double(double, double)> Wy;
  std::string label;
};

struct PinchReport {
  Theorem theorem = Theorem::kA1;
  double a_param = 0;
  double min_margin = 0, max_margin = 0;
  Vec4 argmin{};
  int n_samples = 0;
  std::string verdict;  // satisfied | violated | vacuous
  // extras depending on the mode
  double spread = 0;           // thmB builtin: max - min of the invariant
  double value_min = 0, value_max = 0;
  double precondition_measure = 0;  // C: max |B(zeta,zeta)| over samples
  std::string note;
};

struct PinchOptions {
  FDConfig cfg;
  double tol = 1e-6;          // thmB builtin constancy threshold factor
  double strict_eps = 1e-9;   // decides the strict inequality of A2
  double relation_tol = 1e-8; // |W| <= this counts as on the zero set
  double fiber_tol = 1e-5;    // |B(zeta,zeta)| gate for theorem C
  ExecMode mode = ExecMode::kParallel;
};

/// D2 (D2 + a) - |B|^2 at p.
double margin_A(const SphereMap& f, const Vec4& p, double a,
                const FDConfig& cfg);

/// 2 D2 (D2 + 2) - |B|^2 at p; bzz receives |B(zeta, zeta)|.
double margin_C(const SphereMap& f, const Vec4& p, const FDConfig& cfg,
                double* bzz = nullptr);

/// Margin scan over n seeded sample points (theorems A1/A2/C).
PinchReport scan(const SphereMap& f, Theorem theorem, double a, int n,
                 std::uint64_t seed, const PinchOptions& opt);

/// Theorem B hypothesis check: builtin constant-u / constant-d2 spread
/// tests, or a custom relation. Sampled checks can only support or falsify
/// the hypothesis; a satisfied verdict names a Hopf-fibration candidate.
PinchReport check_thmB(const SphereMap& f, Theorem mode,
                       const std::optional<RelationW>& relation, int n,
                       std::uint64_t seed, const PinchOptions& opt);

/// Per-point margins for CSV dumps (same sampling as scan).
std::vector<std::pair<Vec4, double>> margin_samples(const SphereMap& f,
                                                    Theorem theorem, double a,
                                                    int n, std::uint64_t seed,
                                                    const PinchOptions& opt);

nlohmann::ordered_json pinch_report_to_json(const PinchReport& r);

}  // namespace hopflab
