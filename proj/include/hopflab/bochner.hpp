#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hopflab/svd_analysis.hpp"

namespace hopflab {

/// One two-sided identity evaluation. For vector identities lhs and rhs are
/// the two norms and abs_residual the norm of the difference.
/// rel_residual = abs_residual / max(1, |lhs|, |rhs|).
struct IdentityReport {
  std::string name;
  Vec4 point{};
  double lhs = 0, rhs = 0;
  double abs_residual = 0, rel_residual = 0;
  double h_used = 0;
  bool degenerate_skipped = false;
  /// Non-empty when the identity's precondition failed at this point; such
  /// reports carry no residual.
  std::string error;
};

struct VerifyOptions {
  FDConfig cfg;
  double tol = 1e-3;      // acceptance threshold on rel_residual
  double tau_tol = 1e-5;  // harmonicity gate where the identity needs it
};

/// Singular value decomposition as a smooth field near a center point: one
/// fixed degenerate reference and sign alignment against the center frame.
class FrameField {
 public:
  FrameField(const SphereMap& f, const Vec4& p, const FDConfig& cfg);

  const SingularData& center() const { return center_; }
  SingularData at(const Vec4& q) const;

  double lambda(const Vec4& q) const { return at(q).lambda; }
  double mu(const Vec4& q) const { return at(q).mu; }

 private:
  const SphereMap& f_;
  FDConfig cfg_;
  SingularData center_;
};

// Verifiers. Each computes both sides of the named identity independently
// (left by finite differences of singular values and frames, right from the
// Hessian components at the point) and reports residuals. Points where the
// identity's derivation breaks down are reported with degenerate_skipped
// instead of a fabricated number.

std::vector<IdentityReport> verify_lemma71(const SphereMap& f, const Vec4& p,
                                           const VerifyOptions& opt);
std::vector<IdentityReport> verify_lapu(const SphereMap& f, const Vec4& p,
                                        const VerifyOptions& opt);
std::vector<IdentityReport> verify_lapv(const SphereMap& f, const Vec4& p,
                                        const VerifyOptions& opt);
std::vector<IdentityReport> verify_lapw(const SphereMap& f, const Vec4& p,
                                        const VerifyOptions& opt);
std::vector<IdentityReport> verify_laprho(const SphereMap& f, const Vec4& p,
                                          const VerifyOptions& opt);
std::vector<IdentityReport> verify_lemma72(const SphereMap& f, const Vec4& p,
                                           const VerifyOptions& opt);
std::vector<IdentityReport> verify_koszul_horizontal(const SphereMap& f,
                                                     const Vec4& p,
                                                     const Vec4& X,
                                                     const Vec4& Y,
                                                     const VerifyOptions& opt);

using VectorFieldS3 = std::function<Vec4(const Vec4&)>;

/// Rough-Laplacian test Delta zeta + |nabla zeta|^2 zeta = 0 for a unit
/// field; with check_phi also tests that phi(X) = -nabla_X zeta squares to
/// -id on the orthogonal complement of zeta.
std::vector<IdentityReport> verify_hopf_field(const VectorFieldS3& zeta,
                                              const Vec4& p,
                                              const VerifyOptions& opt,
                                              bool check_phi = false);

enum class Lemma {
  kLemma71,
  kLapU,
  kLapV,
  kLapW,
  kLapRho,
  kLemma72,
  kHopfField,
  kKoszul,
  kAll,
};

Lemma lemma_from_string(const std::string& s);
std::string lemma_to_string(Lemma l);

struct LemmaSummary {
  std::string name;
  int n_points = 0;
  double max_rel_residual = 0;
  int n_skipped = 0;
  int n_errors = 0;
};

struct BatteryResult {
  std::vector<IdentityReport> reports;
  std::vector<LemmaSummary> summaries;
  bool pass = true;  // no residual above tol and no precondition errors
  int n_points = 0;
  int n_skipped = 0;
  int n_errors = 0;
};

/// Runs the selected verifiers at n seeded random points; reports aggregated
/// per identity name in deterministic order.
BatteryResult run_battery(const SphereMap& f, Lemma selector, int n,
                          std::uint64_t seed, const VerifyOptions& opt,
                          ExecMode mode = ExecMode::kParallel);

nlohmann::ordered_json report_to_json(const IdentityReport& r);
std::string summary_csv(const BatteryResult& result);

}  // namespace hopflab
