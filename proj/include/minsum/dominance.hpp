#pragma once

// Scaled diagonal dominance: find (lambda, w) with
//
//   sum_{j != i} w_j |d2F/dx_i dx_j| <= lambda w_i d2F/dx_i^2   for every row i,
//
// plus M (smallest diagonal curvature) and K = (1/M) max(w) / min(w).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minsum/model.hpp"

namespace minsum {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

enum class CertificateMethod { ExactQuadratic, SampledBox };

struct DominanceCertificate {
  double lambda = 0.0;
  std::vector<double> w;
  double M = 0.0;
  double K = 0.0;
  CertificateMethod method = CertificateMethod::ExactQuadratic;
  /// Sampling box for SampledBox certificates; the row condition is only
  /// claimed inside it.
  std::optional<std::vector<Interval>> box;
};

/// Either a certificate or the reason none could be issued.
struct Certification {
  std::optional<DominanceCertificate> certificate;
  std::string diagnostic;

  explicit operator bool() const noexcept { return certificate.has_value(); }
};

/// K = (1/M) * max(w) / min(w).
double dominance_constant(double M, std::span<const double> w);

/// Exact certification for programs whose Hessian is constant. Without `w`,
/// the weights are the Perron vector of D^-1 |A_offdiag| found by power
/// iteration and lambda is the certified row ratio plus 1e-9. With `w`,
/// lambda is the exact worst row ratio for those weights.
Certification certify_quadratic(const Program& program, std::optional<std::vector<double>> w = std::nullopt);

/// Same certification for an explicit constant Hessian.
Certification certify_hessian(const Eigen::MatrixXd& hessian, std::optional<std::vector<double>> w = std::nullopt);

/// Certification over a box by evaluating the row condition at `samples`
/// Sobol points. lambda gets a 5% margin (kept below 1); w defaults to ones.
Certification certify_sampled(const Program& program,
                              std::span<const Interval> box,
                              std::size_t samples,
                              std::optional<std::vector<double>> w = std::nullopt);

/// Worst row ratio sum_j w_j |H_ij| / (w_i H_ii) of the Hessian at x, and the
/// smallest diagonal. Rows with zero diagonal and zero off-diagonal count as 0;
/// a nonpositive diagonal yields +infinity.
struct RowScan {
  double worst_ratio = 0.0;
  double min_diagonal = 0.0;
};
RowScan scan_rows(const Program& program, std::span<const double> x, std::span<const double> w);

struct RecheckReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;
};

/// Re-validates a certificate at `points` pseudo-random points drawn from
/// `box` (independent of the Sobol points used to issue it).
RecheckReport recheck_certificate(const Program& program,
                                  const DominanceCertificate& certificate,
                                  std::span<const Interval> box,
                                  std::size_t points,
                                  std::uint64_t seed = 0x5eed);

struct HyperConditions {
  /// Every vertex pair lies in at most one common factor.
  bool condition_i = false;
  /// Each hyper factor is individually (lambda, w)-scaled diagonally dominant.
  bool condition_ii = false;
  /// Set when condition_ii holds.
  std::optional<DominanceCertificate> certificate;
  std::vector<std::string> diagnostics;
};

/// Structural and per-factor checks for hyperedge programs. Edge factors count
/// as two-variable factors for condition (i).
HyperConditions check_hyper_conditions(const Program& program,
                                          std::optional<std::vector<double>> w = std::nullopt);

/// Uniform box [-b, b]^n.
std::vector<Interval> symmetric_box(std::size_t n, double b);

const char* to_string(CertificateMethod method);

}  // namespace minsum
