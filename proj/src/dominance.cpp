#include "minsum/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <boost/random/sobol.hpp>

#include "minsum/errors.hpp"

namespace minsum {

namespace {

constexpr double kLambdaFloor = 1e-6;
constexpr double kExactMargin = 1e-9;
constexpr double kSampledMargin = 1.05;
constexpr int kPowerIterations = 10'000;
constexpr double kPowerTolerance = 1e-12;

// Sobol sequence in the box. Falls back to a seeded Mersenne twister above the
// dimension limit of the direction-number table.
class BoxSampler {
 public:
  explicit BoxSampler(std::span<const Interval> box) : box_(box.begin(), box.end()) {
    if (box_.size() <= kMaxSobolDimension) sobol_.emplace(static_cast<unsigned>(box_.size()));
  }

  std::vector<double> next() {
    std::vector<double> x(box_.size());
    for (std::size_t k = 0; k < box_.size(); ++k) {
      double u;
      if (sobol_) {
        const double span = static_cast<double>(sobol_->max() - sobol_->min()) + 1.0;
        u = static_cast<double>((*sobol_)() - sobol_->min()) / span;
      } else {
        u = uniform_(fallback_);
      }
      x[k] = box_[k].lo + u * (box_[k].hi - box_[k].lo);
    }
    return x;
  }

 private:
  static constexpr std::size_t kMaxSobolDimension = 3667;
  std::vector<Interval> box_;
  std::optional<boost::random::sobol> sobol_;
  std::mt19937_64 fallback_{0x50b01u};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

void validate_box(const Program& program, std::span<const Interval> box) {
  if (box.size() != program.size()) throw DimensionError("sampling box must have one interval per variable");
  for (const auto& iv : box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw ValidationError("sampling box intervals must be finite with lo <= hi");
    }
  }
}

std::vector<double> validated_weights(const Program& program, std::optional<std::vector<double>> w) {
  if (!w) return std::vector<double>(program.size(), 1.0);
  if (w->size() != program.size()) throw DimensionError("weight vector must have one entry per variable");
  for (double v : *w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("weights must be finite and positive");
  }
  return *std::move(w);
}

// Power iteration on I + D^-1 |A_off| (the shift removes the +-rho ambiguity of
// bipartite graphs) with a tiny uniform coupling so disconnected components
// still receive strictly positive weight.
std::vector<double> perron_weights(const std::vector<std::vector<HessianEntry>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> w(n, 1.0), next(n);
  double previous = std::numeric_limits<double>::infinity();
  constexpr double kCoupling = 1e-10;
  for (int it = 0; it < kPowerIterations; ++it) {
    double sum = 0.0;
    for (double v : w) sum += v;
    double top = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0, off = 0.0;
      for (const auto& e : rows[i]) {
        if (e.col == i) {
          diag = e.value;
        } else {
          off += std::abs(e.value) * w[e.col];
        }
      }
      next[i] = w[i] + off / diag + kCoupling * sum / static_cast<double>(n);
      top = std::max(top, next[i]);
    }
    for (std::size_t i = 0; i < n; ++i) next[i] /= top;
    const double estimate = top - 1.0;
    w.swap(next);
    if (std::abs(estimate - previous) < kPowerTolerance) break;
    previous = estimate;
  }
  return w;
}

double worst_ratio(const std::vector<std::vector<HessianEntry>>& rows, std::span<const double> w) {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double diag = 0.0, off = 0.0;
    for (const auto& e : rows[i]) {
      if (e.col == i) {
        diag = e.value;
      } else {
        off += w[e.col] * std::abs(e.value);
      }
    }
    if (off == 0.0) continue;
    worst = std::max(worst, off / (w[i] * diag));
  }
  return worst;
}

DominanceCertificate make_certificate(double lambda, std::vector<double> w, double M, CertificateMethod method) {
  DominanceCertificate c;
  c.lambda = lambda;
  c.K = dominance_constant(M, w);
  c.w = std::move(w);
  c.M = M;
  c.method = method;
  return c;
}

}  // namespace

double dominance_constant(double M, std::span<const double> w) {
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return (1.0 / M) * (*hi / *lo);
}

std::vector<Interval> symmetric_box(std::size_t n, double b) { return std::vector<Interval>(n, Interval{-b, b}); }

const char* to_string(CertificateMethod method) {
  return method == CertificateMethod::ExactQuadratic ? "exact-quadratic" : "sampled-box";
}

RowScan scan_rows(const Program& program, std::span<const double> x, std::span<const double> w) {
  RowScan scan;
  scan.min_diagonal = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < program.size(); ++i) {
    double diag = 0.0, off = 0.0;
    for (const auto& e : hessian_row(program, x, i)) {
      if (e.col == i) {
        diag = e.value;
      } else {
        off += w[e.col] * std::abs(e.value);
      }
    }
    scan.min_diagonal = std::min(scan.min_diagonal, diag);
    if (diag <= 0.0) {
      scan.worst_ratio = std::numeric_limits<double>::infinity();
    } else if (off > 0.0) {
      scan.worst_ratio = std::max(scan.worst_ratio, off / (w[i] * diag));
    }
  }
  return scan;
}

namespace {

// Exact certification from constant Hessian rows (diagonal entry included).
Certification certify_rows(const std::vector<std::vector<HessianEntry>>& rows, std::optional<std::vector<double>> w) {
  Certification out;
  const std::size_t n = rows.size();
  double M = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const auto it = std::find_if(rows[i].begin(), rows[i].end(), [i](const HessianEntry& e) { return e.col == i; });
    const double diag = it == rows[i].end() ? 0.0 : it->value;
    if (!(diag > 0.0)) {
      std::ostringstream os;
      os << "Hessian diagonal entry " << i << " is " << diag << " (must be > 0)";
      out.diagnostic = os.str();
      return out;
    }
    M = std::min(M, diag);
  }

  const bool supplied = w.has_value();
  std::vector<double> weights;
  if (supplied) {
    if (w->size() != n) throw DimensionError("weight vector must have one entry per variable");
    for (double v : *w) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("weights must be finite and positive");
    }
    weights = *std::move(w);
  } else {
    weights = perron_weights(rows);
  }
  const double ratio = worst_ratio(rows, weights);
  double lambda = supplied ? ratio : ratio + kExactMargin;
  lambda = std::max(lambda, kLambdaFloor);
  if (lambda >= 1.0 - kExactMargin) {
    std::ostringstream os;
    os.precision(17);
    os << "not scaled diagonally dominant: required lambda " << ratio << " is not below 1";
    out.diagnostic = os.str();
    return out;
  }
  out.certificate = make_certificate(lambda, std::move(weights), M, CertificateMethod::ExactQuadratic);
  return out;
}

}  // namespace

Certification certify_quadratic(const Program& program, std::optional<std::vector<double>> w) {
  if (!program.is_quadratic()) {
    Certification out;
    out.diagnostic = "exact certification needs a constant Hessian; use sampled certification for this program";
    return out;
  }
  const std::vector<double> origin(program.size(), 0.0);
  std::vector<std::vector<HessianEntry>> rows;
  rows.reserve(program.size());
  for (Index i = 0; i < program.size(); ++i) rows.push_back(hessian_row(program, origin, i));
  return certify_rows(rows, std::move(w));
}

Certification certify_hessian(const Eigen::MatrixXd& hessian, std::optional<std::vector<double>> w) {
  if (hessian.rows() != hessian.cols()) throw DimensionError("certify_hessian: matrix must be square");
  std::vector<std::vector<HessianEntry>> rows(static_cast<std::size_t>(hessian.rows()));
  for (Eigen::Index i = 0; i < hessian.rows(); ++i) {
    for (Eigen::Index j = 0; j < hessian.cols(); ++j) {
      if (i == j || hessian(i, j) != 0.0) rows[static_cast<std::size_t>(i)].push_back({static_cast<Index>(j), hessian(i, j)});
    }
  }
  return certify_rows(rows, std::move(w));
}

Certification certify_sampled(const Program& program,
                              std::span<const Interval> box,
                              std::size_t samples,
                              std::optional<std::vector<double>> w) {
  if (samples < 1) throw ValidationError("certify_sampled needs at least one sample");
  validate_box(program, box);
  std::vector<double> weights = validated_weights(program, std::move(w));

  Certification out;
  BoxSampler sampler(box);
  double required = 0.0;
  double M = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = sampler.next();
    const RowScan scan = scan_rows(program, x, weights);
    if (!(scan.min_diagonal > 0.0)) {
      std::ostringstream os;
      os << "sampled Hessian diagonal " << scan.min_diagonal << " is not positive";
      out.diagnostic = os.str();
      return out;
    }
    required = std::max(required, scan.worst_ratio);
    M = std::min(M, scan.min_diagonal);
  }
  if (required >= 1.0) {
    std::ostringstream os;
    os.precision(17);
    os << "not scaled diagonally dominant on the box: required lambda " << required << " is not below 1";
    out.diagnostic = os.str();
    return out;
  }
  double lambda = std::min(required * kSampledMargin, required + 0.5 * (1.0 - required));
  lambda = std::max(lambda, kLambdaFloor);
  out.certificate = make_certificate(lambda, std::move(weights), M, CertificateMethod::SampledBox);
  out.certificate->box = std::vector<Interval>(box.begin(), box.end());
  return out;
}

RecheckReport recheck_certificate(const Program& program,
                                  const DominanceCertificate& certificate,
                                  std::span<const Interval> box,
                                  std::size_t points,
                                  std::uint64_t seed) {
  validate_box(program, box);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RecheckReport report;
  std::vector<double> x(program.size());
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = box[k].lo + unit(rng) * (box[k].hi - box[k].lo);
    const RowScan scan = scan_rows(program, x, certificate.w);
    report.worst_ratio = std::max(report.worst_ratio, scan.worst_ratio);
    if (scan.worst_ratio > certificate.lambda * (1.0 + 1e-12)) ++report.violations;
    ++report.points;
  }
  return report;
}

HyperConditions check_hyper_conditions(const Program& program, std::optional<std::vector<double>> w) {
  HyperConditions out;
  std::vector<double> weights = validated_weights(program, std::move(w));

  // (i): count factors per unordered vertex pair.
  std::map<std::pair<Index, Index>, int> shared;
  auto note_scope = [&shared](const std::vector<Index>& scope) {
    for (std::size_t a = 0; a < scope.size(); ++a) {
      for (std::size_t b = a + 1; b < scope.size(); ++b) ++shared[std::minmax(scope[a], scope[b])];
    }
  };
  for (const auto& e : program.edges()) note_scope({e.i(), e.j()});
  for (const auto& h : program.hypers()) note_scope(h.scope());
  out.condition_i = true;
  for (const auto& [pair, count] : shared) {
    if (count > 1) {
      out.condition_i = false;
      std::ostringstream os;
      os << "condition (i) fails: pair (" << pair.first << "," << pair.second << ") lies in " << count
         << " factors";
      out.diagnostics.push_back(os.str());
    }
  }

  // (ii): each hyper factor's own Hessian rows, shared (lambda, w).
  double required = 0.0;
  bool ok = true;
  for (Index c = 0; c < program.hypers().size(); ++c) {
    const auto& f = program.hypers()[c];
    const Eigen::MatrixXd h = f.hessian();
    const auto k = static_cast<Eigen::Index>(f.scope().size());
    for (Eigen::Index r = 0; r < k; ++r) {
      double off = 0.0;
      for (Eigen::Index col = 0; col < k; ++col) {
        if (col != r) off += weights[f.scope()[static_cast<Index>(col)]] * std::abs(h(r, col));
      }
      if (off == 0.0) continue;
      const double diag = weights[f.scope()[static_cast<Index>(r)]] * h(r, r);
      const double ratio = diag > 0.0 ? off / diag : std::numeric_limits<double>::infinity();
      required = std::max(required, ratio);
      if (ratio >= 1.0) {
        ok = false;
        std::ostringstream os;
        os << "condition (ii) fails: hyper_factors[" << c << "] row " << f.scope()[static_cast<Index>(r)]
           << " has ratio " << ratio;
        out.diagnostics.push_back(os.str());
      }
    }
  }
  out.condition_ii = ok;
  if (ok) {
    const std::vector<double> origin(program.size(), 0.0);
    const RowScan scan = scan_rows(program, origin, weights);
    if (scan.min_diagonal > 0.0) {
      out.certificate = make_certificate(std::max(required, kLambdaFloor), std::move(weights), scan.min_diagonal,
                                         CertificateMethod::ExactQuadratic);
    }
  }
  return out;
}

}  // namespace minsum
