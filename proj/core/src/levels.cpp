#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/QR>

#include "ethlab/spectral.hpp"

namespace ethlab {

namespace {

constexpr double kDegenerateGap = 1e-10;     // relative to spectral range
constexpr double kDegenerateFraction = 0.2;
constexpr double kIntermediateMargin = 0.25;
constexpr Index kMinUnfoldLevels = 50;
constexpr Index kMinClassifySpacings = 100;

double degenerate_fraction(std::span<const double> e) {
  if (e.size() < 2) return 0.0;
  const double range = e.back() - e.front();
  if (range <= 0.0) return 1.0;
  Index small = 0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] - e[i - 1] < kDegenerateGap * range) ++small;
  }
  return static_cast<double>(small) / static_cast<double>(e.size() - 1);
}

}  // namespace

UnfoldResult unfold(std::span<const double> eigenvalues, const UnfoldOptions& options) {
  if (options.degree < 1) throw std::invalid_argument("unfold: polynomial degree must be >= 1");
  if (!(options.trim >= 0.0 && options.trim < 0.5)) {
    throw std::invalid_argument("unfold: trim fraction must lie in [0, 0.5)");
  }
  if (!std::is_sorted(eigenvalues.begin(), eigenvalues.end())) {
    throw std::invalid_argument("unfold: eigenvalues must be ascending");
  }
  const Index n = static_cast<Index>(eigenvalues.size());
  const Index cut = static_cast<Index>(std::floor(options.trim * static_cast<double>(n)));
  const Index first = cut;
  const Index count = n - 2 * cut;
  if (count < kMinUnfoldLevels) {
    throw UnfoldError("unfold: " + std::to_string(count) + " levels after trimming, need at least " +
                      std::to_string(kMinUnfoldLevels));
  }
  const double lo = eigenvalues[first];
  const double hi = eigenvalues[first + count - 1];
  if (!(hi > lo)) throw UnfoldError("unfold: trimmed spectrum has zero width");

  const int terms = options.degree + 1;
  Eigen::MatrixXd design(count, terms);
  Eigen::VectorXd staircase(count);
  for (Index i = 0; i < count; ++i) {
    const double x = (2.0 * eigenvalues[first + i] - lo - hi) / (hi - lo);
    design(i, 0) = 1.0;
    if (terms > 1) design(i, 1) = x;
    for (int k = 2; k < terms; ++k) design(i, k) = 2.0 * x * design(i, k - 1) - design(i, k - 2);
    staircase(i) = static_cast<double>(first + i + 1);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < terms) {
    throw UnfoldError("unfold: staircase fit is rank deficient (rank " + std::to_string(qr.rank()) +
                      " of " + std::to_string(terms) + "); reduce the polynomial degree");
  }
  const Eigen::VectorXd fitted = design * qr.solve(staircase);

  UnfoldResult out;
  out.levels_used = count;
  out.spacings.resize(count - 1);
  double sum = 0.0;
  for (Index i = 0; i + 1 < count; ++i) {
    double s = fitted(i + 1) - fitted(i);
    if (s < 0.0) {
      s = 0.0;
      ++out.clamped;
    }
    out.spacings[i] = s;
    sum += s;
  }
  out.raw_mean = sum / static_cast<double>(count - 1);
  if (out.raw_mean > 0.0) {
    for (auto& s : out.spacings) s /= out.raw_mean;
  }
  return out;
}

SpacingDistribution spacing_distribution(std::span<const double> eigenvalues,
                                         const UnfoldOptions& unfold_options,
                                         const HistogramOptions& histogram_options) {
  if (histogram_options.bins < 1 || !(histogram_options.s_max > 0.0)) {
    throw std::invalid_argument("spacing_distribution: need bins >= 1 and s_max > 0");
  }
  SpacingDistribution dist;
  dist.level_count = static_cast<Index>(eigenvalues.size());
  dist.degenerate_fraction = degenerate_fraction(eigenvalues);

  UnfoldResult unfolded;
  try {
    unfolded = unfold(eigenvalues, unfold_options);
  } catch (const UnfoldError&) {
    // A massively degenerate staircase has too few distinct abscissae for a
    // high-degree fit; a linear fit still exposes the mass at s = 0.
    if (dist.degenerate_fraction <= kDegenerateFraction || unfold_options.degree == 1) throw;
    unfolded = unfold(eigenvalues, UnfoldOptions{1, unfold_options.trim});
  }
  dist.spacings = std::move(unfolded.spacings);
  dist.clamped = unfolded.clamped;
  dist.trimmed_fraction =
      1.0 - static_cast<double>(unfolded.levels_used) / static_cast<double>(eigenvalues.size());
  double sum = 0.0;
  for (double s : dist.spacings) sum += s;
  dist.mean_spacing = dist.spacings.empty() ? 0.0 : sum / static_cast<double>(dist.spacings.size());

  const int bins = histogram_options.bins;
  const double width = histogram_options.s_max / bins;
  dist.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) dist.edges[b] = b * width;
  std::vector<double> counts(bins, 0.0);
  double in_range = 0.0;
  for (double s : dist.spacings) {
    if (s < 0.0 || s > histogram_options.s_max) continue;
    const int b = std::min(bins - 1, static_cast<int>(s / width));
    counts[b] += 1.0;
    in_range += 1.0;
  }
  dist.density.assign(bins, 0.0);
  if (in_range > 0.0) {
    for (int b = 0; b < bins; ++b) dist.density[b] = counts[b] / (in_range * width);
  }
  return dist;
}

double surmise(int beta, double s) {
  if (s < 0.0) throw std::invalid_argument("surmise: s must be >= 0");
  constexpr double pi = std::numbers::pi;
  double a = 0.0;
  double b = 0.0;
  switch (beta) {
    case 1: a = pi / 2.0; b = pi / 4.0; break;
    case 2: a = 32.0 / (pi * pi); b = 4.0 / pi; break;
    case 4: a = std::pow(2.0, 18) / (std::pow(3.0, 6) * pi * pi * pi); b = 64.0 / (9.0 * pi); break;
    default: throw std::invalid_argument("surmise: beta must be 1, 2 or 4, got " + std::to_string(beta));
  }
  return a * std::pow(s, beta) * std::exp(-b * s * s);
}

double poisson(double s) {
  if (s < 0.0) throw std::invalid_argument("poisson: s must be >= 0");
  return std::exp(-s);
}

const char* to_string(SpacingClass c) {
  switch (c) {
    case SpacingClass::WignerDyson: return "WignerDyson";
    case SpacingClass::Poisson: return "Poisson";
    case SpacingClass::Intermediate: return "Intermediate";
    case SpacingClass::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

SpacingClassification classify_spacing(const SpacingDistribution& dist) {
  SpacingClassification out;
  const int bins = static_cast<int>(dist.density.size());
  for (int b = 0; b < bins; ++b) {
    const double width = dist.edges[b + 1] - dist.edges[b];
    const double center = 0.5 * (dist.edges[b] + dist.edges[b + 1]);
    const double wd = surmise(1, center);
    const double po = poisson(center);
    const double h = dist.density[b];
    // symmetric denominator: a stray wide gap where a reference is ~0 costs at most its own mass
    if (h + wd > 0.0) out.chi2_wigner += width * (h - wd) * (h - wd) / (h + wd);
    if (h + po > 0.0) out.chi2_poisson += width * (h - po) * (h - po) / (h + po);
  }
  out.low_confidence = static_cast<Index>(dist.spacings.size()) < kMinClassifySpacings;

  if (dist.degenerate_fraction > kDegenerateFraction) {
    out.kind = SpacingClass::Degenerate;
    return out;
  }
  if (out.low_confidence) {
    out.kind = SpacingClass::Intermediate;
    return out;
  }
  const double larger = std::max(out.chi2_wigner, out.chi2_poisson);
  if (larger == 0.0 || std::abs(out.chi2_wigner - out.chi2_poisson) < kIntermediateMargin * larger) {
    out.kind = SpacingClass::Intermediate;
  } else {
    out.kind = out.chi2_wigner < out.chi2_poisson ? SpacingClass::WignerDyson : SpacingClass::Poisson;
  }
  return out;
}

}  // namespace ethlab
