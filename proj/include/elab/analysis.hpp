#pragma once

#include "elab/field.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace elab {

/// Scattered samples of a function (field nodes, a boundary trace, or a subset).
struct SampledFunction {
    std::vector<Vec2> points;
    std::vector<double> values;
    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

SampledFunction sample(const DiscreteField& u);
SampledFunction sample(const DiscreteField& u, std::span<const std::size_t> nodes);
SampledFunction sample_trace(const Grid& grid, const BoundaryTrace& g);

struct HolderNormOptions {
    /// All pairs are examined when there are at most this many.
    std::size_t pair_budget = 100000;
    std::uint64_t seed = 1;
};

struct HolderNorm {
    /// sup|u| + diam^β · seminorm.
    double value = 0.0;
    double sup = 0.0;
    double seminorm = 0.0;
    double diameter = 0.0;
    std::size_t pairs = 0;
    /// False when pairs were subsampled; the value is then a lower bound.
    bool exact = true;
};

/// Budgeted pairs are a prefix of a fixed pair sequence, so a larger budget never lowers the result.
HolderNorm holder_norm(const SampledFunction& f, double beta, const HolderNormOptions& options = {});

struct HolderFitOptions {
    /// Fit range; zero means the default 4h and diam/4.
    double r_min = 0.0;
    double r_max = 0.0;
    int scales = 10;
    /// Relative half-width of the distance band at each scale.
    double band = 0.15;
    int directions = 16;
};

struct HolderFit {
    double beta_hat = std::numeric_limits<double>::quiet_NaN();
    double seminorm_hat = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    double r_min = 0.0;
    double r_max = 0.0;
    /// u is (numerically) constant at the fitted scales.
    bool degenerate = false;
    /// Nominal scales, the modulus at each, and the distance of the pair realising it.
    std::vector<double> radii;
    std::vector<double> modulus;
    std::vector<double> distances;
};

/// Least squares of log ω(r) against log r, ω(r) = max |u(x) - u(y)| over |x - y| ≈ r.
/// `spacing` is the sample spacing; the range must lie in (2·spacing, diam/2).
/// Median nearest-neighbour distance (over at most 256 sampled points).
double median_spacing(std::span<const Vec2> points);

HolderFit holder_fit(const SampledFunction& f, double spacing, const HolderFitOptions& options = {});
HolderFit holder_fit(const DiscreteField& u, const HolderFitOptions& options = {});

double oscillation(std::span<const double> values);
double oscillation(const DiscreteField& u);
double oscillation(const DiscreteField& u, std::span<const std::size_t> nodes);

struct HarnackBall {
    std::size_t center = 0;
    double radius = 0.0;
};

struct HarnackResult {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    /// Some ball minimum was below 1e-14 and was clamped.
    bool clamped = false;
};

/// (cell average over B(x,r)) / (min over B(x,r)); requires u >= 0 on the ball and 2r <= δ(x).
HarnackResult weak_harnack_ratio(const DiscreteField& u, const std::vector<HarnackBall>& balls);

/// Diameter of a finite point set (through its convex hull).
double point_set_diameter(std::span<const Vec2> points);

}  // namespace elab
