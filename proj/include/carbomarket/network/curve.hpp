#pragma once

#include <span>
#include <utility>
#include <vector>

namespace carbomarket {

struct Segment {
  double slope = 0.0;
  double intercept = 0.0;

  double At(double p) const { return slope * p + intercept; }
  bool operator==(const Segment&) const = default;
};

struct CurvePoint {
  double p = 0.0;
  double value = 0.0;
};

// Convex piecewise-linear function on [lo, hi], stored as the active pieces of
// its upper envelope (slopes strictly increasing, every piece active somewhere
// on the domain).
class PiecewiseLinearCurve {
 public:
  PiecewiseLinearCurve() : PiecewiseLinearCurve(Linear(0.0, 0.0, 0.0, 0.0)) {}

  // Keeps the pieces of max_n(segments) that are active on [lo, hi].
  static PiecewiseLinearCurve FromSegments(std::vector<Segment> segments,
                                           double lo, double hi);
  static PiecewiseLinearCurve Linear(double slope, double intercept, double lo,
                                     double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<Segment>& segments() const { return segments_; }

  double Value(double p) const;
  // Left and right derivatives; at the domain ends the outward side is
  // reported as the end piece's slope.
  std::pair<double, double> Subgradient(double p) const;
  // Interior kinks in increasing order.
  std::vector<double> Breakpoints() const;
  // Kinks plus both domain ends.
  std::vector<CurvePoint> Vertices() const;
  double MinValue() const;

  PiecewiseLinearCurve Plus(const PiecewiseLinearCurve& other,
                            double weight = 1.0) const;
  PiecewiseLinearCurve Scaled(double factor) const;
  PiecewiseLinearCurve WithDomain(double lo, double hi) const;

  bool operator==(const PiecewiseLinearCurve&) const = default;

 private:
  PiecewiseLinearCurve(std::vector<Segment> segments, double lo, double hi)
      : segments_(std::move(segments)), lo_(lo), hi_(hi) {}

  std::vector<Segment> segments_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// Interpolates the points. Throws Error(kData, "E_NONCONVEX_POINTS") when a
// slope decreases by more than 1e-9, and "E_CURVE_POINTS" for fewer than two
// points or non-increasing abscissae.
PiecewiseLinearCurve CurveFromPoints(std::span<const CurvePoint> points);

// True when the slopes of consecutive point pairs never decrease by more than
// `tol`.
bool PointsAreConvex(std::span<const CurvePoint> points, double tol = 1e-9);

}  // namespace carbomarket
