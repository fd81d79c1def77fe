#include "carbomarket/network/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "carbomarket/common/error.hpp"

namespace carbomarket {
namespace {

// Abscissa where b (steeper) overtakes a.
double Crossing(const Segment& a, const Segment& b) {
  return (a.intercept - b.intercept) / (b.slope - a.slope);
}

}  // namespace

PiecewiseLinearCurve PiecewiseLinearCurve::FromSegments(
    std::vector<Segment> segments, double lo, double hi) {
  if (segments.empty()) {
    ThrowData("E_CURVE_EMPTY", "curve needs at least one segment");
  }
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    ThrowData("E_CURVE_DOMAIN", "curve domain [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "] is invalid");
  }
  for (const Segment& s : segments) {
    if (!std::isfinite(s.slope) || !std::isfinite(s.intercept)) {
      ThrowData("E_CURVE_NONFINITE", "curve segment is not finite");
    }
  }
  if (lo == hi) {
    const auto best = std::max_element(
        segments.begin(), segments.end(),
        [lo](const Segment& a, const Segment& b) { return a.At(lo) < b.At(lo); });
    return PiecewiseLinearCurve({*best}, lo, hi);
  }

  std::sort(segments.begin(), segments.end(),
            [](const Segment& a, const Segment& b) {
              return a.slope < b.slope ||
                     (a.slope == b.slope && a.intercept > b.intercept);
            });
  std::vector<Segment> hull;
  for (const Segment& s : segments) {
    if (!hull.empty() && hull.back().slope == s.slope) continue;  // dominated
    while (hull.size() >= 2 &&
           Crossing(hull[hull.size() - 2], s) <=
               Crossing(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(s);
  }
  // Clip to the domain: drop pieces whose active region misses (lo, hi).
  std::size_t first = 0;
  while (first + 1 < hull.size() && Crossing(hull[first], hull[first + 1]) <= lo) {
    ++first;
  }
  std::size_t last = hull.size() - 1;
  while (last > first && Crossing(hull[last - 1], hull[last]) >= hi) --last;
  return PiecewiseLinearCurve(
      std::vector<Segment>(hull.begin() + first, hull.begin() + last + 1), lo, hi);
}

PiecewiseLinearCurve PiecewiseLinearCurve::Linear(double slope, double intercept,
                                                  double lo, double hi) {
  return FromSegments({Segment{slope, intercept}}, lo, hi);
}

double PiecewiseLinearCurve::Value(double p) const {
  double v = -std::numeric_limits<double>::infinity();
  for (const Segment& s : segments_) v = std::max(v, s.At(p));
  return v;
}

std::pair<double, double> PiecewiseLinearCurve::Subgradient(double p) const {
  const double v = Value(p);
  const double tol = 1e-12 * (1.0 + std::abs(v));
  double left = std::numeric_limits<double>::infinity();
  double right = -std::numeric_limits<double>::infinity();
  for (const Segment& s : segments_) {
    if (v - s.At(p) <= tol) {
      left = std::min(left, s.slope);
      right = std::max(right, s.slope);
    }
  }
  return {left, right};
}

std::vector<double> PiecewiseLinearCurve::Breakpoints() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) {
    out.push_back(Crossing(segments_[k - 1], segments_[k]));
  }
  return out;
}

std::vector<CurvePoint> PiecewiseLinearCurve::Vertices() const {
  std::vector<CurvePoint> out{{lo_, Value(lo_)}};
  if (hi_ == lo_) return out;
  for (double x : Breakpoints()) out.push_back({x, Value(x)});
  out.push_back({hi_, Value(hi_)});
  return out;
}

double PiecewiseLinearCurve::MinValue() const {
  double v = std::numeric_limits<double>::infinity();
  for (const CurvePoint& pt : Vertices()) v = std::min(v, pt.value);
  return v;
}

PiecewiseLinearCurve PiecewiseLinearCurve::Plus(const PiecewiseLinearCurve& other,
                                                double weight) const {
  if (weight < 0.0) {
    ThrowData("E_CURVE_WEIGHT", "negative weight would break convexity");
  }
  const double lo = std::max(lo_, other.lo_);
  const double hi = std::min(hi_, other.hi_);
  if (lo > hi) {
    ThrowData("E_CURVE_DOMAIN", "curve domains do not overlap");
  }
  // max_i a_i + w max_j b_j = max_{i,j} (a_i + w b_j)
  std::vector<Segment> sum;
  sum.reserve(segments_.size() * other.segments_.size());
  for (const Segment& a : segments_) {
    for (const Segment& b : other.segments_) {
      sum.push_back({a.slope + weight * b.slope, a.intercept + weight * b.intercept});
    }
  }
  return FromSegments(std::move(sum), lo, hi);
}

PiecewiseLinearCurve PiecewiseLinearCurve::Scaled(double factor) const {
  if (factor < 0.0) {
    ThrowData("E_CURVE_WEIGHT", "negative scale would break convexity");
  }
  std::vector<Segment> segs = segments_;
  for (Segment& s : segs) {
    s.slope *= factor;
    s.intercept *= factor;
  }
  return FromSegments(std::move(segs), lo_, hi_);
}

PiecewiseLinearCurve PiecewiseLinearCurve::WithDomain(double lo, double hi) const {
  return FromSegments(segments_, lo, hi);
}

bool PointsAreConvex(std::span<const CurvePoint> points, double tol) {
  for (std::size_t k = 2; k < points.size(); ++k) {
    const double s0 = (points[k - 1].value - points[k - 2].value) /
                      (points[k - 1].p - points[k - 2].p);
    const double s1 =
        (points[k].value - points[k - 1].value) / (points[k].p - points[k - 1].p);
    if (s1 < s0 - tol) return false;
  }
  return true;
}

PiecewiseLinearCurve CurveFromPoints(std::span<const CurvePoint> points) {
  if (points.size() < 2) {
    ThrowData("E_CURVE_POINTS", "a curve needs at least two points");
  }
  std::vector<Segment> segs;
  double prev_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < points.size(); ++k) {
    const CurvePoint& a = points[k - 1];
    const CurvePoint& b = points[k];
    if (!(b.p > a.p)) {
      ThrowData("E_CURVE_POINTS", "curve abscissae must be strictly increasing");
    }
    const double slope = (b.value - a.value) / (b.p - a.p);
    if (slope < prev_slope - 1e-9) {
      ThrowData("E_NONCONVEX_POINTS",
                "slope decreases from " + std::to_string(prev_slope) + " to " +
                    std::to_string(slope) + " at p=" + std::to_string(a.p));
    }
    prev_slope = std::max(prev_slope, slope);
    segs.push_back({slope, a.value - slope * a.p});
  }
  return PiecewiseLinearCurve::FromSegments(std::move(segs), points.front().p,
                                            points.back().p);
}

}  // namespace carbomarket
