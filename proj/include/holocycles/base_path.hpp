#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "holocycles/core.hpp"

namespace holocycles {

/// Which coordinate a base path lives in; the other one is continued along the leaf.
enum class BaseCoordinate { First, Second };

/// Straight segment from `from` to `to`.
struct LineSegment {
  Complex from, to;
};

/// center + radius * exp(i theta), theta running from theta0 to theta1.
struct ArcSegment {
  Complex center;
  double radius = 1.0;
  double theta0 = 0.0;
  double theta1 = kTwoPi;
};

/// origin * exp(tau * kappa), tau in [0, 1].
struct ExpSegment {
  Complex origin;
  Complex kappa;
};

using SegmentShape = std::variant<LineSegment, ArcSegment, ExpSegment>;

struct PathSegment {
  SegmentShape shape;
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Piecewise-smooth curve in one coordinate, parametrized by t in [0, 1].
class BasePath {
 public:
  BasePath() = default;

  explicit BasePath(std::vector<PathSegment> segments) : segments_(std::move(segments)) { check(); }

  /// k turns of the circle center + radius * e^{2 pi i t}, starting at center + radius.
  static BasePath circle(int turns, double radius = 1.0, Complex center = 0.0) {
    if (turns == 0) return constant(center + radius);
    return BasePath({{ArcSegment{center, radius, 0.0, kTwoPi * turns}, 0.0, 1.0}});
  }

  /// Circle through `start` around `center`, k turns (negative k = clockwise).
  static BasePath loop_around(Complex center, Complex start, int turns) {
    const double r = std::abs(start - center);
    const double a = std::arg(start - center);
    return BasePath({{ArcSegment{center, r, a, a + kTwoPi * turns}, 0.0, 1.0}});
  }

  static BasePath constant(Complex point) { return BasePath({{LineSegment{point, point}, 0.0, 1.0}}); }

  /// Piecewise-linear interpolation of (t, point) control points; t must increase from 0 to 1.
  static BasePath polyline(const std::vector<std::pair<double, Complex>>& controls) {
    if (controls.size() < 2) fail(ErrorCode::InvalidArgument, "polyline needs at least two control points");
    std::vector<PathSegment> segs;
    for (std::size_t k = 1; k < controls.size(); ++k)
      segs.push_back({LineSegment{controls[k - 1].second, controls[k].second}, controls[k - 1].first, controls[k].first});
    return BasePath(std::move(segs));
  }

  static BasePath exponential(Complex origin, Complex kappa) {
    return BasePath({{ExpSegment{origin, kappa}, 0.0, 1.0}});
  }

  const std::vector<PathSegment>& segments() const { return segments_; }

  Complex point(double t) const {
    const auto& s = locate(t);
    return position(s, local(s, t));
  }

  /// d(point)/dt.
  Complex velocity(double t) const {
    const auto& s = locate(t);
    return tangent(s, local(s, t)) / (s.t1 - s.t0);
  }

  Complex start() const { return point(0.0); }
  Complex end() const { return point(1.0); }

  /// Same curve traversed backwards.
  BasePath reversed() const {
    std::vector<PathSegment> out;
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
      PathSegment s = *it;
      std::visit(
          [](auto& sh) {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, LineSegment>) {
              std::swap(sh.from, sh.to);
            } else if constexpr (std::is_same_v<T, ArcSegment>) {
              std::swap(sh.theta0, sh.theta1);
            } else {
              sh.origin = sh.origin * std::exp(sh.kappa);
              sh.kappa = -sh.kappa;
            }
          },
          s.shape);
      s.t0 = 1.0 - it->t1;
      s.t1 = 1.0 - it->t0;
      out.push_back(s);
    }
    out.front().t0 = 0.0;
    out.back().t1 = 1.0;
    return BasePath(std::move(out));
  }

  /// `first` on [0, 1/2] followed by `second` on [1/2, 1].
  static BasePath concatenate(const BasePath& first, const BasePath& second) {
    std::vector<PathSegment> out;
    for (auto s : first.segments_) {
      s.t0 *= 0.5;
      s.t1 *= 0.5;
      out.push_back(s);
    }
    for (auto s : second.segments_) {
      s.t0 = 0.5 + 0.5 * s.t0;
      s.t1 = 0.5 + 0.5 * s.t1;
      out.push_back(s);
    }
    return BasePath(std::move(out));
  }

  /// Position and velocity evaluated on a given segment (useful exactly at breakpoints).
  static Complex point_on(const PathSegment& s, double t) { return position(s, local(s, t)); }
  static Complex velocity_on(const PathSegment& s, double t) { return tangent(s, local(s, t)) / (s.t1 - s.t0); }

  /// Segment boundaries, including 0 and 1.
  std::vector<double> breakpoints() const {
    std::vector<double> b{0.0};
    for (const auto& s : segments_) b.push_back(s.t1);
    return b;
  }

 private:
  void check() const {
    if (segments_.empty()) fail(ErrorCode::InvalidArgument, "base path has no segments");
    if (segments_.front().t0 != 0.0 || segments_.back().t1 != 1.0)
      fail(ErrorCode::InvalidArgument, "base path parameter must span [0, 1]");
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      if (!(segments_[k].t1 > segments_[k].t0)) fail(ErrorCode::InvalidArgument, "base path parameters must increase");
      if (k > 0 && segments_[k].t0 != segments_[k - 1].t1)
        fail(ErrorCode::InvalidArgument, "base path segments must be contiguous in t");
    }
  }

  const PathSegment& locate(double t) const {
    for (const auto& s : segments_)
      if (t <= s.t1) return s;
    return segments_.back();
  }

  static double local(const PathSegment& s, double t) { return std::clamp((t - s.t0) / (s.t1 - s.t0), 0.0, 1.0); }

  static Complex position(const PathSegment& s, double tau) {
    return std::visit(
        [tau](const auto& sh) -> Complex {
          using T = std::decay_t<decltype(sh)>;
          if constexpr (std::is_same_v<T, LineSegment>) {
            return sh.from + tau * (sh.to - sh.from);
          } else if constexpr (std::is_same_v<T, ArcSegment>) {
            return sh.center + sh.radius * std::exp(kI * (sh.theta0 + tau * (sh.theta1 - sh.theta0)));
          } else {
            return sh.origin * std::exp(tau * sh.kappa);
          }
        },
        s.shape);
  }

  /// d(position)/d(tau).
  static Complex tangent(const PathSegment& s, double tau) {
    return std::visit(
        [tau](const auto& sh) -> Complex {
          using T = std::decay_t<decltype(sh)>;
          if constexpr (std::is_same_v<T, LineSegment>) {
            return sh.to - sh.from;
          } else if constexpr (std::is_same_v<T, ArcSegment>) {
            const double dtheta = sh.theta1 - sh.theta0;
            return kI * dtheta * sh.radius * std::exp(kI * (sh.theta0 + tau * dtheta));
          } else {
            return sh.kappa * sh.origin * std::exp(tau * sh.kappa);
          }
        },
        s.shape);
  }

  std::vector<PathSegment> segments_;
};

}  // namespace holocycles
