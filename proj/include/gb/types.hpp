#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace gb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Flat configuration space: a product of circles (period 2*pi) and lines.
struct ConfigSpace {
    int dim = 1;
    std::vector<bool> periodic;  // per coordinate; empty means all periodic

    static ConfigSpace torus(int d) { return {d, std::vector<bool>(d, true)}; }
    static ConfigSpace line(int d) { return {d, std::vector<bool>(d, false)}; }

    bool is_periodic(int axis) const {
        return periodic.empty() ? true : periodic.at(axis);
    }

    /// Reduce coordinates on periodic axes to [0, 2*pi).
    Vec wrap(Vec x) const {
        for (int i = 0; i < dim; ++i) {
            if (!is_periodic(i)) continue;
            x[i] = std::fmod(x[i], kTwoPi);
            if (x[i] < 0.0) x[i] += kTwoPi;
        }
        return x;
    }

    /// Distance that accounts for wrap-around on periodic axes.
    double distance(const Vec& a, const Vec& b) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            double d = a[i] - b[i];
            if (is_periodic(i)) {
                d = std::remainder(d, kTwoPi);
            }
            s += d * d;
        }
        return std::sqrt(s);
    }
};

/// Point in phase space. `clock` carries the time coordinate for
/// time-dependent systems; it is redundant for autonomous ones.
struct PhasePoint {
    Vec x;
    Vec p;
    double clock = 0.0;

    int dim() const { return static_cast<int>(x.size()); }
};

enum class TimeKind { Autonomous, Periodic, General };

struct TimeDependence {
    TimeKind kind = TimeKind::Autonomous;
    double period = 0.0;  // meaningful for Periodic only

    static TimeDependence autonomous() { return {TimeKind::Autonomous, 0.0}; }
    static TimeDependence periodic(double T) { return {TimeKind::Periodic, T}; }
    bool is_autonomous() const { return kind == TimeKind::Autonomous; }
};

/// Largest principal angle (radians) between the column spans of A and B.
double subspace_angle(const Mat& a, const Mat& b);

/// Orthonormal basis of the null space of `rows` (each row a constraint).
Mat null_space_basis(const Mat& rows, double tol = 1e-12);

}  // namespace gb
