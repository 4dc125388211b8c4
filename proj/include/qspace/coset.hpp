#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <variant>
#include <vector>

#include "qspace/algebra.hpp"

namespace qspace::coset {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

inline constexpr double kOrthogonalityTolerance = 1e-9;

/// Element (B, V, R, A) of the Galilei group acting on (t, x, 1) as
///
///   [ 1  0  B ]
///   [ V  R  A ]
///   [ 0  0  1 ]
struct GalileiElement {
    double B = 0.0;
    Vec3 V = Vec3::Zero();
    Mat3 R = Mat3::Identity();
    Vec3 A = Vec3::Zero();

    static GalileiElement identity() { return {}; }
    Mat5 matrix() const;
    static GalileiElement from_matrix(const Mat5& m);
};

// Throws ValidationError unless R is a proper rotation within kOrthogonalityTolerance.
void validate(const GalileiElement& g);

/// Infinitesimal parameters. Each coset reads only the subset it needs:
/// space-time (b, v, omega, a), configuration (omega, xbar, pbar, thetabar),
/// phase space (omega, pbar, xbar, thetabar).
struct InfinitesimalElement {
    double b = 0.0;
    Vec3 v = Vec3::Zero();
    Mat3 omega = Mat3::Zero();
    Vec3 a = Vec3::Zero();
    Vec3 pbar = Vec3::Zero();
    Vec3 xbar = Vec3::Zero();
    double thetabar = 0.0;
};

// omega + omega^T must vanish exactly.
void validate(const InfinitesimalElement& e);

struct SpaceTime {
    double t = 0.0;
    Vec3 x = Vec3::Zero();
};

struct Config {
    Vec3 x = Vec3::Zero();
    double theta = 0.0;
};

struct Phase {
    Vec3 p = Vec3::Zero();
    Vec3 x = Vec3::Zero();
    double theta = 0.0;
};

using CosetPoint = std::variant<SpaceTime, Config, Phase>;

struct SpaceTimeTangent {
    double dt = 0.0;
    Vec3 dx = Vec3::Zero();
};

struct ConfigTangent {
    Vec3 dx = Vec3::Zero();
    double dtheta = 0.0;
};

struct PhaseTangent {
    Vec3 dp = Vec3::Zero();
    Vec3 dx = Vec3::Zero();
    double dtheta = 0.0;
};

// omega with omega * x = axis x x, i.e. (omega)_ij = -eps_kij axis_k.
Mat3 rotation_generator(const Vec3& axis);
// exp(rotation_generator(axis_angle)), by Rodrigues' formula.
Mat3 rotation(const Vec3& axis_angle);

SpaceTime apply_galilei(const GalileiElement& g, const SpaceTime& pt);
GalileiElement compose(const GalileiElement& g1, const GalileiElement& g2);
GalileiElement inverse(const GalileiElement& g);

// Matrix realizations acting on (t, x, 1), (x, theta, 1) and (p, x, theta, 1).
Mat5 spacetime_generator(const InfinitesimalElement& e);
Mat5 config_generator(const InfinitesimalElement& e);
Mat8 phase_generator(const InfinitesimalElement& e);

SpaceTimeTangent infinitesimal_spacetime(const InfinitesimalElement& e, const SpaceTime& pt);
ConfigTangent infinitesimal_config(const InfinitesimalElement& e, const Config& pt);
PhaseTangent infinitesimal_phase(const InfinitesimalElement& e, const Phase& pt);

/// Action in coordinates conjugate to the rescaled generators X/k, P/k. The cocycle
/// in dtheta picks up a factor hbar = 1/k^2 and vanishes in the limit.
PhaseTangent contracted_action(const InfinitesimalElement& e, const Phase& pt,
                               const algebra::ContractionParams& params);
ConfigTangent contracted_action(const InfinitesimalElement& e, const Config& pt,
                                const algebra::ContractionParams& params);

// exp(s M) applied to the point, M the matrix realization of e.
SpaceTime flow(const InfinitesimalElement& e, const SpaceTime& pt, double s);
Config flow(const InfinitesimalElement& e, const Config& pt, double s);
Phase flow(const InfinitesimalElement& e, const Phase& pt, double s);

// pt, g pt, g^2 pt, ... (steps + 1 points).
std::vector<CosetPoint> orbit(const GalileiElement& g, const SpaceTime& start, std::size_t steps);
// Integral curve sampled at s = n * ds, n = 0..steps.
std::vector<CosetPoint> orbit(const InfinitesimalElement& e, const CosetPoint& start, std::size_t steps, double ds);

// CSV with header `step,s,<coordinates>`; s = step * ds.
void write_orbit_csv(std::ostream& out, const std::vector<CosetPoint>& points, double ds);

}  // namespace qspace::coset
