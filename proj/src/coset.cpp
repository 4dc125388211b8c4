#include "qspace/coset.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "qspace/csv.hpp"
#include "qspace/errors.hpp"

namespace qspace::coset {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

Mat5 GalileiElement::matrix() const {
    Mat5 m = Mat5::Identity();
    m(0, 4) = B;
    m.block<3, 1>(1, 0) = V;
    m.block<3, 3>(1, 1) = R;
    m.block<3, 1>(1, 4) = A;
    return m;
}

GalileiElement GalileiElement::from_matrix(const Mat5& m) {
    GalileiElement g;
    g.B = m(0, 4);
    g.V = m.block<3, 1>(1, 0);
    g.R = m.block<3, 3>(1, 1);
    g.A = m.block<3, 1>(1, 4);
    return g;
}

void validate(const GalileiElement& g) {
    if (!std::isfinite(g.B) || !finite(g.V) || !finite(g.A) || !g.R.allFinite())
        throw ValidationError("Galilei element has non-finite parameters");
    const double orth = (g.R.transpose() * g.R - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (orth > kOrthogonalityTolerance)
        throw ValidationError("rotation block is not orthogonal (defect " + std::to_string(orth) + ")");
    if (std::abs(g.R.determinant() - 1.0) > kOrthogonalityTolerance)
        throw ValidationError("rotation block must have determinant +1");
}

void validate(const InfinitesimalElement& e) {
    if ((e.omega + e.omega.transpose()).cwiseAbs().maxCoeff() != 0.0)
        throw ValidationError("omega must be antisymmetric");
}

Mat3 rotation_generator(const Vec3& axis) {
    Mat3 w;
    w << 0.0, -axis.z(), axis.y(),
         axis.z(), 0.0, -axis.x(),
         -axis.y(), axis.x(), 0.0;
    return w;
}

Mat3 rotation(const Vec3& axis_angle) {
    const double angle = axis_angle.norm();
    if (angle == 0.0) return Mat3::Identity();
    const Mat3 k = rotation_generator(axis_angle / angle);
    return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

SpaceTime apply_galilei(const GalileiElement& g, const SpaceTime& pt) {
    validate(g);
    Eigen::Matrix<double, 5, 1> col;
    col << pt.t, pt.x, 1.0;
    const Eigen::Matrix<double, 5, 1> out = g.matrix() * col;
    return {out(0), out.segment<3>(1)};
}

GalileiElement compose(const GalileiElement& g1, const GalileiElement& g2) {
    validate(g1);
    validate(g2);
    GalileiElement g;
    g.B = g1.B + g2.B;
    g.V = g1.V + g1.R * g2.V;
    g.R = g1.R * g2.R;
    g.A = g1.V * g2.B + g1.R * g2.A + g1.A;
    return g;
}

GalileiElement inverse(const GalileiElement& g) {
    validate(g);
    GalileiElement inv;
    inv.R = g.R.transpose();
    inv.B = -g.B;
    inv.V = -inv.R * g.V;
    inv.A = inv.R * (g.V * g.B - g.A);
    return inv;
}

Mat5 spacetime_generator(const InfinitesimalElement& e) {
    validate(e);
    Mat5 m = Mat5::Zero();
    m(0, 4) = e.b;
    m.block<3, 1>(1, 0) = e.v;
    m.block<3, 3>(1, 1) = e.omega;
    m.block<3, 1>(1, 4) = e.a;
    return m;
}

Mat5 config_generator(const InfinitesimalElement& e) {
    validate(e);
    Mat5 m = Mat5::Zero();
    m.block<3, 3>(0, 0) = e.omega;
    m.block<3, 1>(0, 4) = e.xbar;
    m.block<1, 3>(3, 0) = e.pbar.transpose();
    m(3, 4) = e.thetabar;
    return m;
}

Mat8 phase_generator(const InfinitesimalElement& e) {
    validate(e);
    Mat8 m = Mat8::Zero();
    m.block<3, 3>(0, 0) = e.omega;
    m.block<3, 1>(0, 7) = e.pbar;
    m.block<3, 3>(3, 3) = e.omega;
    m.block<3, 1>(3, 7) = e.xbar;
    m.block<1, 3>(6, 0) = -0.5 * e.xbar.transpose();
    m.block<1, 3>(6, 3) = 0.5 * e.pbar.transpose();
    m(6, 7) = e.thetabar;
    return m;
}

SpaceTimeTangent infinitesimal_spacetime(const InfinitesimalElement& e, const SpaceTime& pt) {
    Eigen::Matrix<double, 5, 1> col;
    col << pt.t, pt.x, 1.0;
    const Eigen::Matrix<double, 5, 1> d = spacetime_generator(e) * col;
    return {d(0), d.segment<3>(1)};
}

ConfigTangent infinitesimal_config(const InfinitesimalElement& e, const Config& pt) {
    Eigen::Matrix<double, 5, 1> col;
    col << pt.x, pt.theta, 1.0;
    const Eigen::Matrix<double, 5, 1> d = config_generator(e) * col;
    return {d.segment<3>(0), d(3)};
}

PhaseTangent infinitesimal_phase(const InfinitesimalElement& e, const Phase& pt) {
    Eigen::Matrix<double, 8, 1> col;
    col << pt.p, pt.x, pt.theta, 1.0;
    const Eigen::Matrix<double, 8, 1> d = phase_generator(e) * col;
    return {d.segment<3>(0), d.segment<3>(3), d(6)};
}

PhaseTangent contracted_action(const InfinitesimalElement& e, const Phase& pt,
                               const algebra::ContractionParams& params) {
    validate(e);
    PhaseTangent d;
    d.dp = e.omega * pt.p + e.pbar;
    d.dx = e.omega * pt.x + e.xbar;
    d.dtheta = e.thetabar;
    if (!params.is_limit()) d.dtheta += params.hbar() * 0.5 * (e.pbar.dot(pt.x) - e.xbar.dot(pt.p));
    return d;
}

ConfigTangent contracted_action(const InfinitesimalElement& e, const Config& pt,
                                const algebra::ContractionParams& params) {
    validate(e);
    ConfigTangent d;
    d.dx = e.omega * pt.x + e.xbar;
    d.dtheta = e.thetabar;
    if (!params.is_limit()) d.dtheta += params.hbar() * e.pbar.dot(pt.x);
    return d;
}

SpaceTime flow(const InfinitesimalElement& e, const SpaceTime& pt, double s) {
    const Mat5 g = (s * spacetime_generator(e)).exp();
    Eigen::Matrix<double, 5, 1> col;
    col << pt.t, pt.x, 1.0;
    const Eigen::Matrix<double, 5, 1> out = g * col;
    return {out(0), out.segment<3>(1)};
}

Config flow(const InfinitesimalElement& e, const Config& pt, double s) {
    const Mat5 g = (s * config_generator(e)).exp();
    Eigen::Matrix<double, 5, 1> col;
    col << pt.x, pt.theta, 1.0;
    const Eigen::Matrix<double, 5, 1> out = g * col;
    return {out.segment<3>(0), out(3)};
}

Phase flow(const InfinitesimalElement& e, const Phase& pt, double s) {
    const Mat8 g = (s * phase_generator(e)).exp();
    Eigen::Matrix<double, 8, 1> col;
    col << pt.p, pt.x, pt.theta, 1.0;
    const Eigen::Matrix<double, 8, 1> out = g * col;
    return {out.segment<3>(0), out.segment<3>(3), out(6)};
}

std::vector<CosetPoint> orbit(const GalileiElement& g, const SpaceTime& start, std::size_t steps) {
    validate(g);
    std::vector<CosetPoint> points{start};
    SpaceTime cur = start;
    for (std::size_t n = 0; n < steps; ++n) {
        cur = apply_galilei(g, cur);
        points.emplace_back(cur);
    }
    return points;
}

std::vector<CosetPoint> orbit(const InfinitesimalElement& e, const CosetPoint& start, std::size_t steps, double ds) {
    validate(e);
    std::vector<CosetPoint> points;
    points.reserve(steps + 1);
    // Each sample is exp(n ds M) applied to the start point, so errors do not accumulate.
    for (std::size_t n = 0; n <= steps; ++n) {
        const double s = double(n) * ds;
        points.push_back(std::visit([&](const auto& pt) -> CosetPoint { return flow(e, pt, s); }, start));
    }
    return points;
}

void write_orbit_csv(std::ostream& out, const std::vector<CosetPoint>& points, double ds) {
    CsvWriter csv(out);
    if (points.empty()) return;
    struct Header {
        std::vector<std::string> operator()(const SpaceTime&) const { return {"step", "s", "t", "x1", "x2", "x3"}; }
        std::vector<std::string> operator()(const Config&) const { return {"step", "s", "x1", "x2", "x3", "theta"}; }
        std::vector<std::string> operator()(const Phase&) const {
            return {"step", "s", "p1", "p2", "p3", "x1", "x2", "x3", "theta"};
        }
    };
    csv.header(std::visit(Header{}, points.front()));
    for (std::size_t n = 0; n < points.size(); ++n) {
        std::vector<double> row{double(n), double(n) * ds};
        struct Append {
            std::vector<double>& row;
            void operator()(const SpaceTime& p) const { row.insert(row.end(), {p.t, p.x(0), p.x(1), p.x(2)}); }
            void operator()(const Config& p) const { row.insert(row.end(), {p.x(0), p.x(1), p.x(2), p.theta}); }
            void operator()(const Phase& p) const {
                row.insert(row.end(), {p.p(0), p.p(1), p.p(2), p.x(0), p.x(1), p.x(2), p.theta});
            }
        };
        std::visit(Append{row}, points[n]);
        csv.row(row);
    }
}

}  // namespace qspace::coset
