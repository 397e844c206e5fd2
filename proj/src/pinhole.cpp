#include "qform/pinhole.hpp"

#include <algorithm>
#include <cmath>

namespace qform::pinhole {

Pose Pose::looking_down(const CartVec& ground_xy, double altitude, const Intrinsics& cam, const Mat3& rotation) {
    if (!(altitude > 0.0)) throw std::invalid_argument("pose: altitude must be positive");
    Pose p;
    p.rotation = rotation;
    p.cam = cam;
    const Vec3 center{ground_xy.x(), ground_xy.y(), -altitude};
    p.translation = -rotation * center;
    return p;
}

void Pose::validate() const {
    cam.validate();
    const Mat3 should_be_identity = rotation.transpose() * rotation;
    if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("pose: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9)
        throw std::invalid_argument("pose: rotation must be proper (det +1)");
    if (!(altitude() > 0.0)) throw std::invalid_argument("pose: camera must be above the ground plane");
}

Projection project(const Pose& pose, const Vec3& world_point) {
    const Vec3 in_cam = pose.rotation * world_point + pose.translation;
    if (!(in_cam.z() > 0.0)) throw std::invalid_argument("project: point is behind the image plane");
    const Vec3 h = pose.cam.K() * in_cam;
    return {{h.x() / h.z(), h.y() / h.z()}, in_cam.z()};
}

Vec3 back_project_ground(const Pose& pose, const Pixel& px) {
    const Vec3 dir = pose.rotation.transpose() * (pose.cam.K_inv() * px.homog());
    if (!(dir.z() > 0.0)) throw std::invalid_argument("back_project_ground: ray does not reach the ground");
    return pose.altitude() / dir.z() * dir;
}

CartVec true_rel_disp(const Pose& cam_i, const Pose& cam_j) {
    return (cam_j.center() - cam_i.center()).head<2>();
}

CartVec est_rel_disp(const Pixel& pi, const Pixel& pj, const Mat3& R_ij, const Intrinsics& K, double h) {
    const Vec3 di = K.K_inv() * pi.homog();
    const Vec3 dj = R_ij.transpose() * (K.K_inv() * pj.homog());
    if (!(di.z() > 0.0) || !(dj.z() > 0.0))
        throw std::invalid_argument("est_rel_disp: pixel ray does not reach the ground");
    const Vec3 q = h / di.z() * di - h / dj.z() * dj;
    return q.head<2>();
}

bool sees_ground_point(const Pose& pose, const Vec3& ground_point) {
    const Vec3 in_cam = pose.rotation * ground_point + pose.translation;
    if (!(in_cam.z() > 0.0)) return false;
    const Vec3 h = pose.cam.K() * in_cam;
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    return u >= 0.0 && u <= pose.cam.width && v >= 0.0 && v <= pose.cam.height;
}

std::vector<Vec3> common_view_grid(const Pose& cam_i, const Pose& cam_j, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("common_view_grid: need at least a 2x2 grid");
    std::vector<Vec3> points;
    const double du = cam_i.cam.width / (grid_n - 1);
    const double dv = cam_i.cam.height / (grid_n - 1);
    for (int iu = 0; iu < grid_n; ++iu) {
        for (int iv = 0; iv < grid_n; ++iv) {
            const Pixel px{iu * du, iv * dv};
            Vec3 ray;
            try {
                ray = back_project_ground(cam_i, px);
            } catch (const std::invalid_argument&) {
                continue;  // horizon ray from a tilted camera
            }
            Vec3 ground = cam_i.center() + ray;
            ground.z() = 0.0;  // exact by construction, up to rounding
            if (sees_ground_point(cam_j, ground)) points.push_back(ground);
        }
    }
    return points;
}

namespace {

double error_at(const Pose& cam_i, const Pose& cam_j, const Assumptions& assum, const Mat3& R_ij_est,
                double h_est, const Vec3& feature) {
    const Pixel pi_raw = project(cam_i, feature).px;
    const Pixel pj_raw = project(cam_j, feature).px;
    const Pixel pi = assum.snap_pixels ? pi_raw.snapped() : pi_raw;
    const Pixel pj = assum.snap_pixels ? pj_raw.snapped() : pj_raw;
    const CartVec est = est_rel_disp(pi, pj, R_ij_est, assum.K_est, h_est);
    return (est - true_rel_disp(cam_i, cam_j)).norm();
}

}  // namespace

WorstCase worst_case_error(const Pose& cam_i, const Pose& cam_j, const Assumptions& assum, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("worst_case_error: need at least a 2x2 grid");
    const Mat3 R_ij_est = assum.R_ij_est ? *assum.R_ij_est : Mat3(cam_j.rotation * cam_i.rotation.transpose());
    const double h_est = assum.h_est > 0.0 ? assum.h_est : cam_i.altitude();

    WorstCase best;
    bool found = false;
    Pixel best_px;

    const auto consider = [&](const Pixel& px) {
        Vec3 ground;
        try {
            ground = cam_i.center() + back_project_ground(cam_i, px);
        } catch (const std::invalid_argument&) {
            return;
        }
        ground.z() = 0.0;
        if (!sees_ground_point(cam_j, ground) || !sees_ground_point(cam_i, ground)) return;
        const double err = error_at(cam_i, cam_j, assum, R_ij_est, h_est, ground);
        if (!found || err > best.max_error) {
            best = {err, ground};
            best_px = px;
            found = true;
        }
    };

    double u0 = 0.0, v0 = 0.0;
    double u_span = cam_i.cam.width, v_span = cam_i.cam.height;
    for (int round = 0; round < 3; ++round) {
        const double du = u_span / (grid_n - 1);
        const double dv = v_span / (grid_n - 1);
        for (int iu = 0; iu < grid_n; ++iu)
            for (int iv = 0; iv < grid_n; ++iv) consider({u0 + iu * du, v0 + iv * dv});
        if (!found) throw CommonViewEmpty{};
        // shrink the search window around the current best pixel
        u_span = std::min(2.5 * du, cam_i.cam.width);
        v_span = std::min(2.5 * dv, cam_i.cam.height);
        u0 = std::clamp(best_px.u - u_span / 2, 0.0, cam_i.cam.width - u_span);
        v0 = std::clamp(best_px.v - v_span / 2, 0.0, cam_i.cam.height - v_span);
    }
    return best;
}

Mat3 small_random_rotation(double max_angle, Rng& rng) {
    if (max_angle <= 0.0) return Mat3::Identity();
    // uniform axis via gaussian normalization
    Vec3 axis{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
    axis.normalize();
    const double angle = rng.uniform(0.0, max_angle);
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

namespace {

PolarVec outlier_estimate(const SynthScenario& sc, Rng& rng) {
    // a garbage fix somewhere in the work area, the way far-range matching fails
    const double r = sc.outlier_r_max * std::sqrt(rng.uniform(1e-4, 1.0));
    return {std::max(r, 1e-6), wrap_angle(rng.uniform(0.0, kTwoPi))};
}

}  // namespace

PolarVec perceive_pinhole(const PolarVec& truth, const SynthScenario& sc, Rng& rng) {
    truth.validate();
    if (sc.dropout > 0.0 && rng.uniform01() < sc.dropout) return outlier_estimate(sc, rng);

    const CartVec rel = truth.to_cart();
    const Mat3 R_i = small_random_rotation(sc.ego_tilt, rng);
    const Mat3 R_j = small_random_rotation(sc.ego_tilt, rng);
    const double h_j = sc.altitude + (sc.altitude_noise > 0.0 ? sc.altitude_noise * rng.gaussian() : 0.0);
    const Pose cam_i = Pose::looking_down({0.0, 0.0}, sc.altitude, sc.cam, R_i);
    const Pose cam_j = Pose::looking_down(rel, std::max(h_j, 0.5), sc.cam, R_j);

    // shared feature near the midpoint of the two footprints
    Vec3 feature = Vec3::Zero();
    bool found = false;
    const CartVec mid = rel / 2;
    for (int attempt = 0; attempt < sc.feature_tries && !found; ++attempt) {
        const Vec3 candidate{mid.x() + sc.feature_spread * rng.gaussian(),
                             mid.y() + sc.feature_spread * rng.gaussian(), 0.0};
        if (sees_ground_point(cam_i, candidate) && sees_ground_point(cam_j, candidate)) {
            feature = candidate;
            found = true;
        }
    }
    if (!found) return outlier_estimate(sc, rng);

    Pixel pi = project(cam_i, feature).px;
    Pixel pj = project(cam_j, feature).px;
    if (sc.pixel_noise > 0.0) {
        pi = {pi.u + sc.pixel_noise * rng.gaussian(), pi.v + sc.pixel_noise * rng.gaussian()};
        pj = {pj.u + sc.pixel_noise * rng.gaussian(), pj.v + sc.pixel_noise * rng.gaussian()};
    }
    if (sc.snap_pixels) {
        pi = pi.snapped();
        pj = pj.snapped();
    }
    const Mat3 R_ij_est = small_random_rotation(sc.rot_noise, rng) * (R_j * R_i.transpose());

    CartVec est;
    try {
        est = est_rel_disp(pi, pj, R_ij_est, sc.cam, sc.altitude);
    } catch (const std::invalid_argument&) {
        return outlier_estimate(sc, rng);  // noise pushed a ray past the horizon
    }
    const double r = est.norm();
    if (!(r > 1e-9)) return {1e-9, 0.0};
    return PolarVec::from_cart(est);
}

std::vector<SampleRecord> synth_samples(const SynthScenario& sc, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("synth_samples: need at least one sample");
    std::vector<SampleRecord> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        // uniform over the annulus by area
        const double r = std::sqrt(rng.uniform(sc.r_min * sc.r_min, sc.r_max * sc.r_max));
        const PolarVec truth{r, wrap_angle(rng.uniform(0.0, kTwoPi))};
        out.push_back({truth, perceive_pinhole(truth, sc, rng), sc.env_label});
    }
    return out;
}

}  // namespace qform::pinhole
