#pragma once

#include "qform/geometry.hpp"
#include "qform/rng.hpp"
#include "qform/sample.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

// Synthetic downward-camera geometry in a North-East-Down world frame:
// +z points down, the ground is the plane z = 0, and a camera flying at
// altitude h has center z = -h.
namespace qform::pinhole {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Intrinsics {
    double fx = 100.0, fy = 100.0;  // focal lengths (pixels)
    double cx = 320.0, cy = 240.0;  // principal point (pixels)
    double width = 640.0, height = 480.0;

    Mat3 K() const {
        Mat3 k;
        k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
        return k;
    }
    Mat3 K_inv() const {
        Mat3 k;
        k << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
        return k;
    }
    void validate() const {
        if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
        if (!(cx > 0 && cx < width) || !(cy > 0 && cy < height))
            throw std::invalid_argument("intrinsics: principal point must be inside the image");
    }
};

struct Pixel {
    double u = 0.0, v = 0.0;
    Vec3 homog() const { return {u, v, 1.0}; }
    Pixel snapped() const { return {std::round(u), std::round(v)}; }
};

struct Pose {
    Mat3 rotation = Mat3::Identity();  // world (NED) -> camera
    Vec3 translation = Vec3::Zero();
    Intrinsics cam;

    Vec3 center() const { return -rotation.transpose() * translation; }
    double altitude() const { return -center().z(); }

    // Camera over ground point (x, y) at the given altitude. The optional
    // rotation tilts/yaws the otherwise straight-down view.
    static Pose looking_down(const CartVec& ground_xy, double altitude, const Intrinsics& cam,
                             const Mat3& rotation = Mat3::Identity());

    void validate() const;  // orthonormal within 1e-9, det +1, positive altitude
};

struct Projection {
    Pixel px;
    double depth;  // distance along the optical axis, in meters
};

// Pinhole projection of a world point; the point must be in front of the camera.
Projection project(const Pose& pose, const Vec3& world_point);

// Vector from the camera center to the ground point seen at the given pixel.
// The ray through the pixel is scaled until its down-component equals the
// altitude, so the result's z is exactly h. Rays at or above the horizon error.
Vec3 back_project_ground(const Pose& pose, const Pixel& px);

// XY-plane displacement between the two camera centers.
CartVec true_rel_disp(const Pose& cam_i, const Pose& cam_j);

// Relative displacement recovered from one matched pixel pair under the
// simplifying assumptions (ego camera axis-aligned, shared K, shared h).
CartVec est_rel_disp(const Pixel& pi, const Pixel& pj, const Mat3& R_ij, const Intrinsics& K, double h);

// In-bounds test with inclusive borders (0 <= u <= W, 0 <= v <= H) and positive depth.
bool sees_ground_point(const Pose& pose, const Vec3& ground_point);

// Ground points back-projected from a grid_n x grid_n pixel grid of camera i
// that are also visible to camera j.
std::vector<Vec3> common_view_grid(const Pose& cam_i, const Pose& cam_j, int grid_n);

struct CommonViewEmpty : std::runtime_error {
    CommonViewEmpty() : std::runtime_error("worst_case_error: the two camera views share no ground point") {}
};

// What the estimator believes, as opposed to the true scene geometry.
struct Assumptions {
    Intrinsics K_est;
    double h_est = 0.0;                 // <= 0 means "use camera i's true altitude"
    std::optional<Mat3> R_ij_est;       // absent means "use the exact relative rotation"
    bool snap_pixels = false;
};

struct WorstCase {
    double max_error = 0.0;
    Vec3 feature = Vec3::Zero();  // ground point realizing the maximum
};

// Dense grid search over the common view plus a few shrinking local
// refinement passes around the best cell. The grid doubles as the test
// oracle for the estimator's exactness.
WorstCase worst_case_error(const Pose& cam_i, const Pose& cam_j, const Assumptions& assum, int grid_n);

// Rotation by a uniform angle in [0, max_angle] about a uniformly random axis.
Mat3 small_random_rotation(double max_angle, Rng& rng);

// Scenario for drawing synthetic (true, perceived) pairs from the camera
// geometry. noise_scale ("fog proxy") multiplies the pixel noise; dropout is
// the chance a sample finds no usable shared feature and degrades to an
// outlier estimate, mimicking far-range matching failure.
struct SynthScenario {
    Intrinsics cam;
    double altitude = 10.0;
    double r_min = 2.0, r_max = 20.0;   // annulus of true relative positions
    bool snap_pixels = true;
    double pixel_noise = 0.0;           // gaussian sigma, pixels
    double dropout = 0.0;               // probability of an outlier sample
    double altitude_noise = 0.0;        // sigma of the other camera's altitude offset, meters
    double rot_noise = 0.0;             // max angle of the relative-rotation estimate error, radians
    double ego_tilt = 0.0;              // max tilt of each camera away from straight down, radians
    double outlier_r_max = 60.0;        // outlier estimates fall uniformly in this disk
    double feature_spread = 3.0;        // sigma of the shared feature around the midpoint, meters
    int feature_tries = 32;
    std::string env_label;
};

// One perceived estimate for a true relative displacement (polar form).
PolarVec perceive_pinhole(const PolarVec& truth, const SynthScenario& sc, Rng& rng);

// n records with true positions uniform over the annulus (by area).
std::vector<SampleRecord> synth_samples(const SynthScenario& sc, int n, Rng& rng);

}  // namespace qform::pinhole
