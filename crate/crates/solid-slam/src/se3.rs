//! SE(3)/se(3) primitives used by the odometry solver.
//!
//! Conventions (important, read before touching the solver):
//!
//! * A [`Twist`] carries `rho` (rotation, radians) and `phi` (translation,
//!   meters). The hat matrix places `[rho]_x` in the rotation block and
//!   `phi` in the translation column. This naming is the opposite of the
//!   common textbook convention; it is kept because every derivative
//!   formula in this crate is written against it.
//! * The 6-vector form consumed by the solver (and produced by all
//!   Jacobians) stacks the *translational* components first:
//!   `v = [phi, rho]`. [`point_jacobian`] returns `[I3 | -skew(T*p)]` in
//!   exactly this column order, so a Gauss-Newton increment can be fed
//!   straight back through [`Twist::from_vector`] and [`exp`].

use nalgebra::{Matrix3, Matrix3x6, Matrix4, Vector3, Vector6};
use thiserror::Error;

pub type Point3 = Vector3<f64>;

/// Rotation angle below which Taylor expansions replace the closed forms.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Orthonormality drift tolerated before a rotation is re-normalized.
const ORTHO_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    /// The principal logarithm is ill-conditioned near a half-turn.
    #[error("rotation angle too close to pi for a principal-branch log")]
    AngleNearPi,
}

/// Tangent-space element of SE(3).
///
/// `rho` is the rotation part, `phi` the translation part (see the module
/// docs for why the names look swapped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub rho: Vector3<f64>,
    pub phi: Vector3<f64>,
}

impl Twist {
    pub fn new(rho: Vector3<f64>, phi: Vector3<f64>) -> Self {
        Self { rho, phi }
    }

    pub fn zero() -> Self {
        Self { rho: Vector3::zeros(), phi: Vector3::zeros() }
    }

    /// Solver layout: translation first, rotation second.
    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            phi: Vector3::new(v[0], v[1], v[2]),
            rho: Vector3::new(v[3], v[4], v[5]),
        }
    }

    /// Inverse of [`Twist::from_vector`].
    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.phi.x, self.phi.y, self.phi.z,
            self.rho.x, self.rho.y, self.rho.z,
        )
    }

    /// Combined norm in radians/meters, used for convergence checks.
    pub fn norm(&self) -> f64 {
        (self.rho.norm_squared() + self.phi.norm_squared()).sqrt()
    }
}

/// Rigid transform: `p_world = rotation * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self { rotation: Matrix3::identity(), translation: t }
    }

    /// Rotation angle in radians, in `[0, pi]`.
    pub fn rotation_angle(&self) -> f64 {
        let c = ((self.rotation.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Maximum absolute deviation of `R^T R` from the identity.
    pub fn orthonormality_drift(&self) -> f64 {
        let e = self.rotation.transpose() * self.rotation - Matrix3::identity();
        e.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn renormalized(mut self) -> Self {
        if self.orthonormality_drift() > ORTHO_TOL {
            let q = nalgebra::UnitQuaternion::from_matrix(&self.rotation);
            self.rotation = q.to_rotation_matrix().into_inner();
        }
        self
    }
}

/// Skew-symmetric matrix of `v`, satisfying `skew(v) * w == v x w`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v.z, v.y,
        v.z, 0.0, -v.x,
        -v.y, v.x, 0.0,
    )
}

/// 4x4 matrix form of a twist: `[skew(rho), phi; 0, 0]`.
pub fn hat(xi: &Twist) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&xi.rho));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&xi.phi);
    m
}

/// Exponential map se(3) -> SE(3).
///
/// The rotation follows Rodrigues' formula, the translation is `V * phi`
/// with the usual SE(3) left Jacobian `V`. Angles below [`SMALL_ANGLE`]
/// take the Taylor branch.
pub fn exp(xi: &Twist) -> Pose {
    let theta = xi.rho.norm();
    let k = skew(&xi.rho);
    let k2 = k * k;
    let (rotation, v) = if theta < SMALL_ANGLE {
        let r = Matrix3::identity() + k + 0.5 * k2;
        let v = Matrix3::identity() + 0.5 * k + k2 / 6.0;
        (r, v)
    } else {
        let t2 = theta * theta;
        let a = theta.sin() / theta;
        let b = (1.0 - theta.cos()) / t2;
        let c = (theta - theta.sin()) / (t2 * theta);
        let r = Matrix3::identity() + a * k + b * k2;
        let v = Matrix3::identity() + b * k + c * k2;
        (r, v)
    };
    Pose { rotation, translation: v * xi.phi }
}

/// Principal logarithm SE(3) -> se(3).
///
/// Fails with [`GeometryError::AngleNearPi`] when the rotation angle is
/// within `1e-6` of a half-turn, where the principal branch degenerates.
pub fn log(pose: &Pose) -> Result<Twist, GeometryError> {
    let r = &pose.rotation;
    let cos_theta = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    if theta > std::f64::consts::PI - 1e-6 {
        return Err(GeometryError::AngleNearPi);
    }
    let anti = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let rho = if theta < SMALL_ANGLE {
        // sin(theta)/theta -> 1; second-order correction keeps the
        // round-trip below 1e-12 for tiny angles.
        0.5 * (1.0 + theta * theta / 6.0) * anti
    } else {
        (theta / (2.0 * theta.sin())) * anti
    };
    let k = skew(&rho);
    let k2 = k * k;
    let coeff = if theta < SMALL_ANGLE {
        1.0 / 12.0
    } else {
        (1.0 - theta * theta.sin() / (2.0 * (1.0 - theta.cos()))) / (theta * theta)
    };
    let v_inv = Matrix3::identity() - 0.5 * k + coeff * k2;
    Ok(Twist { rho, phi: v_inv * pose.translation })
}

/// `A` then `B` applied from the right: `compose(A, B) * p == A * (B * p)`.
pub fn compose(a: &Pose, b: &Pose) -> Pose {
    Pose {
        rotation: a.rotation * b.rotation,
        translation: a.rotation * b.translation + a.translation,
    }
    .renormalized()
}

pub fn inverse(t: &Pose) -> Pose {
    let rt = t.rotation.transpose();
    Pose { rotation: rt, translation: -(rt * t.translation) }
}

pub fn transform_point(t: &Pose, p: &Point3) -> Point3 {
    t.rotation * p + t.translation
}

/// Derivative of `exp(delta) * T * p` w.r.t. the left perturbation
/// `delta`, evaluated at `delta = 0`.
///
/// Columns 1-3 differentiate w.r.t. the translational components, columns
/// 4-6 w.r.t. the rotational ones: `[I3 | -skew(T*p)]`. The 4x6 form has a
/// zero bottom row which nothing downstream consumes, so only the 3x6
/// block is returned.
pub fn point_jacobian(t: &Pose, p: &Point3) -> Matrix3x6<f64> {
    let tp = transform_point(t, p);
    let mut j = Matrix3x6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
    j.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(&tp)));
    j
}
