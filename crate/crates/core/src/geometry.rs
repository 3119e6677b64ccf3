//! Small fixed-size vector and rotation helpers.
//!
//! Rotations are 3×3 matrices stored row-major as `[f64; 9]`.

pub type Vec3 = [f64; 3];
pub type Mat3 = [f64; 9];

pub const IDENTITY: Mat3 = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn lerp3(a: Vec3, b: Vec3, u: f64) -> Vec3 {
    [
        a[0] + (b[0] - a[0]) * u,
        a[1] + (b[1] - a[1]) * u,
        a[2] + (b[2] - a[2]) * u,
    ]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between two vectors in `[0, π]`.
///
/// Uses `atan2(|a×b|, a·b)`, which stays accurate for nearly parallel
/// vectors where the arccos form loses about half the mantissa.
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

#[inline]
pub fn mat_get(m: &Mat3, r: usize, c: usize) -> f64 {
    m[r * 3 + c]
}

pub fn transpose(m: &Mat3) -> Mat3 {
    [m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[r * 3 + c] = (0..3).map(|k| a[r * 3 + k] * b[k * 3 + c]).sum();
        }
    }
    out
}

pub fn determinant(m: &Mat3) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// Largest absolute deviation of `mᵀm` from the identity, together with
/// the deviation of the determinant from +1.
pub fn orthonormality_error(m: &Mat3) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            let v: f64 = (0..3).map(|k| m[k * 3 + r] * m[k * 3 + c]).sum();
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst.max((determinant(m) - 1.0).abs())
}

/// Rotation angle of `aᵀ·b`, in `[0, π]`.
///
/// Computed as `atan2(|skew|, trace − 1)` on the relative rotation. The
/// trace and skew terms are accumulated so that swapping `a` and `b`
/// produces bit-identical results.
pub fn relative_rotation_angle(a: &Mat3, b: &Mat3) -> f64 {
    // (aᵀb)_{rc} = Σ_k a_{kr} b_{kc}
    let rel = |r: usize, c: usize| -> f64 { (0..3).map(|k| a[k * 3 + r] * b[k * 3 + c]).sum() };
    let rel_t = |r: usize, c: usize| -> f64 { (0..3).map(|k| b[k * 3 + r] * a[k * 3 + c]).sum() };
    let trace: f64 = (0..9).map(|i| a[i] * b[i]).sum();
    let sx = rel(2, 1) - rel_t(2, 1);
    let sy = rel(0, 2) - rel_t(0, 2);
    let sz = rel(1, 0) - rel_t(1, 0);
    let sin2 = (sx * sx + sy * sy + sz * sz).sqrt();
    sin2.atan2(trace - 1.0)
}

/// Axis-angle vector of a rotation matrix (the matrix logarithm as a 3-vector).
pub fn log_map(m: &Mat3) -> Vec3 {
    let trace = m[0] + m[4] + m[8];
    let skew = [m[7] - m[5], m[2] - m[6], m[3] - m[1]];
    let s = norm(skew);
    let theta = s.atan2(trace - 1.0);
    if theta < 1e-12 {
        // first-order: log(R) ≈ (R − Rᵀ)/2
        return scale(skew, 0.5);
    }
    if std::f64::consts::PI - theta < 1e-4 {
        // near π the skew part vanishes; recover the axis from the symmetric
        // part R = cI + (1 − c)nnᵀ + s[n]×
        let c = (trace - 1.0) / 2.0;
        let one_minus_c = 1.0 - c;
        let diag = [m[0], m[4], m[8]];
        let i = (0..3)
            .max_by(|&x, &y| diag[x].total_cmp(&diag[y]))
            .unwrap_or(0);
        let mut axis = [0.0; 3];
        axis[i] = ((diag[i] - c) / one_minus_c).max(0.0).sqrt();
        for j in 0..3 {
            if j != i {
                axis[j] = (m[i * 3 + j] + m[j * 3 + i]) / (2.0 * one_minus_c * axis[i]);
            }
        }
        if dot(axis, skew) < 0.0 {
            axis = scale(axis, -1.0);
        }
        let n = norm(axis);
        if n > 0.0 {
            return scale(axis, theta / n);
        }
    }
    scale(skew, theta / (2.0 * theta.sin()))
}

/// Rotation about a unit axis by `angle` radians (Rodrigues).
pub fn rotation_from_axis_angle(axis: Vec3, angle: f64) -> Mat3 {
    let n = norm(axis);
    if n == 0.0 {
        return IDENTITY;
    }
    let [x, y, z] = scale(axis, 1.0 / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        t * x * x + c,
        t * x * y - s * z,
        t * x * z + s * y,
        t * x * y + s * z,
        t * y * y + c,
        t * y * z - s * x,
        t * x * z - s * y,
        t * y * z + s * x,
        t * z * z + c,
    ]
}
