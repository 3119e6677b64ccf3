//! Reference implementations shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use farpls_core::similarity::DistanceMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Full-table DTW filled column by column.
pub fn dtw_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut g = vec![vec![f64::INFINITY; m]; n];
    for j in 0..m {
        for i in 0..n {
            let mut cost = 0.0;
            for k in 0..a[i].len() {
                cost += (a[i][k] - b[j][k]).powi(2);
            }
            let cost = cost.sqrt();
            let prior = if i == 0 && j == 0 {
                0.0
            } else {
                let mut p = f64::INFINITY;
                if i > 0 {
                    p = p.min(g[i - 1][j]);
                }
                if j > 0 {
                    p = p.min(g[i][j - 1]);
                }
                if i > 0 && j > 0 {
                    p = p.min(g[i - 1][j - 1]);
                }
                p
            };
            g[i][j] = prior + cost;
        }
    }
    g[n - 1][m - 1]
}

pub fn random_series(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect()
}

pub fn best_cost_by_enumeration(d: &DistanceMatrix, k: usize) -> f64 {
    let n = d.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut cost = 0.0;
        for j in 0..n {
            let mut near = f64::INFINITY;
            for m in 0..n {
                if mask & (1 << m) != 0 {
                    near = near.min(d.get(m, j));
                }
            }
            cost += near;
        }
        best = best.min(cost);
    }
    best
}

pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
        .collect();
    let ids = (0..n).map(|i| format!("x{i}")).collect();
    DistanceMatrix::from_fn(ids, |i, j| {
        ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt()
    })
}

pub fn blobs(rng: &mut ChaCha8Rng, sizes: &[usize]) -> DistanceMatrix {
    let mut pts = Vec::new();
    for (b, &s) in sizes.iter().enumerate() {
        for _ in 0..s {
            pts.push(b as f64 * 100.0 + rng.random_range(0.0..5.0));
        }
    }
    let ids = (0..pts.len()).map(|i| format!("x{i}")).collect();
    DistanceMatrix::from_fn(ids, |i, j| (pts[i] - pts[j]).abs())
}

pub mod naive {
    use farpls_core::trajectory::{Trajectory, FINGER_LEFT, FINGER_RIGHT, TARGET_CAN};

    pub fn len3(v: [f64; 3]) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    fn diff3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    fn can(traj: &Trajectory, t: usize) -> ([f64; 3], [f64; 9]) {
        let p = &traj.frames[t].object_poses[TARGET_CAN];
        (p.pos, p.rot)
    }

    // angle of m = aᵀb through its quaternion, largest component first
    fn trace_angle(a: &[f64; 9], b: &[f64; 9]) -> f64 {
        let mut m = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    m[r * 3 + c] += a[k * 3 + r] * b[k * 3 + c];
                }
            }
        }
        let tr = m[0] + m[4] + m[8];
        let (w, x, y, z);
        if tr >= m[0] && tr >= m[4] && tr >= m[8] {
            w = 0.5 * (1.0 + tr).sqrt();
            x = (m[7] - m[5]) / (4.0 * w);
            y = (m[2] - m[6]) / (4.0 * w);
            z = (m[3] - m[1]) / (4.0 * w);
        } else if m[0] >= m[4] && m[0] >= m[8] {
            x = 0.5 * (1.0 + 2.0 * m[0] - tr).sqrt();
            w = (m[7] - m[5]) / (4.0 * x);
            y = (m[1] + m[3]) / (4.0 * x);
            z = (m[2] + m[6]) / (4.0 * x);
        } else if m[4] >= m[8] {
            y = 0.5 * (1.0 + 2.0 * m[4] - tr).sqrt();
            w = (m[2] - m[6]) / (4.0 * y);
            x = (m[1] + m[3]) / (4.0 * y);
            z = (m[5] + m[7]) / (4.0 * y);
        } else {
            z = 0.5 * (1.0 + 2.0 * m[8] - tr).sqrt();
            w = (m[3] - m[1]) / (4.0 * z);
            x = (m[2] + m[6]) / (4.0 * z);
            y = (m[5] + m[7]) / (4.0 * z);
        }
        2.0 * (x * x + y * y + z * z).sqrt().atan2(w.abs())
    }

    fn rot_velocity(a: &[f64; 9], b: &[f64; 9], fps_over_gap: f64) -> [f64; 3] {
        if a == b {
            return [0.0; 3];
        }
        // d = b aᵀ
        let mut d = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    d[r * 3 + c] += b[r * 3 + k] * a[c * 3 + k];
                }
            }
        }
        let theta = trace_angle(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], &d);
        let f = if theta < 1e-12 {
            0.5
        } else {
            theta / (2.0 * theta.sin())
        };
        [
            (d[7] - d[5]) * f * fps_over_gap,
            (d[2] - d[6]) * f * fps_over_gap,
            (d[3] - d[1]) * f * fps_over_gap,
        ]
    }

    pub struct Series {
        pub num_collisions: Vec<f64>,
        pub edges: Vec<[f64; 4]>,
        pub height: Vec<f64>,
        pub speed: Vec<f64>,
        pub pseudo_cost: Vec<f64>,
        pub speed_smooth: Vec<f64>,
        pub traj_smooth: Vec<f64>,
        pub rel_angle: Vec<f64>,
        pub offset: Vec<[f64; 3]>,
    }

    pub fn series(traj: &Trajectory, eps_disp: f64) -> Series {
        let n = traj.frames.len();
        let fps = traj.scene.fps as f64;
        let tb = traj.scene.table;
        let mut s = Series {
            num_collisions: vec![],
            edges: vec![],
            height: vec![],
            speed: vec![],
            pseudo_cost: vec![],
            speed_smooth: vec![],
            traj_smooth: vec![],
            rel_angle: vec![],
            offset: vec![],
        };

        let mut lin = vec![[0.0; 3]; n];
        let mut ang = vec![[0.0; 3]; n];
        for t in 0..n {
            let lo = if t == 0 { 0 } else { t - 1 };
            let hi = if t + 1 == n { t } else { t + 1 };
            let k = fps / (hi - lo) as f64;
            let f = &traj.frames[t];
            lin[t] = match f.eef_lin_vel {
                Some(v) if traj.frames.iter().all(|g| g.eef_lin_vel.is_some()) => v,
                _ => {
                    let d = diff3(traj.frames[hi].eef_pos, traj.frames[lo].eef_pos);
                    [d[0] * k, d[1] * k, d[2] * k]
                }
            };
            ang[t] = match f.eef_ang_vel {
                Some(v) if traj.frames.iter().all(|g| g.eef_ang_vel.is_some()) => v,
                _ => rot_velocity(&traj.frames[lo].eef_rot, &traj.frames[hi].eef_rot, k),
            };
        }

        let mut cost = 0.0;
        let mut acc_total = 0.0;
        let mut angle_total = 0.0;
        for t in 0..n {
            let f = &traj.frames[t];
            let mut count = 0.0;
            for c in &f.contacts {
                let finger = c.first() == FINGER_LEFT || c.first() == FINGER_RIGHT;
                let grasp = finger && c.second() == TARGET_CAN
                    || c.first() == TARGET_CAN
                        && (c.second() == FINGER_LEFT || c.second() == FINGER_RIGHT);
                if !grasp {
                    count += 1.0;
                }
            }
            s.num_collisions.push(count);
            let (cp, cr) = can(traj, t);
            s.edges.push([
                (cp[0] - tb.x_min).abs(),
                (tb.x_max - cp[0]).abs(),
                (cp[1] - tb.y_min).abs(),
                (tb.y_max - cp[1]).abs(),
            ]);
            s.height.push(if cp[2] > tb.surface_z {
                cp[2] - tb.surface_z
            } else {
                0.0
            });
            s.rel_angle.push(trace_angle(&f.eef_rot, &cr));
            s.offset.push(diff3(cp, f.eef_pos));

            if t == 0 {
                s.speed.push(0.0);
            } else {
                s.speed
                    .push(len3(diff3(f.eef_pos, traj.frames[t - 1].eef_pos)) * fps);
                for j in 0..f.joint_angles.len() {
                    cost += (f.joint_angles[j] - traj.frames[t - 1].joint_angles[j]).abs();
                }
            }
            s.pseudo_cost.push(cost);

            let lo = if t == 0 { 0 } else { t - 1 };
            let hi = if t + 1 == n { t } else { t + 1 };
            let k = fps / (hi - lo) as f64;
            let mut a2 = 0.0;
            for i in 0..3 {
                a2 += ((lin[hi][i] - lin[lo][i]) * k).powi(2);
                a2 += ((ang[hi][i] - ang[lo][i]) * k).powi(2);
            }
            acc_total += a2.sqrt();
            s.speed_smooth
                .push(if t == 0 { 0.0 } else { acc_total / t as f64 });

            if t >= 1 && t + 1 < n {
                let x0 = diff3(traj.frames[t].eef_pos, traj.frames[t - 1].eef_pos);
                let x1 = diff3(traj.frames[t + 1].eef_pos, traj.frames[t].eef_pos);
                let (l0, l1) = (len3(x0), len3(x1));
                if l0 >= eps_disp && l1 >= eps_disp {
                    let cos = (x0[0] * x1[0] + x0[1] * x1[1] + x0[2] * x1[2]) / (l0 * l1);
                    angle_total += cos.clamp(-1.0, 1.0).acos();
                }
            }
            s.traj_smooth
                .push(if t == 0 { 0.0 } else { angle_total / t as f64 });
        }
        s
    }

    pub fn events(traj: &Trajectory, lift: f64) -> (usize, usize, usize) {
        let n = traj.frames.len();
        let mut reach = None;
        let mut grip = None;
        let mut release = None;
        let z0 = traj.frames[0].object_poses[TARGET_CAN].pos[2];
        for t in 0..n {
            let f = &traj.frames[t];
            let mut left = false;
            let mut right = false;
            for c in &f.contacts {
                if c.first() == FINGER_LEFT && c.second() == TARGET_CAN {
                    left = true;
                }
                if c.first() == FINGER_RIGHT && c.second() == TARGET_CAN {
                    right = true;
                }
            }
            if reach.is_none() && (left || right) {
                reach = Some(t);
            }
            if reach.is_some()
                && grip.is_none()
                && left
                && right
                && f.object_poses[TARGET_CAN].pos[2] - z0 > lift
            {
                grip = Some(t);
            } else if grip.is_some() && release.is_none() && !left && !right {
                release = Some(t);
            }
        }
        (reach.unwrap(), grip.unwrap(), release.unwrap())
    }

    pub fn vector(traj: &Trajectory, s: &Series, ev: (usize, usize, usize)) -> [f64; 17] {
        let n = traj.frames.len();
        let last = n - 1;
        let fps = traj.scene.fps as f64;
        let (_, g, r) = ev;
        let mut out = [0.0; 17];
        out[0] = s.num_collisions.iter().cloned().fold(f64::MIN, f64::max);
        out[1] = s
            .edges
            .iter()
            .flat_map(|e| e.iter().cloned())
            .fold(f64::MAX, f64::min);
        out[2] = s.height.iter().cloned().fold(f64::MIN, f64::max);
        out[3] = traj
            .frames
            .iter()
            .map(|f| f.eef_force)
            .fold(f64::MIN, f64::max);
        let mut speed_sum = 0.0;
        for t in 1..n {
            speed_sum += s.speed[t];
        }
        out[4] = speed_sum / last as f64;
        for t in 1..=g {
            out[5] += len3(diff3(traj.frames[t].eef_pos, traj.frames[t - 1].eef_pos));
        }
        for t in g + 1..=r {
            out[6] += len3(diff3(traj.frames[t].eef_pos, traj.frames[t - 1].eef_pos));
            out[7] += len3(diff3(can(traj, t).0, can(traj, t - 1).0));
        }
        out[8] = g as f64 / fps;
        out[9] = (r - g) as f64 / fps;
        out[10] = (r - g) as f64 / fps;
        out[11] = last as f64 / fps;
        out[12] = s.pseudo_cost[last];
        out[13] = s.speed_smooth[last];
        out[14] = s.traj_smooth[last];
        out[15] = (g..=r).map(|t| s.rel_angle[t]).fold(f64::MIN, f64::max);
        out[16] = (g..=r).map(|t| len3(s.offset[t])).fold(f64::MIN, f64::max);
        out
    }

    /// All per-step channels in the library's channel order.
    pub fn channels(traj: &Trajectory, s: &Series) -> Vec<Vec<f64>> {
        let eef = |i: usize| {
            traj.frames
                .iter()
                .map(|f| f.eef_pos[i])
                .collect::<Vec<f64>>()
        };
        let canp = |i: usize| {
            (0..traj.frames.len())
                .map(|t| can(traj, t).0[i])
                .collect::<Vec<f64>>()
        };
        let edge = |i: usize| s.edges.iter().map(|e| e[i]).collect::<Vec<f64>>();
        let off = |i: usize| s.offset.iter().map(|o| o[i]).collect::<Vec<f64>>();
        vec![
            s.num_collisions.clone(),
            edge(0),
            edge(1),
            edge(2),
            edge(3),
            s.height.clone(),
            traj.frames.iter().map(|f| f.eef_force).collect(),
            s.speed.clone(),
            eef(0),
            eef(1),
            eef(2),
            canp(0),
            canp(1),
            canp(2),
            s.pseudo_cost.clone(),
            s.speed_smooth.clone(),
            s.traj_smooth.clone(),
            s.rel_angle.clone(),
            off(0),
            off(1),
            off(2),
        ]
    }
}
