//! Reachable-region sampling for the arm.

use super::{JointAngles, Manipulator, ToolOffset};
use serde::Serialize;

/// Named point (mm) to test for reachability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyPoint {
    pub label: String,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyPointCheck {
    pub label: String,
    pub position: [f64; 3],
    pub inside: bool,
}

/// One boundary curve of the planar region swept by the wrist (end of
/// link 3 plus the base offset), as `(r, z)` pairs in mm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkspaceCurve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkspaceSummary {
    /// Shortest shoulder-to-wrist distance of links 2 and 3, mm.
    pub r_min: f64,
    /// Longest shoulder-to-wrist distance of links 2 and 3, mm.
    pub r_max: f64,
    /// Smallest horizontal tool radius over the sampled configurations, mm.
    pub full_chain_r_min: f64,
    /// Largest horizontal tool radius over the sampled configurations, mm.
    pub full_chain_r_max: f64,
    pub boundary: Vec<WorkspaceCurve>,
    /// Wrist points `[x, y, z]` in mm.
    pub cloud: Vec<[f64; 3]>,
    pub key_points: Vec<KeyPointCheck>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceOptions {
    /// Grid step for θ2/θ3 in the planar sweep, rad.
    pub resolution: f64,
    /// Grid step for θ2/θ3 in the 3D cloud, rad.
    pub cloud_resolution: f64,
    /// Base-yaw step for the 3D cloud, rad.
    pub yaw_step: f64,
    pub tool: ToolOffset,
    pub key_points: Vec<KeyPoint>,
}

impl Default for WorkspaceOptions {
    fn default() -> Self {
        Self {
            resolution: 0.5f64.to_radians(),
            cloud_resolution: 5f64.to_radians(),
            yaw_step: 15f64.to_radians(),
            tool: ToolOffset::default(),
            key_points: Vec::new(),
        }
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| if k == n { hi } else { lo + k as f64 * step })
        .collect()
}

impl Manipulator {
    fn wrist(&self, t2: f64, t3: f64) -> (f64, f64) {
        let (s2, c2) = t2.sin_cos();
        let (s3, c3) = t3.sin_cos();
        (
            self.dh.a(1) + self.dh.a(2) * c2 + self.dh.a(3) * c3,
            self.dh.d1() + self.dh.a(2) * s2 + self.dh.a(3) * s3,
        )
    }

    fn shoulder_distance(&self, t2: f64, t3: f64) -> f64 {
        let (a2, a3) = (self.dh.a(2), self.dh.a(3));
        (a2 * a2 + a3 * a3 + 2.0 * a2 * a3 * (t2 - t3).cos()).sqrt()
    }

    /// Admissible `(θ2, θ3)` pairs: the rectangular grid plus both
    /// interior-angle edge curves, so the extremes are sampled exactly.
    fn planar_samples(&self, step: f64) -> Vec<(f64, f64)> {
        let l = &self.limits;
        let probe = |t2: f64, t3: f64| l.contains(&JointAngles::new(0.0, t2, t3, l.max[3]));
        let mut out = Vec::new();
        let t2s = grid(l.min[1], l.max[1], step);
        for &t2 in &t2s {
            for t3 in grid(l.min[2], l.max[2], step) {
                if probe(t2, t3) {
                    out.push((t2, t3));
                }
            }
            for gap in [
                std::f64::consts::PI - l.interior_min,
                std::f64::consts::PI - l.interior_max,
            ] {
                let t3 = t2 - gap;
                if probe(t2, t3) {
                    out.push((t2, t3));
                }
            }
        }
        out
    }

    pub fn workspace_analysis(&self, resolution: f64) -> WorkspaceSummary {
        self.workspace_analysis_with(&WorkspaceOptions {
            resolution,
            ..WorkspaceOptions::default()
        })
    }

    pub fn workspace_analysis_with(&self, opts: &WorkspaceOptions) -> WorkspaceSummary {
        let l = self.limits;
        let samples = self.planar_samples(opts.resolution);
        let mut r_min = f64::INFINITY;
        let mut r_max = f64::NEG_INFINITY;
        let mut full_min = f64::INFINITY;
        let mut full_max = f64::NEG_INFINITY;
        let t4s = grid(l.min[3], l.max[3], opts.resolution.max(1f64.to_radians()));
        for &(t2, t3) in &samples {
            let d = self.shoulder_distance(t2, t3);
            r_min = r_min.min(d);
            r_max = r_max.max(d);
            for &t4 in &t4s {
                let (r, _) = self.planar_tool(&JointAngles::new(0.0, t2, t3, t4), opts.tool);
                full_min = full_min.min(r);
                full_max = full_max.max(r);
            }
        }

        let admissible = |t2: f64, t3: f64| l.contains(&JointAngles::new(0.0, t2, t3, l.max[3]));
        let curve = |name: &str, pairs: Vec<(f64, f64)>| WorkspaceCurve {
            name: name.to_string(),
            points: pairs
                .into_iter()
                .filter(|&(a, b)| admissible(a, b))
                .map(|(a, b)| self.wrist(a, b))
                .collect(),
        };
        let t3s = grid(l.min[2], l.max[2], opts.resolution);
        let t2s = grid(l.min[1], l.max[1], opts.resolution);
        let pi = std::f64::consts::PI;
        let boundary = vec![
            curve("theta2_max", t3s.iter().map(|&t3| (l.max[1], t3)).collect()),
            curve("theta2_min", t3s.iter().map(|&t3| (l.min[1], t3)).collect()),
            curve(
                "interior_min",
                t2s.iter()
                    .map(|&t2| (t2, t2 - (pi - l.interior_min)))
                    .collect(),
            ),
            curve(
                "interior_max",
                t2s.iter()
                    .map(|&t2| (t2, t2 - (pi - l.interior_max)))
                    .collect(),
            ),
        ];

        let mut cloud = Vec::new();
        let yaws = grid(l.min[0], l.max[0], opts.yaw_step);
        let coarse = self.planar_samples(opts.cloud_resolution);
        for &yaw in &yaws[..yaws.len() - 1] {
            let (s1, c1) = yaw.sin_cos();
            for &(t2, t3) in &coarse {
                let (r, z) = self.wrist(t2, t3);
                cloud.push([r * c1, r * s1, z]);
            }
        }

        let key_points = opts
            .key_points
            .iter()
            .map(|k| KeyPointCheck {
                label: k.label.clone(),
                position: k.position,
                inside: self.reaches(
                    k.position[0],
                    k.position[1],
                    k.position[2],
                    opts.tool,
                    1f64.to_radians(),
                ),
            })
            .collect();

        WorkspaceSummary {
            r_min,
            r_max,
            full_chain_r_min: full_min,
            full_chain_r_max: full_max,
            boundary,
            cloud,
            key_points,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_follow_law_of_cosines() {
        let arm = Manipulator::default();
        let w = arm.workspace_analysis(1f64.to_radians());
        let law = |gamma: f64| (1000f64.powi(2) + 1700f64.powi(2) - 2.0 * 1000.0 * 1700.0 * gamma.to_radians().cos()).sqrt();
        assert!((w.r_min - law(30.0)).abs() < 1e-9);
        assert!((w.r_max - law(165.0)).abs() < 1e-9);
        assert!(w.r_min < w.r_max);
        assert!(w.r_max < 2700.0);
    }

    #[test]
    fn cloud_respects_limits() {
        let arm = Manipulator::default();
        let w = arm.workspace_analysis(2f64.to_radians());
        assert!(!w.cloud.is_empty());
        for c in &w.boundary {
            assert!(!c.points.is_empty(), "{} empty", c.name);
        }
        // Every cloud point has a shoulder distance inside the radii.
        for p in &w.cloud {
            let r = p[0].hypot(p[1]) - 100.0;
            let d = r.hypot(p[2] - 185.0);
            assert!(d >= w.r_min - 1e-6 && d <= w.r_max + 1e-6);
        }
    }

    #[test]
    fn key_points_are_classified() {
        let arm = Manipulator::default();
        let opts = WorkspaceOptions {
            key_points: vec![
                KeyPoint {
                    label: "near".into(),
                    position: [1980.0, 0.0, 1185.0],
                },
                KeyPoint {
                    label: "far".into(),
                    position: [6000.0, 0.0, 0.0],
                },
            ],
            ..WorkspaceOptions::default()
        };
        let w = arm.workspace_analysis_with(&opts);
        assert!(w.key_points[0].inside);
        assert!(!w.key_points[1].inside);
    }
}
