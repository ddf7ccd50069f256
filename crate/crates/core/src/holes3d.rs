//! Statistical model of a 3D lattice with randomly sprinkled holes:
//! chain-length histograms per tube and the aggregate doublon measurement
//! signal summed over all tubes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hole-sprinkling mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SprinkleMode {
    /// Each site occupied independently with probability `filling`.
    Iid,
    /// Exactly `round(filling * L^3)` occupied sites, uniformly placed.
    ExactCount,
}

/// Tube direction through the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Boolean occupancy of an `L x L x L` lattice.
#[derive(Debug, Clone)]
pub struct Occupancy3D {
    edge: usize,
    occupied: Vec<bool>,
    pub filling: f64,
    pub seed: u64,
}

impl Occupancy3D {
    pub fn edge(&self) -> usize {
        self.edge
    }

    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.edge + y) * self.edge + z
    }

    pub fn is_occupied(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupied[self.index(x, y, z)]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Plain-text slice dump (one z-plane per block) for debugging.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for z in 0..self.edge {
            out.push_str(&format!("# z = {z}\n"));
            for x in 0..self.edge {
                for y in 0..self.edge {
                    out.push(if self.is_occupied(x, y, z) { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Randomly sprinkles holes to the requested filling fraction.
pub fn sprinkle(edge: usize, filling: f64, seed: u64, mode: SprinkleMode) -> Result<Occupancy3D> {
    if !(0.0..=1.0).contains(&filling) {
        return Err(Error::InvalidParameter(format!(
            "filling must lie in [0, 1], got {filling}"
        )));
    }
    if edge == 0 {
        return Err(Error::InvalidParameter("edge must be positive".into()));
    }
    let n = edge * edge * edge;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let occupied = match mode {
        SprinkleMode::Iid => (0..n).map(|_| rng.gen::<f64>() < filling).collect(),
        SprinkleMode::ExactCount => {
            let count = (filling * n as f64).round() as usize;
            let mut occ = vec![false; n];
            for idx in rand::seq::index::sample(&mut rng, n, count) {
                occ[idx] = true;
            }
            occ
        }
    };
    Ok(Occupancy3D {
        edge,
        occupied,
        filling,
        seed,
    })
}

/// Histogram of usable chain lengths: `m_l` counts the tubes whose first `l`
/// sites from the starting edge are occupied before the first hole
/// (`l = L` for hole-free tubes). One entry per tube: `sum_l m_l = L^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthHistogram {
    pub counts: Vec<u64>,
}

impl LengthHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sites covered by the longest bin.
    pub fn max_length(&self) -> usize {
        self.counts.len() - 1
    }
}

/// Counts consecutive occupied sites from the starting edge of each of the
/// `L^2` tubes along `direction`.
pub fn length_histogram(occ: &Occupancy3D, direction: Axis) -> LengthHistogram {
    let l = occ.edge();
    let mut counts = vec![0u64; l + 1];
    for a in 0..l {
        for b in 0..l {
            let mut run = 0usize;
            for c in 0..l {
                let (x, y, z) = match direction {
                    Axis::X => (c, a, b),
                    Axis::Y => (a, c, b),
                    Axis::Z => (a, b, c),
                };
                if occ.is_occupied(x, y, z) {
                    run += 1;
                } else {
                    break;
                }
            }
            counts[run] += 1;
        }
    }
    LengthHistogram { counts }
}

/// Assignment of the constant per-length phase offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ThetaAssignment {
    /// theta_r drawn uniformly from [0, 2 pi) per length, equal for all
    /// tubes of that length.
    Random { seed: u64 },
    /// Explicit offsets, indexed by length (must cover 0..=L).
    Explicit(Vec<f64>),
}

/// Aggregate doublon signal over the tube ensemble:
/// `n_d_tot(t) = sum_l m_l * (1/2) [1 - sin(theta_r(l) + delta (l - 1) t)]`.
pub fn aggregate_doublon_signal(
    hist: &LengthHistogram,
    delta: f64,
    times: &[f64],
    theta: &ThetaAssignment,
) -> Result<Vec<f64>> {
    let thetas: Vec<f64> = match theta {
        ThetaAssignment::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..hist.counts.len())
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect()
        }
        ThetaAssignment::Explicit(v) => {
            if v.len() < hist.counts.len() {
                return Err(Error::InvalidParameter(format!(
                    "need {} theta_r values, got {}",
                    hist.counts.len(),
                    v.len()
                )));
            }
            v.clone()
        }
    };
    Ok(times
        .iter()
        .map(|&t| {
            hist.counts
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0)
                .map(|(l, &m)| {
                    m as f64 * 0.5 * (1.0 - (thetas[l] + delta * (l as f64 - 1.0) * t).sin())
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_fillings() {
        let full = sprinkle(4, 1.0, 0, SprinkleMode::Iid).unwrap();
        assert_eq!(full.occupied_count(), 64);
        let empty = sprinkle(4, 0.0, 0, SprinkleMode::Iid).unwrap();
        assert_eq!(empty.occupied_count(), 0);
        // Full lattice: every tube reaches the far edge.
        let hist = length_histogram(&full, Axis::Z);
        assert_eq!(hist.counts[4], 16);
        assert_eq!(hist.counts[..4].iter().sum::<u64>(), 0);
    }

    #[test]
    fn exact_count_hits_requested_occupation() {
        for seed in 0..5 {
            let occ = sprinkle(10, 0.9, seed, SprinkleMode::ExactCount).unwrap();
            assert_eq!(occ.occupied_count(), 900);
        }
    }

    #[test]
    fn iid_occupation_within_binomial_bounds() {
        // Mean occupied fraction over 100 seeds within 3 sigma of binomial.
        let (edge, filling) = (10usize, 0.9f64);
        let n = (edge * edge * edge) as f64;
        let seeds = 100;
        let mut total = 0usize;
        for seed in 0..seeds {
            total += sprinkle(edge, filling, seed, SprinkleMode::Iid)
                .unwrap()
                .occupied_count();
        }
        let mean = total as f64 / seeds as f64;
        let sigma = (n * filling * (1.0 - filling)).sqrt() / (seeds as f64).sqrt();
        assert!(
            (mean - n * filling).abs() < 3.0 * sigma,
            "mean {mean}, expected {}",
            n * filling
        );
    }

    #[test]
    fn histogram_conservation_and_first_site_hole() {
        let occ = sprinkle(8, 0.7, 42, SprinkleMode::Iid).unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let hist = length_histogram(&occ, axis);
            assert_eq!(hist.total(), 64);
        }
        // A tube with a hole at the first site contributes to m_0.
        let mut blocked = sprinkle(3, 1.0, 0, SprinkleMode::Iid).unwrap();
        let idx = blocked.index(0, 0, 0);
        blocked.occupied[idx] = false;
        let hist = length_histogram(&blocked, Axis::Z);
        assert_eq!(hist.counts[0], 1);
        assert_eq!(hist.counts[3], 8);
    }

    #[test]
    fn aggregate_signal_matches_closed_form_points() {
        // Single length l with m_l = 1, theta_r = pi/2: zero at t = 0.
        let hist = LengthHistogram {
            counts: vec![0, 0, 0, 1],
        };
        let thetas = ThetaAssignment::Explicit(vec![0.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        let sig = aggregate_doublon_signal(&hist, 0.3, &[0.0], &thetas).unwrap();
        assert!(sig[0].abs() < 1e-12);
        // Bounds: 0 <= signal <= total tubes.
        let occ = sprinkle(6, 0.85, 7, SprinkleMode::Iid).unwrap();
        let h = length_histogram(&occ, Axis::Z);
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let sig = aggregate_doublon_signal(&h, 0.3, &times, &ThetaAssignment::Random { seed: 3 })
            .unwrap();
        let total = h.total() as f64;
        assert!(sig.iter().all(|&v| (0.0..=total).contains(&v)));
    }

    #[test]
    fn full_filling_gives_single_tone() {
        // Signal at filling 1.0 is a pure sinusoid at delta (L - 1).
        let edge = 10;
        let occ = sprinkle(edge, 1.0, 0, SprinkleMode::Iid).unwrap();
        let hist = length_histogram(&occ, Axis::Z);
        let delta = 0.3;
        let omega = delta * (edge as f64 - 1.0);
        let t_max = 3.0 * std::f64::consts::TAU / omega;
        let times: Vec<f64> = (0..128).map(|k| k as f64 * t_max / 128.0).collect();
        let sig =
            aggregate_doublon_signal(&hist, delta, &times, &ThetaAssignment::Random { seed: 1 })
                .unwrap();
        let est = crate::spectral::extract_detuning(&sig, t_max / 128.0, edge).unwrap();
        assert!((est - delta).abs() < 0.03 * delta, "estimated {est}");
    }

    #[test]
    fn expected_m_l_monotone_in_filling() {
        // E[m_L] strictly increases with filling (Monte Carlo means).
        let edge = 10;
        let mut means = Vec::new();
        for &f in &[0.85, 0.90, 0.95] {
            let mut acc = 0u64;
            for seed in 0..100 {
                let occ = sprinkle(edge, f, seed, SprinkleMode::Iid).unwrap();
                acc += length_histogram(&occ, Axis::Z).counts[edge];
            }
            means.push(acc as f64 / 100.0);
        }
        assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    }
}
