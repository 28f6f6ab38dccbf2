//! Deterministic low-discrepancy point streams.
//!
//! Points come from the additive recurrence `uᵢ = frac(s + i·α)` with
//! `αⱼ = φ_d^{-(j+1)}`, where `φ_d` is the unique positive root of
//! `x^{d+1} = x + 1`. The shift `s` is derived from `(seed, stream)` with
//! SplitMix64, so every (seed, stream) pair gives a reproducible sequence.

/// SplitMix64 finalizer.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

fn generalized_golden(dim: usize) -> f64 {
    let d = dim as i32 + 1;
    let mut x = 2.0_f64;
    for _ in 0..64 {
        let f = x.powi(d) - x - 1.0;
        let df = d as f64 * x.powi(d - 1) - 1.0;
        let next = x - f / df;
        if (next - x).abs() < 1e-16 {
            break;
        }
        x = next;
    }
    x
}

#[derive(Debug, Clone)]
pub struct LowDiscrepancy {
    alpha: Vec<f64>,
    shift: Vec<f64>,
    index: u64,
}

impl LowDiscrepancy {
    pub fn new(dim: usize, seed: u64, stream: u64) -> Self {
        let phi = generalized_golden(dim.max(1));
        let alpha: Vec<f64> = (0..dim).map(|j| phi.powi(-(j as i32 + 1)).fract()).collect();
        let base = splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5EED)));
        let shift = (0..dim as u64).map(|j| unit_from_bits(splitmix64(base.wrapping_add(j)))).collect();
        LowDiscrepancy { alpha, shift, index: 0 }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Next point of `[0, 1)^dim`.
    pub fn next_point(&mut self, out: &mut [f64]) {
        self.index += 1;
        let i = self.index as f64;
        for ((o, a), s) in out.iter_mut().zip(&self.alpha).zip(&self.shift) {
            *o = (s + a * i).fract();
        }
    }
}

/// Maps `u ∈ [0,1)ⁿ` to the closed unit ball, radially from the cube.
pub(crate) fn cube_to_ball(u: &[f64], out: &mut [f64]) {
    let mut inf = 0.0_f64;
    let mut two = 0.0_f64;
    for (o, &v) in out.iter_mut().zip(u) {
        *o = 2.0 * v - 1.0;
        inf = inf.max(o.abs());
        two += *o * *o;
    }
    let two = two.sqrt();
    if two > 0.0 {
        let s = inf / two;
        for o in out.iter_mut() {
            *o *= s;
        }
    }
}

/// Maps `u ∈ [0,1)ⁿ` to a unit vector (1-D: `±1`).
pub(crate) fn cube_to_sphere(u: &[f64], out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if u[0] < 0.5 { -1.0 } else { 1.0 };
        return;
    }
    cube_to_ball(u, out);
    let n = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
    } else {
        out.iter_mut().for_each(|v| *v /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_in_one_dimension() {
        assert!((generalized_golden(1) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = LowDiscrepancy::new(3, 7, 2);
        let mut b = LowDiscrepancy::new(3, 7, 2);
        let mut c = LowDiscrepancy::new(3, 8, 2);
        let (mut pa, mut pb, mut pc) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        let mut differs = false;
        for _ in 0..100 {
            a.next_point(&mut pa);
            b.next_point(&mut pb);
            c.next_point(&mut pc);
            assert_eq!(pa, pb);
            differs |= pa != pc;
        }
        assert!(differs);
    }

    #[test]
    fn one_dimensional_stream_fills_bins_evenly() {
        let mut g = LowDiscrepancy::new(1, 0, 0);
        let mut bins = [0usize; 16];
        let mut p = [0.0];
        for _ in 0..1600 {
            g.next_point(&mut p);
            bins[(p[0] * 16.0) as usize] += 1;
        }
        assert!(bins.iter().all(|&b| (95..=105).contains(&b)), "{bins:?}");
    }

    #[test]
    fn ball_and_sphere_maps() {
        let mut g = LowDiscrepancy::new(2, 1, 0);
        let (mut u, mut b, mut s) = ([0.0; 2], [0.0; 2], [0.0; 2]);
        for _ in 0..500 {
            g.next_point(&mut u);
            cube_to_ball(&u, &mut b);
            assert!(b[0].hypot(b[1]) <= 1.0 + 1e-12);
            cube_to_sphere(&u, &mut s);
            assert!((s[0].hypot(s[1]) - 1.0).abs() < 1e-12);
        }
    }
}
