//! The potential kernel `a(x)` of the simple random walk on Z² and the weight
//! functions built from its second differences.
//!
//! The table is obtained by relaxing the defining linear system
//! `a(x) = (1/4) Σ_{y~x} a(y) - 1{x = 0}` on a disk, with the boundary pinned
//! to the four-term asymptotic expansion. Relaxation is run with every disk
//! vertex free (origin included) and the result is shifted so that `a(0) = 0`;
//! constants are harmonic, so the shift leaves every residual untouched.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::{arg_of, in_ball, Label, Vertex};

/// Euler–Mascheroni constant to 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Extra rings solved beyond the returned window.
pub const BOUNDARY_PAD: i32 = 3;

/// Target interior residual.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 200_000;

/// The constant term `λ = (2γ + ln 8) / π` of the kernel expansion.
pub fn lambda() -> f64 {
    (2.0 * EULER_GAMMA + 8f64.ln()) / PI
}

/// `(2/π) ln|v| + λ - cos(4 arg v) / (6π |v|²)`.
pub fn kernel_asymptotic(v: Vertex) -> Result<f64> {
    let theta = arg_of(v)?;
    let n2 = v.norm_sq() as f64;
    Ok(n2.ln() / PI + lambda() - (4.0 * theta).cos() / (6.0 * PI * n2))
}

/// Exact kernel values on the disk `|x| <= radius + 2`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    radius: u32,
    half: i32,
    side: usize,
    values: Vec<f64>,
    tol: f64,
    sweeps: usize,
}

/// Build a kernel table of the given radius (at least 8).
pub fn build_kernel(radius: u32) -> Result<KernelTable> {
    KernelTable::build(radius)
}

impl KernelTable {
    pub fn build(radius: u32) -> Result<Self> {
        if radius < 8 {
            return Err(Error::Parameter(format!("kernel radius must be >= 8, got {radius}")));
        }
        let window = radius as i32 + 2;
        let solve_r = window + BOUNDARY_PAD;
        let half = solve_r + 1;
        let side = (2 * half + 1) as usize;
        let at = |x: i32, y: i32| ((y + half) as usize) * side + (x + half) as usize;
        let inside = |x: i32, y: i32| {
            let n2 = (x as i64) * (x as i64) + (y as i64) * (y as i64);
            n2 <= (solve_r as i64) * (solve_r as i64)
        };

        let mut a = vec![0.0f64; side * side];
        let mut red = Vec::new();
        let mut black = Vec::new();
        for y in -half..=half {
            for x in -half..=half {
                let v = Vertex::new(x, y);
                if !v.is_origin() {
                    a[at(x, y)] = kernel_asymptotic(v)?;
                }
                if inside(x, y) {
                    if (x + y).rem_euclid(2) == 0 {
                        red.push(at(x, y));
                    } else {
                        black.push(at(x, y));
                    }
                }
            }
        }
        let origin = at(0, 0);
        let n = (2 * solve_r + 1) as f64;
        let omega = 2.0 / (1.0 + (PI / (n + 1.0)).sin());

        let residual = |a: &[f64]| {
            red.iter()
                .chain(black.iter())
                .map(|&i| {
                    let src = if i == origin { 1.0 } else { 0.0 };
                    (a[i] + src - 0.25 * (a[i - 1] + a[i + 1] + a[i - side] + a[i + side])).abs()
                })
                .fold(0.0, f64::max)
        };

        let target = 0.5 * DEFAULT_TOL;
        let mut sweeps = 0;
        let mut res = residual(&a);
        while res > target {
            if sweeps >= MAX_SWEEPS {
                return Err(Error::KernelNotConverged { residual: res, sweeps });
            }
            for _ in 0..25 {
                for cells in [&red, &black] {
                    for &i in cells.iter() {
                        let src = if i == origin { 1.0 } else { 0.0 };
                        let gs = 0.25 * (a[i - 1] + a[i + 1] + a[i - side] + a[i + side]) - src;
                        a[i] += omega * (gs - a[i]);
                    }
                }
            }
            sweeps += 25;
            res = residual(&a);
        }

        let shift = a[origin];
        for v in a.iter_mut() {
            *v -= shift;
        }

        // Restrict to |x| <= radius + 2.
        let out_half = window;
        let out_side = (2 * out_half + 1) as usize;
        let mut values = vec![f64::NAN; out_side * out_side];
        for y in -out_half..=out_half {
            for x in -out_half..=out_half {
                if (x as i64) * (x as i64) + (y as i64) * (y as i64) <= (window as i64) * (window as i64) {
                    values[((y + out_half) as usize) * out_side + (x + out_half) as usize] = a[at(x, y)];
                }
            }
        }
        values[(out_half as usize) * out_side + out_half as usize] = 0.0;

        let mut table = KernelTable { radius, half: out_half, side: out_side, values, tol: 0.0, sweeps };
        table.tol = table.max_interior_residual();
        Ok(table)
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Largest interior residual, measured after construction.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Window radius `radius + 2`.
    pub fn window(&self) -> i32 {
        self.half
    }

    pub fn contains(&self, v: Vertex) -> bool {
        let w = self.half as i64;
        v.norm_sq() <= w * w
    }

    fn index(&self, v: Vertex) -> usize {
        ((v.y + self.half) as usize) * self.side + (v.x + self.half) as usize
    }

    /// `a(v)`; errors outside the window.
    pub fn value(&self, v: Vertex) -> Result<f64> {
        if self.contains(v) {
            Ok(self.values[self.index(v)])
        } else {
            Err(Error::OutOfWindow(v))
        }
    }

    /// Unchecked lookup for hot loops; callers guarantee `contains(v)`.
    #[inline]
    pub fn value_unchecked(&self, v: Vertex) -> f64 {
        debug_assert!(self.contains(v));
        self.values[self.index(v)]
    }

    /// Window vertices whose four neighbors are also in the window.
    pub fn interior(&self) -> impl Iterator<Item = Vertex> + '_ {
        let h = self.half;
        (-h..=h)
            .flat_map(move |y| (-h..=h).map(move |x| Vertex::new(x, y)))
            .filter(move |&v| crate::lattice::neighbors(v).iter().all(|&u| self.contains(u)) && self.contains(v))
    }

    /// `|a(x) + 1{x=0} - (1/4) Σ_{y~x} a(y)|` at an interior vertex.
    pub fn residual_at(&self, v: Vertex) -> Result<f64> {
        let mut s = 0.0;
        for u in crate::lattice::neighbors(v) {
            s += self.value(u)?;
        }
        let src = if v.is_origin() { 1.0 } else { 0.0 };
        Ok((self.value(v)? + src - 0.25 * s).abs())
    }

    pub fn max_interior_residual(&self) -> f64 {
        self.interior().map(|v| self.residual_at(v).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    /// `f_H(v) = (a(v+e2) + a(v-e2) - 2a(v)) / 4`.
    pub fn weight_h(&self, v: Vertex) -> Result<f64> {
        let up = self.value(v + Vertex::new(0, 1))?;
        let down = self.value(v - Vertex::new(0, 1))?;
        Ok((up + down - 2.0 * self.value(v)?) / 4.0)
    }

    /// `f_V(v) = (a(v+e1) + a(v-e1) - 2a(v)) / 4`.
    pub fn weight_v(&self, v: Vertex) -> Result<f64> {
        let right = self.value(v + Vertex::new(1, 0))?;
        let left = self.value(v - Vertex::new(1, 0))?;
        Ok((right + left - 2.0 * self.value(v)?) / 4.0)
    }

    pub fn weight(&self, v: Vertex, label: Label) -> Result<f64> {
        match label {
            Label::H => self.weight_h(v),
            Label::V => self.weight_v(v),
        }
    }

    /// `f(v) = max(|f_H(v)|, |f_V(v)|)`.
    pub fn weight_max(&self, v: Vertex) -> Result<f64> {
        Ok(self.weight_h(v)?.abs().max(self.weight_v(v)?.abs()))
    }

    /// `Σ_{x ∈ B_{r+1}} f(x)`.
    pub fn weight_ball_sum(&self, r: u32) -> Result<f64> {
        self.sum_over_ball(r, |v| self.weight_max(v))
    }

    /// `Σ_{x ∈ B_{r+1}} (f_H(x) + f_V(x)) / 2`, the expected initial weight
    /// under independent uniform labels.
    pub fn iud_weight_sum(&self, r: u32) -> Result<f64> {
        self.sum_over_ball(r, |v| Ok(0.5 * (self.weight_h(v)? + self.weight_v(v)?)))
    }

    /// `max_{x ∈ B_{r+1}} a(x)`.
    pub fn max_over_ball(&self, r: u32) -> Result<f64> {
        let rr = r as f64 + 1.0;
        let mut best = 0.0f64;
        for v in crate::lattice::ball(rr) {
            best = best.max(self.value(v)?);
        }
        Ok(best)
    }

    fn sum_over_ball(&self, r: u32, f: impl Fn(Vertex) -> Result<f64>) -> Result<f64> {
        let rr = r as f64 + 1.0;
        let m = r as i32 + 1;
        let mut s = 0.0;
        for y in -m..=m {
            for x in -m..=m {
                let v = Vertex::new(x, y);
                if in_ball(v, rr) {
                    s += f(v)?;
                }
            }
        }
        Ok(s)
    }

    /// Dump `x,y,a` rows for every window vertex.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,a")?;
        let h = self.half;
        for y in -h..=h {
            for x in -h..=h {
                let v = Vertex::new(x, y);
                if self.contains(v) {
                    writeln!(out, "{},{},{:.15e}", x, y, self.value_unchecked(v))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ORIGIN;
    use std::sync::OnceLock;

    fn table() -> &'static KernelTable {
        static T: OnceLock<KernelTable> = OnceLock::new();
        T.get_or_init(|| build_kernel(40).unwrap())
    }

    #[test]
    fn lambda_value() {
        // (2 * 0.5772157 + ln 8) / π
        assert!((lambda() - 1.029_374).abs() < 1e-6, "{}", lambda());
    }

    #[test]
    fn asymptotic_on_axis() {
        let v = Vertex::new(100, 0);
        let expect = 2.0 / PI * 100f64.ln() + lambda() - 1.0 / (6.0 * PI * 1e4);
        assert!((kernel_asymptotic(v).unwrap() - expect).abs() < 1e-14);
        assert!(kernel_asymptotic(ORIGIN).is_err());
    }

    #[test]
    fn small_radius_rejected() {
        assert!(matches!(build_kernel(7), Err(Error::Parameter(_))));
    }

    #[test]
    fn known_values() {
        let t = table();
        assert_eq!(t.value(ORIGIN).unwrap(), 0.0);
        assert!((t.value(Vertex::new(1, 0)).unwrap() - 1.0).abs() < 1e-6);
        assert!((t.value(Vertex::new(1, 1)).unwrap() - 4.0 / PI).abs() < 1e-5);
        assert!((t.value(Vertex::new(2, 0)).unwrap() - (4.0 - 8.0 / PI)).abs() < 1e-5);
    }

    #[test]
    fn residual_and_symmetry() {
        let t = table();
        assert!(t.tol() <= DEFAULT_TOL);
        let w = t.window();
        for x in -w..=w {
            for y in -w..=w {
                let v = Vertex::new(x, y);
                if !t.contains(v) {
                    continue;
                }
                let a = t.value(v).unwrap();
                assert!(a >= 0.0);
                assert!((a - t.value(Vertex::new(y, x)).unwrap()).abs() <= 2.0 * t.tol());
                assert!((a - t.value(Vertex::new(-x, y)).unwrap()).abs() <= 2.0 * t.tol());
            }
        }
    }

    #[test]
    fn axis_growth() {
        let t = table();
        for k in 0..t.radius() as i32 {
            assert!(t.value(Vertex::new(k + 1, 0)).unwrap() > t.value(Vertex::new(k, 0)).unwrap());
        }
    }

    #[test]
    fn weights_sum_to_origin_indicator() {
        let t = table();
        assert!((t.weight_h(ORIGIN).unwrap() - 0.5).abs() < 1e-6);
        assert!((t.weight_max(ORIGIN).unwrap() - 0.5).abs() < 1e-6);
        for v in t.interior().collect::<Vec<_>>() {
            let s = t.weight_h(v).unwrap() + t.weight_v(v).unwrap();
            let ind = if v.is_origin() { 1.0 } else { 0.0 };
            assert!((s - ind).abs() <= 4.0 * t.tol(), "{v}: {s}");
        }
    }

    #[test]
    fn weight_far_field() {
        let t = table();
        let w = t.weight_h(Vertex::new(20, 0)).unwrap();
        let approx = 1.0 / (2.0 * PI * 400.0);
        assert!((w - approx).abs() < 0.2 * approx, "{w} vs {approx}");
    }

    #[test]
    fn out_of_window() {
        let t = table();
        assert!(matches!(t.value(Vertex::new(43, 0)), Err(Error::OutOfWindow(_))));
        assert!(t.weight_h(Vertex::new(0, 42)).is_err());
        assert!(t.weight_ball_sum(41).is_err());
    }

    #[test]
    fn iud_sum_is_half() {
        let t = table();
        assert!((t.iud_weight_sum(1).unwrap() - 0.5).abs() <= t.tol() + 1e-15);
        for r in [5u32, 20] {
            let n = crate::lattice::ball(r as f64 + 1.0).len() as f64;
            assert!((t.iud_weight_sum(r).unwrap() - 0.5).abs() <= n * 2.0 * t.tol());
        }
    }

    #[test]
    fn ball_sums_nondecreasing() {
        let t = table();
        let mut prev = 0.0;
        for r in 1..=30 {
            let s = t.weight_ball_sum(r).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn csv_dump_has_header() {
        let t = build_kernel(8).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,y,a\n"));
        assert!(s.contains("\n0,0,0.000000000000000e0\n"));
    }
}
