//! Geometry of the square lattice: vertices, unit steps, H/V labels, balls
//! and their outer boundaries.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z².
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

impl Vertex {
    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    pub fn norm_sq(self) -> i64 {
        let (x, y) = (self.x as i64, self.y as i64);
        x * x + y * y
    }

    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn is_origin(self) -> bool {
        self == ORIGIN
    }

    pub fn step(self, d: Direction) -> Vertex {
        self + d.offset()
    }

    /// Direction of the unit step `self -> other`, if they are neighbors.
    pub fn direction_to(self, other: Vertex) -> Option<Direction> {
        Direction::from_offset(other - self)
    }

    pub fn is_neighbor(self, other: Vertex) -> bool {
        self.direction_to(other).is_some()
    }
}

impl Add for Vertex {
    type Output = Vertex;
    fn add(self, o: Vertex) -> Vertex {
        Vertex::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vertex {
    type Output = Vertex;
    fn sub(self, o: Vertex) -> Vertex {
        Vertex::new(self.x - o.x, self.y - o.y)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// The four unit steps, in the canonical order E, W, N, S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    East,
    West,
    North,
    South,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::East, Direction::West, Direction::North, Direction::South];

    pub fn offset(self) -> Vertex {
        match self {
            Direction::East => Vertex::new(1, 0),
            Direction::West => Vertex::new(-1, 0),
            Direction::North => Vertex::new(0, 1),
            Direction::South => Vertex::new(0, -1),
        }
    }

    pub fn from_offset(v: Vertex) -> Option<Direction> {
        match (v.x, v.y) {
            (1, 0) => Some(Direction::East),
            (-1, 0) => Some(Direction::West),
            (0, 1) => Some(Direction::North),
            (0, -1) => Some(Direction::South),
            _ => None,
        }
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Direction {
        Direction::ALL[i & 3]
    }

    pub fn label(self) -> Label {
        match self {
            Direction::East | Direction::West => Label::H,
            Direction::North | Direction::South => Label::V,
        }
    }

    /// Quarter turn counter-clockwise.
    pub fn ccw(self) -> Direction {
        match self {
            Direction::East => Direction::North,
            Direction::North => Direction::West,
            Direction::West => Direction::South,
            Direction::South => Direction::East,
        }
    }

    /// Quarter turn clockwise.
    pub fn cw(self) -> Direction {
        match self {
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
            Direction::North => Direction::East,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Direction::East => 'E',
            Direction::West => 'W',
            Direction::North => 'N',
            Direction::South => 'S',
        }
    }
}

/// Horizontal or vertical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    H,
    V,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::H => Label::V,
            Label::V => Label::H,
        }
    }

    /// The two unit steps carrying this label.
    pub fn directions(self) -> [Direction; 2] {
        match self {
            Label::H => [Direction::East, Direction::West],
            Label::V => [Direction::North, Direction::South],
        }
    }

    /// Canonical representative rotor for a label (East for H, North for V).
    pub fn canonical_direction(self) -> Direction {
        self.directions()[0]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::H => "H",
            Label::V => "V",
        })
    }
}

/// Neighbors of `v` in the canonical order E, W, N, S.
pub fn neighbors(v: Vertex) -> [Vertex; 4] {
    Direction::ALL.map(|d| v.step(d))
}

/// Argument of `v` in the half-open interval (-π, π].
pub fn arg_of(v: Vertex) -> Result<f64> {
    if v.is_origin() {
        return Err(Error::OriginArgument);
    }
    let theta = (v.y as f64).atan2(v.x as f64);
    Ok(if theta <= -PI { PI } else { theta })
}

/// `|v| < r`.
pub fn in_ball(v: Vertex, r: f64) -> bool {
    (v.norm_sq() as f64) < r * r
}

/// `v` lies outside `B_r` but has a neighbor inside.
pub fn on_boundary(v: Vertex, r: f64) -> bool {
    !in_ball(v, r) && neighbors(v).iter().any(|&u| in_ball(u, r))
}

/// All vertices with `|x| < r`, sorted.
pub fn ball(r: f64) -> Vec<Vertex> {
    let m = r.ceil() as i32;
    let mut out = Vec::new();
    for x in -m..=m {
        for y in -m..=m {
            let v = Vertex::new(x, y);
            if in_ball(v, r) {
                out.push(v);
            }
        }
    }
    out
}

/// Outer boundary of `B_r`, sorted.
pub fn boundary(r: f64) -> Vec<Vertex> {
    let m = r.ceil() as i32 + 1;
    let mut out = Vec::new();
    for x in -m..=m {
        for y in -m..=m {
            let v = Vertex::new(x, y);
            if on_boundary(v, r) {
                out.push(v);
            }
        }
    }
    out
}

/// Dense membership table for `B_r` and `∂B_r` on the square `[-(r+1), r+1]²`.
///
/// Frozen walks query these sets on every step, so they are precomputed once.
#[derive(Clone, Debug)]
pub struct DiskMask {
    radius: f64,
    half: i32,
    side: usize,
    // 0 = outside, 1 = ball, 2 = boundary
    cells: Vec<u8>,
}

impl DiskMask {
    pub fn new(r: f64) -> Self {
        let half = r.ceil() as i32 + 1;
        let side = (2 * half + 1) as usize;
        let mut cells = vec![0u8; side * side];
        for x in -half..=half {
            for y in -half..=half {
                let v = Vertex::new(x, y);
                let i = ((y + half) as usize) * side + (x + half) as usize;
                cells[i] = if in_ball(v, r) {
                    1
                } else if on_boundary(v, r) {
                    2
                } else {
                    0
                };
            }
        }
        DiskMask { radius: r, half, side, cells }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn half_width(&self) -> i32 {
        self.half
    }

    fn cell(&self, v: Vertex) -> u8 {
        if v.x.abs() > self.half || v.y.abs() > self.half {
            return 0;
        }
        self.cells[((v.y + self.half) as usize) * self.side + (v.x + self.half) as usize]
    }

    pub fn in_ball(&self, v: Vertex) -> bool {
        self.cell(v) == 1
    }

    pub fn on_boundary(&self, v: Vertex) -> bool {
        self.cell(v) == 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_in_canonical_order() {
        assert_eq!(
            neighbors(ORIGIN),
            [Vertex::new(1, 0), Vertex::new(-1, 0), Vertex::new(0, 1), Vertex::new(0, -1)]
        );
        assert_eq!(
            neighbors(Vertex::new(2, -3)),
            [Vertex::new(3, -3), Vertex::new(1, -3), Vertex::new(2, -2), Vertex::new(2, -4)]
        );
    }

    #[test]
    fn arg_conventions() {
        assert_eq!(arg_of(Vertex::new(1, 0)).unwrap(), 0.0);
        assert_eq!(arg_of(Vertex::new(-1, 0)).unwrap(), PI);
        assert!((arg_of(Vertex::new(1, 1)).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(matches!(arg_of(ORIGIN), Err(Error::OriginArgument)));
    }

    #[test]
    fn small_balls() {
        assert_eq!(ball(1.0), vec![ORIGIN]);
        let mut b = boundary(1.0);
        b.sort();
        let mut expect = neighbors(ORIGIN).to_vec();
        expect.sort();
        assert_eq!(b, expect);
        assert_eq!(ball(2.0).len(), 9);
    }

    #[test]
    fn boundary_disjoint_from_ball() {
        for r in 1..=50 {
            let r = r as f64;
            let b = ball(r);
            for v in boundary(r) {
                assert!(!b.contains(&v));
                assert!(neighbors(v).iter().any(|u| in_ball(*u, r)));
            }
        }
    }

    #[test]
    fn labels_and_turns() {
        for d in Direction::ALL {
            assert_eq!(d.ccw().cw(), d);
            assert_ne!(d.ccw().label(), d.label());
            assert_eq!(Direction::from_offset(d.offset()), Some(d));
        }
        assert_eq!(Label::H.flip(), Label::V);
        let h = Direction::ALL.iter().filter(|d| d.label() == Label::H).count();
        assert_eq!(h, 2);
    }

    #[test]
    fn disk_mask_matches_sets() {
        let r = 7.5;
        let m = DiskMask::new(r);
        for x in -10..=10 {
            for y in -10..=10 {
                let v = Vertex::new(x, y);
                assert_eq!(m.in_ball(v), in_ball(v, r));
                assert_eq!(m.on_boundary(v), on_boundary(v, r));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn polar_roundtrip(x in -1000i32..1000, y in -1000i32..1000) {
                prop_assume!(x != 0 || y != 0);
                let v = Vertex::new(x, y);
                let t = arg_of(v).unwrap();
                prop_assert!(t > -PI && t <= PI);
                prop_assert!((t.cos() * v.norm() - x as f64).abs() < 1e-12);
                prop_assert!((t.sin() * v.norm() - y as f64).abs() < 1e-12);
            }

            #[test]
            fn balls_nest(r in 1.0f64..30.0, dr in 0.01f64..5.0) {
                let small = ball(r);
                let big = ball(r + dr);
                prop_assert!(small.iter().all(|v| big.contains(v)));
            }
        }
    }
}
