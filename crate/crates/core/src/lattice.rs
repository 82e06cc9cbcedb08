//! Finite lattices standing in for the measure space `(X, dx)`, plus the
//! weighted power sums that play the role of `L^p` integrals.
//!
//! Sites are ordered lexicographically by integer coordinates (first axis
//! most significant) and every reduction in the crate walks them in that
//! order, so results do not depend on scheduling.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// One nearest-neighbour bond, oriented from `a` to its forward neighbour
/// `b` along `axis`. Periodic axes of extent 2 produce two parallel bonds
/// between the same pair, extent 1 produces a self-loop; both are kept so
/// that each site keeps exactly `2d` neighbour slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub axis: usize,
    /// True for the bond that crosses a periodic seam.
    pub wraps: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpace {
    dim: usize,
    extents: Vec<usize>,
    spacing: f64,
    boundary: Boundary,
    sites: Vec<Vec<i64>>,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    /// Neighbour slots of each site that point outside the site set
    /// (Dirichlet boundary or an excluded site).
    ghosts: Vec<usize>,
    excluded: Vec<Vec<i64>>,
}

impl LatticeSpace {
    /// Builds a box lattice with spacing `h`, cell measure `h^d`, and
    /// nearest-neighbour bonds of weight `h^(d-2)`.
    pub fn new(
        extents: &[usize],
        spacing: f64,
        boundary: Boundary,
        exclusions: &[Vec<i64>],
    ) -> Result<Self> {
        let dim = extents.len();
        if dim == 0 {
            return Err(LabError::Lattice("dimension must be at least 1".into()));
        }
        if let Some(axis) = extents.iter().position(|&e| e == 0) {
            return Err(LabError::Lattice(format!("axis {axis} has zero extent")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LabError::Lattice(format!("spacing must be positive, got {spacing}")));
        }
        for ex in exclusions {
            let inside = ex.len() == dim
                && ex.iter().zip(extents).all(|(&c, &e)| c >= 0 && (c as usize) < e);
            if !inside {
                return Err(LabError::Lattice(format!("exclusion {ex:?} lies outside the grid")));
            }
        }

        let total: usize = extents.iter().product();
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * extents[axis + 1];
        }
        let coords_of = |mut flat: usize| -> Vec<i64> {
            let mut c = vec![0i64; dim];
            for axis in 0..dim {
                c[axis] = (flat / strides[axis]) as i64;
                flat %= strides[axis];
            }
            c
        };
        let flat_of = |c: &[i64]| -> usize {
            c.iter().zip(&strides).map(|(&ci, &s)| ci as usize * s).sum()
        };

        let mut is_excluded = vec![false; total];
        for ex in exclusions {
            is_excluded[flat_of(ex)] = true;
        }
        // grid index -> site index
        let mut site_index = vec![usize::MAX; total];
        let mut sites = Vec::with_capacity(total);
        for flat in 0..total {
            if !is_excluded[flat] {
                site_index[flat] = sites.len();
                sites.push(coords_of(flat));
            }
        }
        if sites.is_empty() {
            return Err(LabError::Lattice("every site is excluded".into()));
        }

        let weight = spacing.powi(dim as i32 - 2);
        let mut edges = Vec::new();
        let mut ghosts = vec![0usize; sites.len()];
        for (i, c) in sites.iter().enumerate() {
            for axis in 0..dim {
                let ext = extents[axis] as i64;
                // forward neighbour creates the bond; both directions count ghosts
                for step in [1i64, -1] {
                    let mut n = c.clone();
                    n[axis] += step;
                    let wrapped = match boundary {
                        Boundary::Periodic => {
                            n[axis] = n[axis].rem_euclid(ext);
                            true
                        }
                        Boundary::Dirichlet => n[axis] >= 0 && n[axis] < ext,
                    };
                    if !wrapped || is_excluded[flat_of(&n)] {
                        ghosts[i] += 1;
                        continue;
                    }
                    if step == 1 {
                        let b = site_index[flat_of(&n)];
                        let wraps = c[axis] + 1 >= ext;
                        edges.push(Edge { a: i, b, weight, axis, wraps });
                    }
                }
            }
        }

        let cell = spacing.powi(dim as i32);
        Ok(Self {
            dim,
            extents: extents.to_vec(),
            spacing,
            boundary,
            measure: vec![cell; sites.len()],
            sites,
            edges,
            ghosts,
            excluded: exclusions.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn extents(&self) -> &[usize] {
        &self.extents
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn len(&self) -> usize {
        self.sites.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn ghosts(&self) -> &[usize] {
        &self.ghosts
    }
    pub fn excluded(&self) -> &[Vec<i64>] {
        &self.excluded
    }

    /// Neighbour slots per site: bonds (counted from both ends) plus ghosts.
    pub fn degree(&self, site: usize) -> usize {
        let bonds = self
            .edges
            .iter()
            .map(|e| (e.a == site) as usize + (e.b == site) as usize)
            .sum::<usize>();
        bonds + self.ghosts[site]
    }

    /// Euclidean distance of a site from a point given in lattice
    /// coordinates, in length units.
    pub fn distance_from(&self, site: usize, origin: &[f64]) -> f64 {
        self.sites[site]
            .iter()
            .zip(origin)
            .map(|(&c, &o)| (c as f64 - o).powi(2))
            .sum::<f64>()
            .sqrt()
            * self.spacing
    }

    pub fn lp_norm(&self, u: &[f64], p: f64) -> Result<f64> {
        lp_norm(u, p, &self.measure)
    }

    pub fn integral(&self, v: &Potential, p: f64) -> Result<f64> {
        power_integral(v.values(), p, &self.measure)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(LabError::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_len(values: &[f64], measure: &[f64]) -> Result<()> {
    if values.len() != measure.len() {
        return Err(LabError::Length { expected: measure.len(), got: values.len() });
    }
    Ok(())
}

/// `(Σ m_x |u_x|^p)^(1/p)` for `p >= 1`.
pub fn lp_norm(u: &[f64], p: f64, measure: &[f64]) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(crate::error::domain(format!("norm exponent must be >= 1, got {p}")));
    }
    check_len(u, measure)?;
    check_finite(u)?;
    let sum: f64 = u.iter().zip(measure).map(|(x, m)| m * x.abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// `Σ m_x V_x^p` for `p > 0`; the discrete `∫ V^p dx`.
pub fn power_integral(v: &[f64], p: f64, measure: &[f64]) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(crate::error::domain(format!("integral exponent must be > 0, got {p}")));
    }
    check_len(v, measure)?;
    check_finite(v)?;
    Ok(v.iter().zip(measure).map(|(x, m)| m * x.abs().powf(p)).sum())
}

/// Nonnegative potential `V`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(crate::error::domain(format!("potential is negative at site {i}")));
        }
        Ok(Self(values))
    }
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }
    pub fn values(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Strictly positive weight `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight(Vec<f64>);

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        if let Some(i) = values.iter().position(|&v| v <= 0.0) {
            return Err(crate::error::domain(format!("weight is not positive at site {i}")));
        }
        Ok(Self(values))
    }
    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }
    pub fn values(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dim_dirichlet_three_sites() {
        let s = LatticeSpace::new(&[3], 1.0, Boundary::Dirichlet, &[]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.edges().len(), 2);
        assert_eq!(s.ghosts(), &[1, 0, 1]);
    }

    #[test]
    fn periodic_square_has_full_degree() {
        let s = LatticeSpace::new(&[4, 4], 0.5, Boundary::Periodic, &[]).unwrap();
        assert_eq!(s.len(), 16);
        for x in 0..s.len() {
            assert_eq!(s.degree(x), 4);
            assert_eq!(s.ghosts()[x], 0);
        }
        assert!(s.measure().iter().all(|&m| (m - 0.25).abs() < 1e-15));
    }

    #[test]
    fn punctured_three_by_three() {
        // enumeration: 12 bonds in the full 3x3 grid, the centre carries 4
        let mut count = 0;
        for x in 0..3i64 {
            for y in 0..3i64 {
                for (dx, dy) in [(1, 0), (0, 1)] {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 3 && ny < 3 && (x, y) != (1, 1) && (nx, ny) != (1, 1) {
                        count += 1;
                    }
                }
            }
        }
        let s = LatticeSpace::new(&[3, 3], 1.0, Boundary::Dirichlet, &[vec![1, 1]]).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.edges().len(), count);
        assert_eq!(count, 8);
    }

    #[test]
    fn site_order_is_lexicographic() {
        let s = LatticeSpace::new(&[2, 3], 1.0, Boundary::Dirichlet, &[]).unwrap();
        let mut sorted = s.sites().to_vec();
        sorted.sort();
        assert_eq!(sorted, s.sites());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LatticeSpace::new(&[3, 0], 1.0, Boundary::Dirichlet, &[]).is_err());
        assert!(LatticeSpace::new(&[3], 0.0, Boundary::Dirichlet, &[]).is_err());
        assert!(LatticeSpace::new(&[3], 1.0, Boundary::Dirichlet, &[vec![3]]).is_err());
        assert!(LatticeSpace::new(&[3], 1.0, Boundary::Dirichlet, &[vec![0, 0]]).is_err());
    }

    #[test]
    fn small_periodic_axes_keep_slot_count() {
        let s = LatticeSpace::new(&[2], 1.0, Boundary::Periodic, &[]).unwrap();
        assert_eq!(s.edges().len(), 2);
        assert_eq!(s.degree(0), 2);
        let s = LatticeSpace::new(&[1, 3], 1.0, Boundary::Periodic, &[]).unwrap();
        assert!((0..3).all(|x| s.degree(x) == 4));
    }

    #[test]
    fn norms_and_integrals() {
        let m = [1.0; 4];
        assert_eq!(lp_norm(&[0.0, 1.0, 0.0, 0.0], 7.0, &m).unwrap(), 1.0);
        let n2 = lp_norm(&[1.0, 2.0, 2.0], 2.0, &[1.0; 3]).unwrap();
        assert!((n2 - 3.0).abs() < 1e-15);

        let s = LatticeSpace::new(&[5], 0.5, Boundary::Dirichlet, &[]).unwrap();
        let v = Potential::new(vec![3.0; 5]).unwrap();
        let got = s.integral(&v, 1.5).unwrap();
        assert!((got - 5.0 * 0.5 * 3f64.powf(1.5)).abs() < 1e-12);

        assert!(matches!(
            lp_norm(&[1.0, f64::NAN], 2.0, &[1.0, 1.0]),
            Err(LabError::NonFinite { index: 1 })
        ));
        assert!(lp_norm(&[1.0], 0.5, &[1.0]).is_err());
        assert!(power_integral(&[1.0], 0.0, &[1.0]).is_err());
    }

    #[test]
    fn potential_and_weight_invariants() {
        assert!(Potential::new(vec![0.0, 1.0]).is_ok());
        assert!(Potential::new(vec![-1e-3]).is_err());
        assert!(Weight::new(vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn lp_norm_is_absolutely_homogeneous(
            u in proptest::collection::vec(-10.0f64..10.0, 1..20),
            c in -5.0f64..5.0,
            p in 1.0f64..8.0,
        ) {
            let m = vec![0.7; u.len()];
            let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
            let lhs = lp_norm(&cu, p, &m).unwrap();
            let rhs = c.abs() * lp_norm(&u, p, &m).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.max(1.0));
        }
    }
}
