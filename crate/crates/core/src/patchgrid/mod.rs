//! Decomposition of a global grid into subgrids ("patches") of logical size
//! `2^k + 1` per axis, each surrounded by a one-cell ghost ring.
//!
//! Neighbouring patches share one logical layer: with `P` patches of logical
//! length `n = 2^k + 1` the global logical length is `P * 2^k + 1`. On a
//! periodic grid the first and last global nodes are the same physical cell,
//! so a 129-point axis holds 128 distinct cells.
//!
//! Every copy of a physical cell carries the same tensor-trapezoid weight, so
//! [`PatchGrid::global_mass`] counts each physical cell exactly once.

mod snapshot;

use thiserror::Error;

use crate::field::{next_index, strides, Field};
use crate::wavelet::{dyadic_exponent, trapezoid_mass_nd};

pub use snapshot::{read_wgrd, read_wgrd_file, write_csv_grid, write_wgrd, write_wgrd_file, SnapshotError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatchError {
    #[error("axis {axis}: global length {len} cannot be split into {splits} patches of 2^k+1 points")]
    Indivisible { axis: usize, len: usize, splits: usize },
    #[error("splits {splits:?} do not match {ndim} dimensions")]
    RankMismatch { splits: Vec<usize>, ndim: usize },
    #[error("grid needs at least one component")]
    NoComponents,
    #[error("component {component} out of range ({components} components)")]
    ComponentOutOfRange { component: usize, components: usize },
    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("shared cell {global:?} disagrees between patches: {a} vs {b}")]
    Inconsistent { global: Vec<usize>, a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    coords: Vec<usize>,
    origin: Vec<usize>,
    logical: Vec<usize>,
    fields: Vec<Field>,
}

impl Patch {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// Global index of logical cell `(0, ..., 0)`.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn logical_dims(&self) -> &[usize] {
        &self.logical
    }

    pub fn true_dims(&self) -> Vec<usize> {
        self.logical.iter().map(|n| n + 2).collect()
    }

    pub fn components(&self) -> usize {
        self.fields.len()
    }

    /// Per-component arrays over the true dims (ghosts included).
    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn fields_mut(&mut self) -> &mut [Field] {
        &mut self.fields
    }

    /// Row-major copy of the logical block of one component.
    pub fn logical_values(&self, component: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.logical.iter().product());
        self.visit_logical(|_, off| out.push(self.fields[component].data()[off]));
        out
    }

    pub fn set_logical_values(&mut self, component: usize, values: &[f64]) -> Result<(), PatchError> {
        let expected: usize = self.logical.iter().product();
        if values.len() != expected {
            return Err(PatchError::ShapeMismatch {
                expected,
                got: values.len(),
            });
        }
        let mut offsets = Vec::with_capacity(expected);
        self.visit_logical(|_, off| offsets.push(off));
        let data = self.fields[component].data_mut();
        for (off, v) in offsets.into_iter().zip(values) {
            data[off] = *v;
        }
        Ok(())
    }

    /// Trapezoid mass of the logical block of one component.
    pub fn mass(&self, component: usize) -> f64 {
        trapezoid_mass_nd(&self.logical, &self.logical_values(component))
    }

    /// Calls `f(logical_index, true_offset)` over the logical block in
    /// row-major order.
    fn visit_logical(&self, mut f: impl FnMut(&[usize], usize)) {
        let st = strides(&self.true_dims());
        let mut idx = vec![0; self.logical.len()];
        loop {
            let off = idx.iter().zip(&st).map(|(i, s)| (i + 1) * s).sum();
            f(&idx, off);
            if !next_index(&mut idx, &self.logical) {
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    global: Vec<usize>,
    splits: Vec<usize>,
    periodic: bool,
    patches: Vec<Patch>,
    /// Copies of each physical cell held by more than one logical slot, as
    /// `(patch, true offset)`.
    shared: Vec<Vec<(usize, usize)>>,
}

/// Builds the patch layout for `global` logical points split into `splits`
/// patches per axis.
pub fn decompose(global: &[usize], splits: &[usize], components: usize, periodic: bool) -> Result<PatchGrid, PatchError> {
    if splits.len() != global.len() || global.is_empty() {
        return Err(PatchError::RankMismatch {
            splits: splits.to_vec(),
            ndim: global.len(),
        });
    }
    if components == 0 {
        return Err(PatchError::NoComponents);
    }
    let mut logical = Vec::with_capacity(global.len());
    for (axis, (&len, &p)) in global.iter().zip(splits).enumerate() {
        let err = PatchError::Indivisible { axis, len, splits: p };
        if p == 0 || len < 2 || (len - 1) % p != 0 {
            return Err(err);
        }
        let n = (len - 1) / p + 1;
        match dyadic_exponent(n) {
            Some(k) if k >= 1 => logical.push(n),
            _ => return Err(err),
        }
    }
    let true_dims: Vec<usize> = logical.iter().map(|n| n + 2).collect();
    let mut patches = Vec::new();
    let mut coords = vec![0; global.len()];
    loop {
        let origin = coords.iter().zip(&logical).map(|(c, n)| c * (n - 1)).collect();
        patches.push(Patch {
            coords: coords.clone(),
            origin,
            logical: logical.clone(),
            fields: vec![Field::zeros(&true_dims).expect("nonempty dims"); components],
        });
        if !next_index(&mut coords, splits) {
            break;
        }
    }
    let mut grid = PatchGrid {
        global: global.to_vec(),
        splits: splits.to_vec(),
        periodic,
        patches,
        shared: Vec::new(),
    };
    grid.shared = grid.build_shared_groups();
    Ok(grid)
}

impl PatchGrid {
    pub fn global_dims(&self) -> &[usize] {
        &self.global
    }

    pub fn splits(&self) -> &[usize] {
        &self.splits
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn ndim(&self) -> usize {
        self.global.len()
    }

    pub fn components(&self) -> usize {
        self.patches[0].fields.len()
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patches_mut(&mut self) -> &mut [Patch] {
        &mut self.patches
    }

    pub fn patch_logical_dims(&self) -> &[usize] {
        &self.patches[0].logical
    }

    /// Distinct physical cells per axis: `G - 1` when periodic, else `G`.
    pub fn physical_dims(&self) -> Vec<usize> {
        self.global.iter().map(|&g| if self.periodic { g - 1 } else { g }).collect()
    }

    fn physical_index(&self, global: &[usize]) -> Vec<usize> {
        global
            .iter()
            .zip(&self.global)
            .map(|(&g, &n)| if self.periodic { g % (n - 1) } else { g })
            .collect()
    }

    fn build_shared_groups(&self) -> Vec<Vec<(usize, usize)>> {
        let phys = self.physical_dims();
        let pst = strides(&phys);
        let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); phys.iter().product()];
        for (pi, patch) in self.patches.iter().enumerate() {
            patch.visit_logical(|idx, off| {
                let g: Vec<usize> = idx.iter().zip(&patch.origin).map(|(i, o)| i + o).collect();
                let p = self.physical_index(&g);
                let flat: usize = p.iter().zip(&pst).map(|(a, b)| a * b).sum();
                slots[flat].push((pi, off));
            });
        }
        slots.into_iter().filter(|s| s.len() > 1).collect()
    }

    /// Number of physical cells held by more than one logical slot.
    pub fn shared_cell_count(&self) -> usize {
        self.shared.len()
    }

    /// Sets every logical cell of one component from `f(global_index)`.
    pub fn fill(&mut self, component: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<(), PatchError> {
        self.check_component(component)?;
        for patch in &mut self.patches {
            let mut offsets = Vec::new();
            patch.visit_logical(|idx, off| {
                let g: Vec<usize> = idx.iter().zip(&patch.origin).map(|(i, o)| i + o).collect();
                offsets.push((g, off));
            });
            let data = patch.fields[component].data_mut();
            for (g, off) in offsets {
                data[off] = f(&g);
            }
        }
        Ok(())
    }

    /// Scatters a global logical field into the patches.
    pub fn scatter(&mut self, component: usize, field: &Field) -> Result<(), PatchError> {
        if field.dims() != self.global.as_slice() {
            return Err(PatchError::ShapeMismatch {
                expected: self.global.iter().product(),
                got: field.len(),
            });
        }
        self.fill(component, |g| field.get(g))
    }

    fn check_component(&self, component: usize) -> Result<(), PatchError> {
        let components = self.components();
        if component >= components {
            return Err(PatchError::ComponentOutOfRange { component, components });
        }
        Ok(())
    }

    /// Fills every ghost cell from the neighbouring patch, one axis at a time.
    /// Whole slabs are copied, including ghosts of earlier axes, so corner
    /// ghosts end up consistent. Logical cells are never written. Non-periodic
    /// domain edges copy the patch's own edge layer.
    pub fn sync_ghosts(&mut self) {
        for axis in 0..self.ndim() {
            for pi in 0..self.patches.len() {
                let n = self.patches[pi].logical[axis];
                let p = self.splits[axis];
                let c = self.patches[pi].coords[axis];
                // (ghost true index, source patch coord, source true index)
                let low = match (c, self.periodic) {
                    (0, false) => (pi, 1),
                    (0, true) => (self.neighbour(pi, axis, p - 1), n - 1),
                    _ => (self.neighbour(pi, axis, c - 1), n - 1),
                };
                let high = match (c + 1 == p, self.periodic) {
                    (true, false) => (pi, n),
                    (true, true) => (self.neighbour(pi, axis, 0), 2),
                    _ => (self.neighbour(pi, axis, c + 1), 2),
                };
                for comp in 0..self.components() {
                    let slab = self.read_slab(low.0, comp, axis, low.1);
                    self.write_slab(pi, comp, axis, 0, &slab);
                    let slab = self.read_slab(high.0, comp, axis, high.1);
                    self.write_slab(pi, comp, axis, n + 1, &slab);
                }
            }
        }
    }

    fn neighbour(&self, pi: usize, axis: usize, coord: usize) -> usize {
        let mut coords = self.patches[pi].coords.clone();
        coords[axis] = coord;
        coords.iter().zip(&self.splits).fold(0, |acc, (c, s)| acc * s + c)
    }

    fn slab_offsets(&self, axis: usize, at: usize) -> Vec<usize> {
        let dims = self.patches[0].true_dims();
        let st = strides(&dims);
        let mut outer = dims.clone();
        outer[axis] = 1;
        let mut idx = vec![0; dims.len()];
        let mut out = Vec::new();
        loop {
            let off: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>() + at * st[axis];
            out.push(off);
            if !next_index(&mut idx, &outer) {
                break;
            }
        }
        out
    }

    fn read_slab(&self, pi: usize, comp: usize, axis: usize, at: usize) -> Vec<f64> {
        let data = self.patches[pi].fields[comp].data();
        self.slab_offsets(axis, at).into_iter().map(|o| data[o]).collect()
    }

    fn write_slab(&mut self, pi: usize, comp: usize, axis: usize, at: usize, values: &[f64]) {
        let offsets = self.slab_offsets(axis, at);
        let data = self.patches[pi].fields[comp].data_mut();
        for (o, v) in offsets.into_iter().zip(values) {
            data[o] = *v;
        }
    }

    /// Largest relative disagreement between copies of a shared cell.
    pub fn shared_discrepancy(&self) -> f64 {
        let mut worst = 0.0_f64;
        for comp in 0..self.components() {
            for group in &self.shared {
                let vals: Vec<f64> = group
                    .iter()
                    .map(|&(p, o)| self.patches[p].fields[comp].data()[o])
                    .collect();
                let (lo, hi) = vals
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
                worst = worst.max((hi - lo) / scale);
            }
        }
        worst
    }

    /// Replaces every copy of a shared cell by the mean of its copies, unless
    /// they are already bit-identical. Returns the number of cells changed.
    pub fn reconcile_shared(&mut self) -> usize {
        let mut changed = 0;
        for comp in 0..self.components() {
            for group in &self.shared {
                let first = self.patches[group[0].0].fields[comp].data()[group[0].1];
                let differs = group[1..]
                    .iter()
                    .any(|&(p, o)| self.patches[p].fields[comp].data()[o].to_bits() != first.to_bits());
                if !differs {
                    continue;
                }
                let sum: f64 = group.iter().map(|&(p, o)| self.patches[p].fields[comp].data()[o]).sum();
                let mean = sum / group.len() as f64;
                for &(p, o) in group {
                    self.patches[p].fields[comp].data_mut()[o] = mean;
                }
                changed += 1;
            }
        }
        changed
    }

    /// Global logical field of one component. Fails when copies of a shared
    /// cell differ by more than `1e-12` relative.
    pub fn assemble(&self, component: usize) -> Result<Field, PatchError> {
        self.check_component(component)?;
        let mut out = Field::zeros(&self.global).expect("nonempty dims");
        let mut seen = vec![false; out.len()];
        let gst = strides(&self.global);
        for patch in &self.patches {
            let data = patch.fields[component].data();
            let mut cells = Vec::new();
            patch.visit_logical(|idx, off| {
                let flat: usize = idx
                    .iter()
                    .zip(&patch.origin)
                    .zip(&gst)
                    .map(|((i, o), s)| (i + o) * s)
                    .sum();
                cells.push((flat, data[off]));
            });
            for (flat, v) in cells {
                if seen[flat] {
                    check_agree(&self.global, flat, out.data()[flat], v)?;
                } else {
                    out.data_mut()[flat] = v;
                    seen[flat] = true;
                }
            }
        }
        if self.periodic {
            // wrapped duplicates: global node 0 and G-1 on each axis
            let mut idx = vec![0; self.global.len()];
            loop {
                let p = self.physical_index(&idx);
                if p != idx {
                    let a = out.get(&p);
                    let b = out.get(&idx);
                    check_agree(&self.global, out.offset(&idx), a, b)?;
                }
                if !next_index(&mut idx, &self.global) {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Trapezoid-weighted sum of `|value|`, a scale for relative mass errors.
    pub fn global_abs_mass(&self, component: usize) -> f64 {
        self.patches
            .iter()
            .map(|p| {
                let v: Vec<f64> = p.logical_values(component).iter().map(|x| x.abs()).collect();
                trapezoid_mass_nd(&p.logical, &v)
            })
            .sum()
    }

    /// Sum of the per-patch tensor-trapezoid masses of one component.
    pub fn global_mass(&self, component: usize) -> f64 {
        self.patches.iter().map(|p| p.mass(component)).sum()
    }
}

fn check_agree(global: &[usize], flat: usize, a: f64, b: f64) -> Result<(), PatchError> {
    let scale = a.abs().max(b.abs()).max(1.0);
    if (a - b).abs() > 1e-12 * scale || a.is_nan() != b.is_nan() {
        let st = strides(global);
        let idx = st.iter().zip(global).map(|(s, n)| (flat / s) % n).collect();
        return Err(PatchError::Inconsistent { global: idx, a, b });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let g = decompose(&[129, 129], &[2, 2], 1, true).unwrap();
        assert_eq!(g.patches().len(), 4);
        assert_eq!(g.patch_logical_dims(), &[65, 65]);
        assert_eq!(g.patches()[0].true_dims(), vec![67, 67]);
        assert_eq!(g.patches()[3].origin(), &[64, 64]);
        let g = decompose(&[5], &[1], 1, false).unwrap();
        assert_eq!(g.patches()[0].true_dims(), vec![7]);
        assert!(matches!(
            decompose(&[10], &[2], 1, true),
            Err(PatchError::Indivisible { axis: 0, .. })
        ));
        assert!(decompose(&[13], &[2], 1, true).is_err());
        assert!(decompose(&[9, 9], &[2], 1, true).is_err());
    }

    #[test]
    fn one_dimensional_sharing_and_sync() {
        let mut g = decompose(&[9], &[2], 1, false).unwrap();
        g.fill(0, |i| i[0] as f64).unwrap();
        assert_eq!(g.patches()[0].logical_values(0), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.patches()[1].logical_values(0), vec![4.0, 5.0, 6.0, 7.0, 8.0]);
        g.sync_ghosts();
        assert_eq!(g.patches()[0].fields()[0].data()[6], 5.0);
        assert_eq!(g.patches()[1].fields()[0].data()[0], 3.0);
        // transmissive outer edges
        assert_eq!(g.patches()[0].fields()[0].data()[0], 0.0);
        assert_eq!(g.patches()[1].fields()[0].data()[6], 8.0);
    }

    #[test]
    fn periodic_wrap() {
        let mut g = decompose(&[9], &[2], 1, true).unwrap();
        g.fill(0, |i| (i[0] % 8) as f64 * 10.0).unwrap();
        g.sync_ghosts();
        // physical ring of 8 cells: left of 0 is 7, right of 8 (== 0) is 1
        assert_eq!(g.patches()[0].fields()[0].data()[0], 70.0);
        assert_eq!(g.patches()[1].fields()[0].data()[6], 10.0);

        let mut g = decompose(&[5, 5], &[1, 1], 1, true).unwrap();
        g.fill(0, |i| ((i[0] % 4) * 4 + i[1] % 4) as f64).unwrap();
        g.sync_ghosts();
        let f = &g.patches()[0].fields()[0];
        assert_eq!(f.get(&[0, 3]), f.get(&[4, 3]));
        assert_eq!(f.get(&[2, 0]), f.get(&[2, 4]));
        assert_eq!(f.get(&[0, 0]), 15.0);
        assert_eq!(f.get(&[6, 6]), 5.0);
    }

    #[test]
    fn constant_mass_counts_cells() {
        for splits in [[1, 1], [2, 2], [4, 2]] {
            let mut g = decompose(&[129, 129], &splits, 1, true).unwrap();
            g.fill(0, |_| 1.0).unwrap();
            assert_eq!(g.global_mass(0), 128.0 * 128.0);
        }
    }

    #[test]
    fn shared_groups() {
        let g = decompose(&[9, 9], &[2, 2], 1, true).unwrap();
        // physical ring 8x8; every cell on rows/cols 0 or 4 has copies
        let expected = 8 * 8 - 6 * 6;
        assert_eq!(g.shared_cell_count(), expected);
        let g = decompose(&[9, 9], &[2, 2], 1, false).unwrap();
        assert_eq!(g.shared_cell_count(), 9 + 9 - 1);
    }

    #[test]
    fn reconcile_is_mass_neutral() {
        let mut g = decompose(&[17, 17], &[2, 2], 1, true).unwrap();
        g.fill(0, |i| (i[0] * 3 + i[1]) as f64 * 0.1).unwrap();
        // only the wrapped copies (global 0 vs 16) differ
        assert_eq!(g.reconcile_shared(), 16 + 16 - 1);
        let before = g.global_mass(0);
        let data = g.patches_mut()[0].fields_mut()[0].data_mut();
        data[1 + 19] += 0.5;
        let perturbed = g.global_mass(0);
        assert!(g.shared_discrepancy() > 0.0);
        assert_eq!(g.reconcile_shared(), 1);
        assert_eq!(g.shared_discrepancy(), 0.0);
        assert!((g.global_mass(0) - perturbed).abs() < 1e-12 * perturbed);
        assert!((perturbed - before - 0.5 * 0.25).abs() < 1e-12);
        assert!(g.assemble(0).is_ok());
    }

    #[test]
    fn assemble_detects_disagreement() {
        let mut g = decompose(&[9, 9], &[2, 1], 1, false).unwrap();
        g.fill(0, |i| (i[0] + i[1]) as f64).unwrap();
        let field = g.assemble(0).unwrap();
        assert_eq!(field.get(&[4, 7]), 11.0);
        let st = strides(&g.patches()[0].true_dims());
        let off = 5 * st[0] + 3 * st[1];
        g.patches_mut()[0].fields_mut()[0].data_mut()[off] = 99.0;
        assert!(matches!(g.assemble(0), Err(PatchError::Inconsistent { .. })));
    }
}
