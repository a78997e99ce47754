//! Group-connected admittance network structure.
//!
//! `M` ports split into `G` groups of `M̄ = M / G` fully interconnected ports.
//! Each group is described by the `M̄(M̄+1)/2` independent entries of a symmetric
//! matrix of component susceptances (grounding components on the diagonal,
//! port-to-port components off it), packed column by column over the upper
//! triangle: entry `(r, c)` with `r <= c` sits at `c(c+1)/2 + r`.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::LinearSusceptanceModel;
use crate::linalg::{CMatrix, RMatrix};
use crate::{Error, Result, C64};

/// Number of independent entries of an `m_bar`-by-`m_bar` symmetric matrix.
pub const fn packed_len(m_bar: usize) -> usize {
    m_bar * (m_bar + 1) / 2
}

/// Packed index of entry `(i, j)` (0-based, either triangle).
#[inline]
pub fn packed_index(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

/// Dense binary matrix mapping packed parameters to the column-major
/// vectorization of the full symmetric matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicationMatrix {
    m_bar: usize,
    ones: Vec<bool>,
}

impl DuplicationMatrix {
    pub fn rows(&self) -> usize {
        self.m_bar * self.m_bar
    }

    pub fn cols(&self) -> usize {
        packed_len(self.m_bar)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.ones[row * self.cols() + col]
    }

    /// `P b`, the column-major stacking of the symmetric matrix.
    pub fn apply(&self, packed: &[f64]) -> Vec<f64> {
        assert_eq!(packed.len(), self.cols());
        (0..self.rows())
            .map(|r| (0..self.cols()).filter(|&l| self.get(r, l)).map(|l| packed[l]).sum())
            .collect()
    }
}

/// Builds the duplication matrix with the 1-based index rule
/// `[P]_{M̄(i-1)+i', l} = 1` iff `l = i(i-1)/2 + i'` for `i' <= i`, or
/// `l = i'(i'-1)/2 + i` for `i < i'`.
pub fn duplication_matrix(m_bar: usize) -> DuplicationMatrix {
    let cols = packed_len(m_bar);
    let mut ones = vec![false; m_bar * m_bar * cols];
    for i in 1..=m_bar {
        for ip in 1..=m_bar {
            let row = m_bar * (i - 1) + ip;
            let l = if ip <= i {
                i * (i - 1) / 2 + ip
            } else {
                ip * (ip - 1) / 2 + i
            };
            ones[(row - 1) * cols + (l - 1)] = true;
        }
    }
    DuplicationMatrix { m_bar, ones }
}

/// Inverse vectorization: rebuilds the `m_bar`-by-`m_bar` matrix from column-major data.
pub fn unvec(m_bar: usize, stacked: &[f64]) -> RMatrix {
    assert_eq!(stacked.len(), m_bar * m_bar);
    RMatrix::from_fn(m_bar, m_bar, |r, c| stacked[c * m_bar + r])
}

/// Symmetric matrix of component susceptances from its packed entries.
pub fn unpack_symmetric(m_bar: usize, packed: &[f64]) -> RMatrix {
    assert_eq!(packed.len(), packed_len(m_bar));
    RMatrix::from_fn(m_bar, m_bar, |r, c| packed[packed_index(r, c)])
}

/// Maps component susceptances to the port susceptance block: off-diagonal
/// entries are negated and each diagonal entry becomes its row sum.
pub fn f3_map(component: &RMatrix) -> Result<RMatrix> {
    if !component.is_square() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{}x{} component matrix",
            component.rows(),
            component.cols()
        )));
    }
    let asym = component.asymmetry();
    if asym > 1e-12 {
        return Err(Error::AsymmetricInput(asym));
    }
    let n = component.rows();
    Ok(RMatrix::from_fn(n, n, |r, c| {
        if r == c {
            (0..n).map(|k| component[(r, k)]).sum()
        } else {
            -component[(r, c)]
        }
    }))
}

/// Port susceptance block straight from packed component values.
pub fn port_block_from_packed(m_bar: usize, packed: &[f64]) -> RMatrix {
    let mut out = RMatrix::zeros(m_bar, m_bar);
    write_port_block(m_bar, packed, |r, c, v| out[(r, c)] = v);
    out
}

/// Streams the port block entries of `packed` into `sink(row, col, value)`.
#[inline]
pub(crate) fn write_port_block(m_bar: usize, packed: &[f64], mut sink: impl FnMut(usize, usize, f64)) {
    for r in 0..m_bar {
        let mut diag = 0.0;
        for c in 0..m_bar {
            let b = packed[packed_index(r, c)];
            diag += b;
            if c != r {
                sink(r, c, -b);
            }
        }
        sink(r, r, diag);
    }
}

/// Element count and grouping of a group-connected BD-RIS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTopology {
    elements: usize,
    groups: usize,
    group_size: usize,
    duplication: DuplicationMatrix,
}

impl GroupTopology {
    /// `elements` ports in groups of `group_size`.
    pub fn with_group_size(elements: usize, group_size: usize) -> Result<Self> {
        if elements == 0 || group_size == 0 {
            return Err(Error::InvalidParameter(
                "element count and group size must be positive".into(),
            ));
        }
        if elements % group_size != 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "group size {group_size} does not divide {elements} elements"
            )));
        }
        Ok(Self {
            elements,
            groups: elements / group_size,
            group_size,
            duplication: duplication_matrix(group_size),
        })
    }

    /// `elements` ports in `groups` equal groups.
    pub fn with_groups(elements: usize, groups: usize) -> Result<Self> {
        if groups == 0 || elements % groups != 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "{groups} groups do not evenly split {elements} elements"
            )));
        }
        Self::with_group_size(elements, elements / groups)
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Parameters per group.
    pub fn packed_len(&self) -> usize {
        packed_len(self.group_size)
    }

    /// Total design parameters across all groups.
    pub fn parameter_count(&self) -> usize {
        self.groups * self.packed_len()
    }

    pub fn duplication(&self) -> &DuplicationMatrix {
        &self.duplication
    }

    /// Port range covered by group `g`.
    pub fn group_ports(&self, g: usize) -> core::ops::Range<usize> {
        g * self.group_size..(g + 1) * self.group_size
    }
}

/// Center-frequency component susceptances, packed per group.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptanceAssignment {
    group_size: usize,
    values: Vec<Vec<f64>>,
}

impl SusceptanceAssignment {
    pub fn new(group_size: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        let want = packed_len(group_size);
        if let Some(bad) = values.iter().find(|v| v.len() != want) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "group vector of length {} for group size {group_size} (want {want})",
                bad.len()
            )));
        }
        Ok(Self { group_size, values })
    }

    /// Every entry set to `b`.
    pub fn uniform(topology: &GroupTopology, b: f64) -> Self {
        Self {
            group_size: topology.group_size(),
            values: vec![vec![b; topology.packed_len()]; topology.groups()],
        }
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn groups(&self) -> usize {
        self.values.len()
    }

    pub fn group(&self, g: usize) -> &[f64] {
        &self.values[g]
    }

    pub fn iter_groups(&self) -> impl Iterator<Item = &[f64]> {
        self.values.iter().map(Vec::as_slice)
    }

    pub fn into_groups(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn validate(&self, topology: &GroupTopology, model: &LinearSusceptanceModel) -> Result<()> {
        if self.group_size != topology.group_size() || self.values.len() != topology.groups() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "assignment for {} groups of {} does not fit {} groups of {}",
                self.values.len(),
                self.group_size,
                topology.groups(),
                topology.group_size()
            )));
        }
        self.values
            .iter()
            .flatten()
            .try_for_each(|&b| model.check_susceptance(b))
    }
}

/// Lossless block-diagonal admittance matrix `j blkdiag(B_1, ..., B_G)`, stored per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    blocks: Vec<RMatrix>,
}

impl AdmittanceMatrix {
    pub fn from_blocks(blocks: Vec<RMatrix>) -> Result<Self> {
        let size = blocks.first().map_or(0, RMatrix::rows);
        if blocks.iter().any(|b| !b.is_square() || b.rows() != size) {
            return Err(Error::ShapeMismatch("blocks must be square and equally sized".into()));
        }
        Ok(Self { blocks })
    }

    pub fn group_size(&self) -> usize {
        self.blocks.first().map_or(0, RMatrix::rows)
    }

    pub fn elements(&self) -> usize {
        self.group_size() * self.blocks.len()
    }

    /// Susceptance block `B_g` (the admittance block is `j B_g`).
    pub fn block(&self, g: usize) -> &RMatrix {
        &self.blocks[g]
    }

    pub fn blocks(&self) -> &[RMatrix] {
        &self.blocks
    }

    /// Materializes the full `M`-by-`M` complex matrix.
    pub fn to_dense(&self) -> CMatrix {
        let n = self.group_size();
        let mut y = CMatrix::zeros(self.elements(), self.elements());
        for (g, block) in self.blocks.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    y[(g * n + r, g * n + c)] = C64::new(0.0, block[(r, c)]);
                }
            }
        }
        y
    }
}

/// Builds the BD-RIS admittance matrix seen by a subcarrier at `f`: every packed
/// center-frequency value goes through `F1(f) b + F2(f)`, then each group is
/// expanded to its symmetric component matrix and mapped to port susceptances.
pub fn assemble_admittance(
    topology: &GroupTopology,
    assignment: &SusceptanceAssignment,
    model: &LinearSusceptanceModel,
    f: f64,
) -> Result<AdmittanceMatrix> {
    model.check_frequency(f)?;
    assignment.validate(topology, model)?;
    let (f1, f2) = (model.f1(f), model.f2(f));
    let m_bar = topology.group_size();
    let blocks = assignment
        .iter_groups()
        .map(|b_c| {
            let at_f: Vec<f64> = b_c.iter().map(|b| f1 * b + f2).collect();
            let component = unvec(m_bar, &topology.duplication().apply(&at_f));
            f3_map(&component)
        })
        .collect::<Result<Vec<_>>>()?;
    AdmittanceMatrix::from_blocks(blocks)
}

/// Scattering matrix `(Y0 I - Y)(Y0 I + Y)^-1` of an admittance matrix.
pub fn scattering_from_admittance(y: &AdmittanceMatrix, y0: f64) -> Result<CMatrix> {
    scattering_from_dense(&y.to_dense(), y0)
}

/// [`scattering_from_admittance`] for an arbitrary dense admittance matrix.
pub fn scattering_from_dense(y: &CMatrix, y0: f64) -> Result<CMatrix> {
    if !y.is_square() {
        return Err(Error::ShapeMismatch("admittance matrix must be square".into()));
    }
    let y0 = C64::new(y0, 0.0);
    let minus = y.scale(C64::new(-1.0, 0.0)).add_scaled_identity(y0);
    let plus_inv = y.add_scaled_identity(y0).inverse()?;
    minus.matmul(&plus_inv)
}

/// `max |Re Y_ij|` of a dense admittance matrix.
pub fn max_real_part(y: &CMatrix) -> f64 {
    y.as_slice().iter().map(|v| v.re.abs()).fold(0.0, f64::max)
}
