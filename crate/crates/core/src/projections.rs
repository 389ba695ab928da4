//! Lift and restrict operators between the full and surrogate state spaces.
//!
//! A [`ProjectionPair`] applies `V` (lift, surrogate → full) and `W*`
//! (restrict, full → surrogate) with `W*V = I`. Mesh operators are
//! matrix-free; dense bases store `V` (and `W` when oblique).
//!
//! Nested meshes are vertex-centered and include both boundaries, so a fine
//! grid of `2·P_c − 1` points per side contains every coarse node. Restriction
//! is injection; prolongation copies coincident nodes and averages onto the
//! in-between ones.
//!
//! 2-D grids are stored row by row, node `(ix, iy)` at `iy·P + ix`, with one
//! `P²` block per field.

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Tolerance on `‖VᵀV − I‖max` (or `‖WᵀV − I‖max`) for dense bases.
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("fine grid size {0} does not nest a coarse grid (need 2·P_c − 1 with P_c ≥ 2)")]
    NotNestable(usize),
    #[error("a projection needs at least one field")]
    NoFields,
    #[error("surrogate dimension {surrogate} exceeds full dimension {full}")]
    SurrogateTooLarge { full: usize, surrogate: usize },
    #[error("expected {expected} matrix entries, found {found}")]
    BadMatrixSize { expected: usize, found: usize },
    #[error("basis violates W*V = I: max deviation {deviation:e}")]
    NotBiorthogonal { deviation: f64 },
    #[error("basis file line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    Identity,
    NestedMesh1D,
    NestedMesh2D,
    DenseBasis,
}

#[derive(Debug, Clone, PartialEq)]
enum Operator {
    Identity,
    Mesh1d {
        fine: usize,
    },
    Mesh2d {
        fine_p: usize,
        coarse_p: usize,
        fields: usize,
    },
    Dense {
        /// `V`, `N × S` row-major.
        v: Vec<f64>,
        /// `W` for oblique pairs; `None` when `W = V`.
        w: Option<Vec<f64>>,
    },
}

/// The linear maps `V` and `W*` with `W*V = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    dim_full: usize,
    dim_surrogate: usize,
    op: Operator,
}

/// Coarse size of a nestable fine grid, `P_c = (P_f + 1) / 2`.
pub fn coarse_size(fine: usize) -> Result<usize, ProjectionError> {
    if fine < 3 || fine % 2 == 0 {
        return Err(ProjectionError::NotNestable(fine));
    }
    Ok((fine + 1) / 2)
}

impl ProjectionPair {
    /// `V = W* = I` on `n` components.
    pub fn identity(n: usize) -> Result<Self, ProjectionError> {
        if n == 0 {
            return Err(ProjectionError::EmptyDimension);
        }
        Ok(Self {
            dim_full: n,
            dim_surrogate: n,
            op: Operator::Identity,
        })
    }

    /// 1-D nested mesh with `fine` points; the coarse mesh has `(fine+1)/2`.
    pub fn nested_mesh_1d(fine: usize) -> Result<Self, ProjectionError> {
        let coarse = coarse_size(fine)?;
        Ok(Self {
            dim_full: fine,
            dim_surrogate: coarse,
            op: Operator::Mesh1d { fine },
        })
    }

    /// Tensor-product nested mesh on a `fine_p × fine_p` grid, applied
    /// independently to each of `fields` blocks.
    pub fn nested_mesh_2d(fine_p: usize, fields: usize) -> Result<Self, ProjectionError> {
        let coarse_p = coarse_size(fine_p)?;
        if fields == 0 {
            return Err(ProjectionError::NoFields);
        }
        Ok(Self {
            dim_full: fields * fine_p * fine_p,
            dim_surrogate: fields * coarse_p * coarse_p,
            op: Operator::Mesh2d {
                fine_p,
                coarse_p,
                fields,
            },
        })
    }

    /// Orthonormal dense basis: `V` is `n × s` row-major and `W = V`.
    pub fn dense(n: usize, s: usize, v: Vec<f64>) -> Result<Self, ProjectionError> {
        check_dense_shape(n, s, &v)?;
        let deviation = gram_deviation(n, s, &v, &v);
        if !(deviation <= BASIS_TOL) {
            return Err(ProjectionError::NotBiorthogonal { deviation });
        }
        Ok(Self {
            dim_full: n,
            dim_surrogate: s,
            op: Operator::Dense { v, w: None },
        })
    }

    /// Oblique dense pair, accepted when `‖WᵀV − I‖max ≤ 1e-10`.
    pub fn oblique(n: usize, s: usize, v: Vec<f64>, w: Vec<f64>) -> Result<Self, ProjectionError> {
        check_dense_shape(n, s, &v)?;
        check_dense_shape(n, s, &w)?;
        let deviation = gram_deviation(n, s, &w, &v);
        if !(deviation <= BASIS_TOL) {
            return Err(ProjectionError::NotBiorthogonal { deviation });
        }
        Ok(Self {
            dim_full: n,
            dim_surrogate: s,
            op: Operator::Dense { v, w: Some(w) },
        })
    }

    /// Parses a basis document: a header `N S`, then `N` rows of `S` values
    /// giving `V` row by row, optionally followed by `N` more rows giving an
    /// oblique `W`. Blank lines and `#` comments are ignored.
    pub fn parse_basis(text: &str) -> Result<Self, ProjectionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(ProjectionError::Malformed {
            line: 1,
            message: "missing 'N S' header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| ProjectionError::Malformed {
                line: hline,
                message: format!("bad header: {e}"),
            })?;
        let [n, s] = dims[..] else {
            return Err(ProjectionError::Malformed {
                line: hline,
                message: "header must hold exactly 'N S'".into(),
            });
        };
        if n == 0 || s == 0 {
            return Err(ProjectionError::EmptyDimension);
        }
        if s > n {
            return Err(ProjectionError::SurrogateTooLarge { full: n, surrogate: s });
        }
        let mut values = Vec::with_capacity(2 * n * s);
        let mut rows = 0;
        for (line, l) in lines {
            let row: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| ProjectionError::Malformed {
                    line,
                    message: format!("bad number: {e}"),
                })?;
            if row.len() != s {
                return Err(ProjectionError::Malformed {
                    line,
                    message: format!("expected {s} values, found {}", row.len()),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(ProjectionError::Malformed {
                    line,
                    message: "non-finite value".into(),
                });
            }
            values.extend(row);
            rows += 1;
        }
        match rows {
            r if r == n => Self::dense(n, s, values),
            r if r == 2 * n => {
                let w = values.split_off(n * s);
                Self::oblique(n, s, values, w)
            }
            r => Err(ProjectionError::Malformed {
                line: hline,
                message: format!("expected {n} or {} rows after the header, found {r}", 2 * n),
            }),
        }
    }

    /// Reads a basis file; see [`ProjectionPair::parse_basis`].
    pub fn from_basis_file(path: impl AsRef<Path>) -> Result<Self, ProjectionError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ProjectionError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_basis(&text)
    }

    pub fn kind(&self) -> ProjectionKind {
        match self.op {
            Operator::Identity => ProjectionKind::Identity,
            Operator::Mesh1d { .. } => ProjectionKind::NestedMesh1D,
            Operator::Mesh2d { .. } => ProjectionKind::NestedMesh2D,
            Operator::Dense { .. } => ProjectionKind::DenseBasis,
        }
    }

    /// `N`.
    pub fn dim_full(&self) -> usize {
        self.dim_full
    }

    /// `S`.
    pub fn dim_surrogate(&self) -> usize {
        self.dim_surrogate
    }

    /// `out = V z`.
    pub fn lift_into(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.dim_surrogate, "lift input length");
        assert_eq!(out.len(), self.dim_full, "lift output length");
        match &self.op {
            Operator::Identity => out.copy_from_slice(z),
            Operator::Mesh1d { .. } => prolong_1d(z, out),
            Operator::Mesh2d {
                fine_p,
                coarse_p,
                fields,
            } => {
                let (fb, cb) = (fine_p * fine_p, coarse_p * coarse_p);
                for f in 0..*fields {
                    prolong_2d(
                        &z[f * cb..(f + 1) * cb],
                        &mut out[f * fb..(f + 1) * fb],
                        *coarse_p,
                        *fine_p,
                    );
                }
            }
            Operator::Dense { v, .. } => {
                let s = self.dim_surrogate;
                for (o, row) in out.iter_mut().zip(v.chunks_exact(s)) {
                    *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// `out = W* y`.
    pub fn restrict_into(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.dim_full, "restrict input length");
        assert_eq!(out.len(), self.dim_surrogate, "restrict output length");
        match &self.op {
            Operator::Identity => out.copy_from_slice(y),
            Operator::Mesh1d { .. } => {
                for (o, v) in out.iter_mut().zip(y.iter().step_by(2)) {
                    *o = *v;
                }
            }
            Operator::Mesh2d {
                fine_p,
                coarse_p,
                fields,
            } => {
                let (fp, cp) = (*fine_p, *coarse_p);
                for f in 0..*fields {
                    let fine = &y[f * fp * fp..(f + 1) * fp * fp];
                    let coarse = &mut out[f * cp * cp..(f + 1) * cp * cp];
                    for cy in 0..cp {
                        for cx in 0..cp {
                            coarse[cy * cp + cx] = fine[2 * cy * fp + 2 * cx];
                        }
                    }
                }
            }
            Operator::Dense { v, w } => {
                let basis = w.as_deref().unwrap_or(v);
                let s = self.dim_surrogate;
                out.iter_mut().for_each(|o| *o = 0.0);
                for (row, yi) in basis.chunks_exact(s).zip(y) {
                    for (o, b) in out.iter_mut().zip(row) {
                        *o += b * yi;
                    }
                }
            }
        }
    }

    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_full];
        self.lift_into(z, &mut out);
        out
    }

    pub fn restrict(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_surrogate];
        self.restrict_into(y, &mut out);
        out
    }

    /// `y += V z`.
    pub fn lift_add(&self, z: &[f64], y: &mut [f64]) {
        match self.op {
            Operator::Identity => {
                assert_eq!(z.len(), y.len(), "lift input length");
                y.iter_mut().zip(z).for_each(|(a, b)| *a += b);
            }
            _ => {
                let lifted = self.lift(z);
                y.iter_mut().zip(&lifted).for_each(|(a, b)| *a += b);
            }
        }
    }
}

fn check_dense_shape(n: usize, s: usize, m: &[f64]) -> Result<(), ProjectionError> {
    if n == 0 || s == 0 {
        return Err(ProjectionError::EmptyDimension);
    }
    if s > n {
        return Err(ProjectionError::SurrogateTooLarge { full: n, surrogate: s });
    }
    if m.len() != n * s {
        return Err(ProjectionError::BadMatrixSize {
            expected: n * s,
            found: m.len(),
        });
    }
    Ok(())
}

/// `max |(WᵀV − I)_{ij}|` for row-major `N × S` matrices.
fn gram_deviation(n: usize, s: usize, w: &[f64], v: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..s {
        for j in 0..s {
            let dot: f64 = (0..n).map(|r| w[r * s + i] * v[r * s + j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (dot - target).abs();
            if dev.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(dev);
        }
    }
    worst
}

/// Stencil `[1/2 1 1/2]`.
fn prolong_1d(coarse: &[f64], fine: &mut [f64]) {
    for (i, c) in coarse.iter().enumerate() {
        fine[2 * i] = *c;
    }
    for i in 0..coarse.len() - 1 {
        fine[2 * i + 1] = 0.5 * (coarse[i] + coarse[i + 1]);
    }
}

fn prolong_2d(coarse: &[f64], fine: &mut [f64], cp: usize, fp: usize) {
    let at = |x: usize, y: usize| coarse[y * cp + x];
    for fy in 0..fp {
        let (y0, yodd) = (fy / 2, fy % 2 == 1);
        for fx in 0..fp {
            let (x0, xodd) = (fx / 2, fx % 2 == 1);
            // Coincident nodes are copied so that restriction recovers them exactly.
            fine[fy * fp + fx] = match (xodd, yodd) {
                (false, false) => at(x0, y0),
                (true, false) => 0.5 * (at(x0, y0) + at(x0 + 1, y0)),
                (false, true) => 0.5 * (at(x0, y0) + at(x0, y0 + 1)),
                (true, true) => {
                    0.25 * (at(x0, y0) + at(x0 + 1, y0) + at(x0, y0 + 1) + at(x0 + 1, y0 + 1))
                }
            };
        }
    }
}

pub fn identity_projection(n: usize) -> Result<ProjectionPair, ProjectionError> {
    ProjectionPair::identity(n)
}

pub fn nested_mesh_projection_1d(fine_count: usize) -> Result<ProjectionPair, ProjectionError> {
    ProjectionPair::nested_mesh_1d(fine_count)
}

pub fn nested_mesh_projection_2d(
    fine_p: usize,
    fields: usize,
) -> Result<ProjectionPair, ProjectionError> {
    ProjectionPair::nested_mesh_2d(fine_p, fields)
}

pub fn dense_basis_projection(path: impl AsRef<Path>) -> Result<ProjectionPair, ProjectionError> {
    ProjectionPair::from_basis_file(path)
}
