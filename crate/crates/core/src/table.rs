//! Spherical-function tables and their cache.
//!
//! A table holds `phi_lambda(r)` for a fixed frequency grid (rows) and
//! radius grid (columns). Rows are filled by independent sweeps, so the
//! build is data-parallel over frequencies. H^3 uses the closed form, every
//! other dimension the ODE sweep; in all cases a random spot sample is
//! cross-checked against an independent pointwise route before the table is
//! accepted, and a mismatch above 1e-9 aborts the build.
//!
//! Tables are memoized in-process keyed by `(d, lambda-grid, r-grid)`
//! fingerprints, with an optional binary disk layer under the directory
//! named by `SPHC_CACHE_DIR`. Cache hits return bit-identical data: builds
//! are deterministic (fixed step sizes, no cross-row reductions) and disk
//! entries carry a content hash that is verified on load.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Result, SphqError};
use crate::grid::{RadialGrid, SpectralGrid};
use crate::par::{self, ExecMode};
use crate::space::{OdeSweepPlan, SpaceModel};

/// Cross-route agreement required before a table is trusted.
pub const CROSS_CHECK_TOL: f64 = 1e-9;
const SPOT_SAMPLES: usize = 24;

/// Dense table of spherical-function values, row-major over frequencies.
#[derive(Debug)]
pub struct PhiTable {
    pub dimension: u32,
    pub n_lambda: usize,
    pub n_r: usize,
    data: Vec<f64>,
}

impl PhiTable {
    #[inline]
    pub fn value(&self, lambda_idx: usize, r_idx: usize) -> f64 {
        self.data[lambda_idx * self.n_r + r_idx]
    }

    #[inline]
    pub fn row(&self, lambda_idx: usize) -> &[f64] {
        &self.data[lambda_idx * self.n_r..(lambda_idx + 1) * self.n_r]
    }

    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        h.finalize().into()
    }

    /// Builds the table for `space` on the given grids and cross-checks it.
    pub fn build(
        space: &SpaceModel,
        sgrid: &SpectralGrid,
        rgrid: &RadialGrid,
        mode: ExecMode,
    ) -> Result<Self> {
        let n_lambda = sgrid.n_points();
        let n_r = rgrid.n_points();
        let rows: Vec<Vec<f64>> = if space.dimension == 3 {
            par::map_indexed(mode, n_lambda, |j| {
                let lambda = sgrid.nodes[j];
                rgrid
                    .nodes
                    .iter()
                    .map(|&r| crate::space::phi_closed_d3(lambda, r))
                    .collect()
            })
        } else {
            let plan = OdeSweepPlan::new(space, rgrid.r_max);
            par::map_indexed(mode, n_lambda, |j| plan.sweep(sgrid.nodes[j], &rgrid.nodes))
        };
        let mut data = Vec::with_capacity(n_lambda * n_r);
        for row in rows {
            debug_assert_eq!(row.len(), n_r);
            data.extend(row);
        }
        let table = PhiTable {
            dimension: space.dimension,
            n_lambda,
            n_r,
            data,
        };
        table.cross_check(space, sgrid, rgrid)?;
        Ok(table)
    }

    /// Spot-checks random entries against the independent pointwise route.
    fn cross_check(&self, space: &SpaceModel, sgrid: &SpectralGrid, rgrid: &RadialGrid) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5048_4954_4142);
        for _ in 0..SPOT_SAMPLES {
            let j = rng.gen_range(0..self.n_lambda);
            let i = rng.gen_range(0..self.n_r);
            let lambda = sgrid.nodes[j];
            let r = rgrid.nodes[i];
            let independent = match space.dimension {
                2 => crate::space::phi_mehler_d2(lambda, r)?,
                3 => space.spherical_function_cross(lambda, r)?,
                d => crate::space::phi_sphere_integral(d, lambda, r)?,
            };
            let got = self.value(j, i);
            let mismatch = (got - independent).abs();
            if mismatch > CROSS_CHECK_TOL {
                return Err(SphqError::TableMismatch {
                    mismatch,
                    tol: CROSS_CHECK_TOL,
                    lambda,
                    r,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    dimension: u32,
    sgrid: u64,
    rgrid: u64,
}

impl CacheKey {
    fn file_name(&self) -> String {
        format!(
            "phi-d{}-s{:016x}-r{:016x}.tbl",
            self.dimension, self.sgrid, self.rgrid
        )
    }
}

fn registry() -> &'static Mutex<HashMap<CacheKey, Arc<PhiTable>>> {
    static REG: OnceLock<Mutex<HashMap<CacheKey, Arc<PhiTable>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Environment variable naming the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "SPHC_CACHE_DIR";

fn disk_path(key: &CacheKey) -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(|dir| PathBuf::from(dir).join(key.file_name()))
}

const MAGIC: &[u8; 8] = b"SPHQTBL1";

fn write_disk(path: &PathBuf, table: &PhiTable) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        out.write_all(MAGIC)?;
        out.write_all(&(table.dimension as u64).to_le_bytes())?;
        out.write_all(&(table.n_lambda as u64).to_le_bytes())?;
        out.write_all(&(table.n_r as u64).to_le_bytes())?;
        out.write_all(&table.content_hash())?;
        for v in &table.data {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

fn read_disk(path: &PathBuf) -> Result<Option<PhiTable>> {
    let mut file = match std::fs::File::open(path) {
        Ok(f) => std::io::BufReader::new(f),
        Err(_) => return Ok(None),
    };
    let mut magic = [0u8; 8];
    if file.read_exact(&mut magic).is_err() || &magic != MAGIC {
        return Ok(None);
    }
    let mut u64buf = [0u8; 8];
    let mut next_u64 = |f: &mut dyn Read| -> Result<u64> {
        f.read_exact(&mut u64buf)?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let dimension = next_u64(&mut file)? as u32;
    let n_lambda = next_u64(&mut file)? as usize;
    let n_r = next_u64(&mut file)? as usize;
    let mut stored_hash = [0u8; 32];
    file.read_exact(&mut stored_hash)?;
    let mut data = vec![0.0f64; n_lambda * n_r];
    let mut buf = [0u8; 8];
    for v in data.iter_mut() {
        file.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    let table = PhiTable {
        dimension,
        n_lambda,
        n_r,
        data,
    };
    if table.content_hash() != stored_hash {
        // Corrupted entry: ignore it and rebuild.
        return Ok(None);
    }
    Ok(Some(table))
}

/// Returns the memoized table for `(space, sgrid, rgrid)`, building it if
/// needed.
pub fn get_or_build(
    space: &SpaceModel,
    sgrid: &Arc<SpectralGrid>,
    rgrid: &Arc<RadialGrid>,
    mode: ExecMode,
) -> Result<Arc<PhiTable>> {
    let key = CacheKey {
        dimension: space.dimension,
        sgrid: sgrid.fingerprint(),
        rgrid: rgrid.fingerprint(),
    };
    if let Some(hit) = registry().lock().unwrap().get(&key) {
        return Ok(Arc::clone(hit));
    }
    if let Some(path) = disk_path(&key) {
        if let Some(table) = read_disk(&path)? {
            if table.dimension == space.dimension
                && table.n_lambda == sgrid.n_points()
                && table.n_r == rgrid.n_points()
            {
                let arc = Arc::new(table);
                registry().lock().unwrap().insert(key, Arc::clone(&arc));
                return Ok(arc);
            }
        }
    }
    let table = Arc::new(PhiTable::build(space, sgrid, rgrid, mode)?);
    if let Some(path) = disk_path(&key) {
        write_disk(&path, &table)?;
    }
    registry().lock().unwrap().insert(key, Arc::clone(&table));
    Ok(table)
}

/// Drops all in-memory table entries (cold-cache testing).
pub fn clear_in_memory_cache() {
    registry().lock().unwrap().clear();
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_grids() -> (Arc<SpectralGrid>, Arc<RadialGrid>) {
        (
            SpectralGrid::composite_gl(12.0, 20, 6),
            RadialGrid::composite_gl(6.0, 20, 6),
        )
    }

    #[test]
    fn build_and_spot_values_d3() {
        let space = SpaceModel::new(3).unwrap();
        let (sg, rg) = small_grids();
        let t = PhiTable::build(&space, &sg, &rg, ExecMode::default()).unwrap();
        for (j, &l) in sg.nodes.iter().enumerate().step_by(17) {
            for (i, &r) in rg.nodes.iter().enumerate().step_by(13) {
                assert_abs_diff_eq!(
                    t.value(j, i),
                    crate::space::phi_closed_d3(l, r),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn build_d2_cross_checked() {
        let space = SpaceModel::new(2).unwrap();
        let (sg, rg) = small_grids();
        let t = PhiTable::build(&space, &sg, &rg, ExecMode::default()).unwrap();
        // phi_0(0) = 1 and boundedness across the table.
        assert_abs_diff_eq!(t.value(0, 0), 1.0, epsilon = 1e-12);
        assert!(t.data.iter().all(|v| v.abs() <= 1.0 + 1e-10));
    }

    #[test]
    fn memo_hit_is_shared_and_bit_identical() {
        let space = SpaceModel::new(3).unwrap();
        let (sg, rg) = small_grids();
        let a = get_or_build(&space, &sg, &rg, ExecMode::default()).unwrap();
        let b = get_or_build(&space, &sg, &rg, ExecMode::default()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let rebuilt = PhiTable::build(&space, &sg, &rg, ExecMode::Sequential).unwrap();
        assert_eq!(a.content_hash(), rebuilt.content_hash());
    }

    #[test]
    fn disk_cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let space = SpaceModel::new(2).unwrap();
        let (sg, rg) = small_grids();
        let key = CacheKey {
            dimension: 2,
            sgrid: sg.fingerprint(),
            rgrid: rg.fingerprint(),
        };
        let table = PhiTable::build(&space, &sg, &rg, ExecMode::default()).unwrap();
        let path = dir.path().join(key.file_name());
        write_disk(&path, &table).unwrap();
        let back = read_disk(&path).unwrap().expect("entry present");
        assert_eq!(back.content_hash(), table.content_hash());
    }
}
