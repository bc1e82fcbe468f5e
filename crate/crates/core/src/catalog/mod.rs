//! Geometry and vector field definition files and the builtin catalog.
//!
//! Names resolve against the builtin catalog first, then as filesystem paths.

mod format;
mod load;

use std::sync::OnceLock;

pub use format::{parse_indexed_key, Document, Entry, Section};
pub use load::{
    load_geometry, load_vector, parse_geometry, parse_vector, GeometryEntry, VectorEntry,
    METRICITY_TOLERANCE, SCAN_POINTS,
};

use crate::fields::VectorFieldSpec;
use crate::geometry::GeometrySpec;
use crate::{Error, Result};

macro_rules! builtin_files {
    ($dir:literal: $($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../catalog/", $dir, "/", $name)))),*]
    };
}

const GEOMETRY_FILES: &[(&str, &str)] = builtin_files!("geometries":
    "minkowski4.geom",
    "euclidean2.geom",
    "euclidean2_polar.geom",
    "sphere2.geom",
    "schwarzschild.geom",
    "flrw_flat.geom",
    "desitter.geom",
    "flat_affine.geom",
    "sphere2_affine.geom",
    "affine_plane.geom",
    "affine_with_torsion.geom",
    "riemann_cartan_teleparallel.geom",
    "weitzenbock_identity.geom",
    "weitzenbock_diag.geom",
    "weitzenbock_expt.geom",
    "finsler_minkowski.geom",
    "finsler_randers.geom",
);

const VECTOR_FILES: &[(&str, &str)] = builtin_files!("vectors":
    "trans_t.vec",
    "trans_x.vec",
    "trans_y.vec",
    "trans_z.vec",
    "rot_xy.vec",
    "rot_yz.vec",
    "rot_zx.vec",
    "boost_tx.vec",
    "boost_ty.vec",
    "boost_tz.vec",
    "dilation.vec",
    "quad_x.vec",
    "ds_dilation.vec",
    "schw_t.vec",
    "schw_rot_z.vec",
    "schw_rot_x.vec",
    "schw_rot_y.vec",
    "schw_trans_x.vec",
    "schw_boost_x.vec",
    "sph_rot_z.vec",
    "sph_rot_x.vec",
    "sph_rot_y.vec",
    "sph_shift_theta.vec",
    "e2_trans_x.vec",
    "e2_trans_y.vec",
    "e2_rot.vec",
    "e2_dilation.vec",
    "e2_shear.vec",
    "polar_rot.vec",
    "polar_trans_x.vec",
    "polar_trans_y.vec",
    "polar_radial.vec",
);

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub geometries: Vec<GeometryEntry>,
    pub vectors: Vec<VectorEntry>,
}

impl Catalog {
    pub fn geometry(&self, name: &str) -> Option<&GeometryEntry> {
        self.geometries.iter().find(|g| g.name == name)
    }

    pub fn vector(&self, name: &str) -> Option<&VectorEntry> {
        self.vectors.iter().find(|v| v.name == name)
    }

    /// Vector fields defined on the same coordinates as `geom`.
    pub fn vectors_for<'a>(
        &'a self,
        geom: &'a GeometrySpec,
    ) -> impl Iterator<Item = &'a VectorEntry> {
        self.vectors.iter().filter(move |v| v.fits(geom.chart()))
    }

    /// Every chart-compatible (geometry, vector) pair whose geometry kind has
    /// a Cartan model.
    pub fn matrix_pairs(&self) -> Vec<(&GeometryEntry, &VectorEntry)> {
        self.geometries
            .iter()
            .filter(|g| g.spec.kind().has_cartan_model())
            .flat_map(|g| self.vectors_for(&g.spec).map(move |v| (g, v)))
            .collect()
    }
}

fn parse_builtin() -> Result<Catalog> {
    let geometries = GEOMETRY_FILES
        .iter()
        .map(|(file, text)| parse_geometry(text, file))
        .collect::<Result<Vec<_>>>()?;
    let vectors = VECTOR_FILES
        .iter()
        .map(|(file, text)| parse_vector(text, file))
        .collect::<Result<Vec<_>>>()?;
    Ok(Catalog {
        geometries,
        vectors,
    })
}

/// The builtin catalog, parsed and validated on first use.
pub fn builtin() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        parse_builtin().unwrap_or_else(|e| panic!("builtin catalog is invalid: {e}"))
    })
}

pub fn resolve_geometry(name: &str) -> Result<GeometryEntry> {
    if let Some(g) = builtin().geometry(name) {
        return Ok(g.clone());
    }
    if std::path::Path::new(name).is_file() {
        return load_geometry(name);
    }
    Err(Error::NotFound(name.to_string()))
}

pub fn resolve_vector_entry(name: &str) -> Result<VectorEntry> {
    if let Some(v) = builtin().vector(name) {
        return Ok(v.clone());
    }
    if std::path::Path::new(name).is_file() {
        return load_vector(name);
    }
    Err(Error::NotFound(name.to_string()))
}

/// Resolves `name` and binds it to the geometry's chart.
pub fn resolve_vector(name: &str, geom: &GeometrySpec) -> Result<VectorFieldSpec> {
    resolve_vector_entry(name)?.bind(geom.chart())
}

/// Non-Killing (metric, vector) pairs used for the flow-oracle convergence study.
pub const ORACLE_PAIRS: [(&str, &str); 5] = [
    ("minkowski4", "dilation"),
    ("minkowski4", "quad_x"),
    ("sphere2", "sph_shift_theta"),
    ("schwarzschild", "schw_trans_x"),
    ("flrw_flat", "boost_tx"),
];
