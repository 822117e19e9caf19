//! JSON formats: frame files, decomposition and invariant reports, witnesses.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::angles::principal_angles;
use crate::decompose::Decomposition;
use crate::hqspace::HQSpace;
use crate::orbit::{characteristic_deviation, classify, orbit_invariant, OrbitInvariant, SpnWitness};
use crate::subspace::{orthonormalize, Frame};
use crate::{Error, Result, Tolerances};

/// On-disk frame: `n` quaternionic dimensions and a list of columns of
/// length `4n`, not necessarily orthonormal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    pub n: usize,
    pub columns: Vec<Vec<f64>>,
}

/// A loaded frame with the record of how far the input was from an
/// orthonormal basis.
#[derive(Clone, Debug)]
pub struct LoadedFrame {
    pub n: usize,
    pub frame: Frame<f64>,
    /// `max |BᵀB - Id|` of the columns as given.
    pub input_residual: f64,
    /// Columns dropped as linearly dependent.
    pub dropped: usize,
}

pub fn parse_frame(text: &str, rank_tol: f64) -> Result<LoadedFrame> {
    let file: FrameFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.n == 0 {
        return Err(Error::Parse("\"n\" must be positive".into()));
    }
    let rows = 4 * file.n;
    for (k, c) in file.columns.iter().enumerate() {
        if c.len() != rows {
            return Err(Error::Parse(format!("column {k} has {} entries, expected 4n = {rows}", c.len())));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse(format!("column {k} has a non-finite entry")));
        }
    }
    let raw = DMatrix::from_fn(rows, file.columns.len(), |i, j| file.columns[j][i]);
    let m = raw.ncols();
    let input_residual = if m == 0 { 0.0 } else { (raw.transpose() * &raw - DMatrix::identity(m, m)).amax() };
    let basis = orthonormalize(&raw, rank_tol);
    let dropped = m - basis.ncols();
    Ok(LoadedFrame { n: file.n, frame: Frame::from_orthonormal(basis), input_residual, dropped })
}

pub fn load_frame(path: &std::path::Path, rank_tol: f64) -> Result<LoadedFrame> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_frame(&text, rank_tol).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn frame_file(n: usize, frame: &Frame<f64>) -> FrameFile {
    FrameFile { n, columns: frame.basis.column_iter().map(|c| c.iter().cloned().collect()).collect() }
}

pub fn tolerances_json(tol: &Tolerances<f64>) -> Value {
    json!({
        "rank": tol.rank,
        "snap": tol.snap,
        "compare": tol.compare,
        "iso": tol.iso,
        "cluster_gap": tol.cluster_gap,
        "clamp": tol.clamp,
    })
}

/// Structures are reported in admissible-basis coordinates.
pub fn decomposition_json(space: &HQSpace<f64>, dec: &Decomposition<f64>) -> Value {
    let sigma: Vec<Value> = dec
        .sigma
        .iter()
        .map(|s| {
            let c = space.to_basis_coords(&s.structure);
            json!({
                "structure": [c.x, c.y, c.z],
                "dim": s.frame.dim(),
                "multiangle": s.multiangle(),
            })
        })
        .collect();
    json!({
        "U_Q_dim": dec.quaternionic.dim(),
        "sigma": sigma,
        "U_R_dim": dec.real.dim(),
        "residuals": { "orthogonality": dec.orthogonality_residual },
        "warnings": dec.warnings,
    })
}

pub fn invariant_data(inv: &OrbitInvariant<f64>) -> Value {
    match inv {
        OrbitInvariant::TwoPlane { measure } => json!({ "imaginary_measure": [measure.x, measure.y, measure.z] }),
        OrbitInvariant::Ic4 { angles, xi, chi, eta, delta } => {
            json!({ "angles": angles, "xi": xi, "chi": chi, "eta": eta, "delta": delta })
        }
        OrbitInvariant::Complex { structure, multiangle } => {
            let c = structure.coeffs;
            json!({ "structure": [c.x, c.y, c.z], "multiangle": multiangle })
        }
        OrbitInvariant::SigmaComplex { parts } => {
            let parts: Vec<Value> = parts
                .iter()
                .map(|(s, m)| json!({ "structure": [s.coeffs.x, s.coeffs.y, s.coeffs.z], "multiangle": m }))
                .collect();
            json!({ "parts": parts })
        }
        OrbitInvariant::Quaternionic { dim } | OrbitInvariant::Rhps { dim } => json!({ "dim": dim }),
    }
}

pub fn invariant_json(inv: &OrbitInvariant<f64>, tol: &Tolerances<f64>) -> Value {
    json!({ "class": inv.tag(), "data": invariant_data(inv), "tolerances": tolerances_json(tol) })
}

pub fn witness_json(w: &SpnWitness<f64>) -> Value {
    let rows: Vec<Vec<f64>> = w.matrix.row_iter().map(|r| r.iter().cloned().collect()).collect();
    json!({
        "matrix": rows,
        "verification": {
            "max_principal_angle": w.max_principal_angle,
            "commutator_norms": w.commutator_norms,
            "orthogonality_residual": w.orthogonality_residual,
        },
    })
}

/// Everything `analyze` reports about one subspace.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub dim: usize,
    pub class: &'static str,
    pub invariant: std::result::Result<OrbitInvariant<f64>, String>,
    /// Principal angles between `U` and `I'U`, `J'U`, `K'U`.
    pub structure_angles: [Vec<f64>; 3],
    pub characteristic_deviation: Option<f64>,
}

pub fn analyze(space: &HQSpace<f64>, u: &Frame<f64>, tol: &Tolerances<f64>) -> Result<Analysis> {
    let class = if u.dim() == 0 {
        "empty"
    } else if u.dim() == 1 {
        "line"
    } else {
        classify(space, u, tol)?.class.name()
    };
    let invariant = orbit_invariant(space, u, tol).map_err(|e| e.to_string());
    let structure_angles = [space.struct_i(), space.struct_j(), space.struct_k()]
        .map(|s| principal_angles(u, &u.apply(&s)).angles);
    Ok(Analysis {
        dim: u.dim(),
        class,
        invariant,
        structure_angles,
        characteristic_deviation: characteristic_deviation(u).ok(),
    })
}

pub fn analysis_json(a: &Analysis, tol: &Tolerances<f64>) -> Value {
    let invariant = match &a.invariant {
        Ok(inv) => json!({ "class": inv.tag(), "data": invariant_data(inv) }),
        Err(e) => json!({ "error": e }),
    };
    json!({
        "dim": a.dim,
        "class": a.class,
        "invariant": invariant,
        "angles": {
            "I": a.structure_angles[0],
            "J": a.structure_angles[1],
            "K": a.structure_angles[2],
            "characteristic_deviation": a.characteristic_deviation,
        },
        "tolerances": tolerances_json(tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_frame("{\n  \"n\": 1,\n  \"columns\": [[1, 0, 0]\n", 1e-8).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn parse_orthonormalizes_and_records_residual() {
        let f = parse_frame(r#"{"n": 1, "columns": [[2, 0, 0, 0], [1, 1, 0, 0], [3, 3, 0, 0]]}"#, 1e-8).unwrap();
        assert_eq!(f.frame.dim(), 2);
        assert_eq!(f.dropped, 1);
        assert!(f.input_residual > 1.0);
        assert!(f.frame.orthonormality_residual() < 1e-15);
    }

    #[test]
    fn wrong_column_length_is_rejected() {
        let err = parse_frame(r#"{"n": 2, "columns": [[1, 0, 0, 0]]}"#, 1e-8).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn frame_file_round_trip() {
        let u = crate::lab::make_rhps::<f64>(2, 2).unwrap();
        let text = serde_json::to_string(&frame_file(2, &u)).unwrap();
        let back = parse_frame(&text, 1e-8).unwrap();
        assert_eq!(back.frame, u);
        assert_eq!(back.input_residual, 0.0);
    }
}
