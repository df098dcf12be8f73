//! Structured-text formats shared by the command-line tools.
//!
//! Every document is JSON with a fixed field layout; unknown fields are
//! ignored on input, so annotated or combined files stay readable. The
//! writers format floats with 17 significant digits, which reproduces any
//! finite double bit-exactly on re-parse and keeps repeated runs
//! byte-identical. Tables (wavefields, recovery diagnostics) export as
//! CSV; CSV is export-only and never read back.

use serde::Deserialize;

use crate::coeffs::{ControlVector, JacobiCoefficients};
use crate::error::Result;
use crate::forward::Wavefield;
use crate::inverse::RecoveryStep;
use crate::operators::ResponseVector;
use crate::spectral::{measure_from_spectral_data, DiscreteMeasure, SpectralData};

/// `{:.16e}`: one leading digit plus 16 fractional digits, enough to
/// identify every finite double uniquely.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| format_float(x)).collect();
    format!("[{}]", items.join(", "))
}

#[derive(Deserialize)]
struct CoefficientsFile {
    a: Vec<f64>,
    b: Vec<f64>,
    f: Option<Vec<f64>>,
}

/// Coefficient window plus the optional boundary control a document may
/// carry for simulation commands.
pub struct CoefficientDocument {
    pub coeffs: JacobiCoefficients,
    pub control: Option<ControlVector>,
}

fn build_coefficients(a: Vec<f64>, mut b: Vec<f64>) -> Result<JacobiCoefficients> {
    // A file holding one fewer diagonal than off-diagonal entry is a
    // recovery result; the missing trailing entry is inert for every
    // response the window can produce, so pad it with zero.
    if b.len() + 1 == a.len() {
        b.push(0.0);
    }
    JacobiCoefficients::new(a, b)
}

/// Parses `{"a": […], "b": […]}`. The diagonal list may be one entry
/// shorter than the off-diagonal list; the gap is padded with zero.
pub fn parse_coefficients(text: &str) -> Result<JacobiCoefficients> {
    let doc: CoefficientsFile = serde_json::from_str(text)?;
    build_coefficients(doc.a, doc.b)
}

/// Parses a coefficient document together with its optional `"f"` control
/// field.
pub fn parse_coefficient_document(text: &str) -> Result<CoefficientDocument> {
    let doc: CoefficientsFile = serde_json::from_str(text)?;
    let control = doc.f.map(ControlVector::new).transpose()?;
    Ok(CoefficientDocument {
        coeffs: build_coefficients(doc.a, doc.b)?,
        control,
    })
}

pub fn write_coefficients(c: &JacobiCoefficients) -> String {
    format!(
        "{{\n  \"a\": {},\n  \"b\": {}\n}}\n",
        format_list(c.a_slice()),
        format_list(c.b_slice())
    )
}

#[derive(Deserialize)]
struct ResponseFile {
    r: Vec<f64>,
}

/// Parses `{"r": […]}`.
pub fn parse_response(text: &str) -> Result<ResponseVector> {
    let doc: ResponseFile = serde_json::from_str(text)?;
    ResponseVector::new(doc.r)
}

pub fn write_response(r: &ResponseVector) -> String {
    format!("{{\n  \"r\": {}\n}}\n", format_list(r.as_slice()))
}

#[derive(Deserialize)]
struct MeasureFile {
    atoms: Vec<(f64, f64)>,
}

/// Parses `{"atoms": [[point, mass], …]}`.
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let doc: MeasureFile = serde_json::from_str(text)?;
    DiscreteMeasure::new(doc.atoms)
}

fn format_atoms(mu: &DiscreteMeasure) -> String {
    let items: Vec<String> = mu
        .atoms()
        .iter()
        .map(|&(p, m)| format!("[{}, {}]", format_float(p), format_float(m)))
        .collect();
    format!("[{}]", items.join(", "))
}

pub fn write_measure(mu: &DiscreteMeasure) -> String {
    format!("{{\n  \"atoms\": {}\n}}\n", format_atoms(mu))
}

/// Serializes eigenvalues and weights together with the atoms of the
/// induced measure, so the output doubles as a valid measure file.
pub fn write_spectral_data(sd: &SpectralData) -> Result<String> {
    let mu = measure_from_spectral_data(sd)?;
    Ok(format!(
        "{{\n  \"lambdas\": {},\n  \"rhos\": {},\n  \"a0\": {},\n  \"atoms\": {}\n}}\n",
        format_list(&sd.lambdas),
        format_list(&sd.rhos),
        format_float(sd.a0),
        format_atoms(&mu)
    ))
}

/// Full grid dump, header `n,t,value`, site-major ordering.
pub fn wavefield_csv(w: &Wavefield) -> String {
    let mut out = String::from("n,t,value\n");
    for n in 0..=w.n_max() {
        for t in 0..=w.t_max() {
            out.push_str(&format!("{},{},{}\n", n, t, format_float(w.value(n, t))));
        }
    }
    out
}

/// Per-horizon recovery table, header `k,det_cbar,det_cbar_sub,a,b`. The
/// diagonal column is empty on rows that do not determine one (the last
/// recovered site has no diagonal entry of its own).
pub fn diagnostics_csv(steps: &[RecoveryStep]) -> String {
    let mut out = String::from("k,det_cbar,det_cbar_sub,a,b\n");
    for s in steps {
        let b_cell = s.b.map(format_float).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.k,
            format_float(s.det_cbar),
            format_float(s.det_cbar_sub),
            format_float(s.a),
            b_cell
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::forward::step_forward;
    use crate::inverse::recover_factorization;
    use crate::operators::response_vector;
    use crate::spectral::{spectral_data, BoundaryProblem};

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(format_float(2.0), "2.0000000000000000e0");
        assert_eq!(format_float(-14.4), "-1.4400000000000000e1");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn floats_survive_a_write_parse_cycle_bit_exactly() {
        let awkward = vec![
            0.1,
            1.0 / 3.0,
            2.0_f64.sqrt(),
            1e-300,
            -7.105427357601002e-15,
            f64::MIN_POSITIVE,
            f64::MAX,
        ];
        let r = ResponseVector::new(awkward.clone()).unwrap();
        let back = parse_response(&write_response(&r)).unwrap();
        for (x, y) in awkward.iter().zip(back.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn coefficient_files_roundtrip() {
        let c = JacobiCoefficients::new(vec![2.0, 1.0, 3.0], vec![3.0, 0.0, -1.0]).unwrap();
        let text = write_coefficients(&c);
        let back = parse_coefficients(&text).unwrap();
        assert_eq!(back.a_slice(), c.a_slice());
        assert_eq!(back.b_slice(), c.b_slice());
        assert_eq!(write_coefficients(&back), text);
    }

    #[test]
    fn short_diagonal_lists_are_padded() {
        let c = parse_coefficients(r#"{"a": [2.0, 1.0, 3.0], "b": [3.0, 0.0]}"#).unwrap();
        assert_eq!(c.b_slice(), &[3.0, 0.0, 0.0]);
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let text = r#"{"a": [1.0], "b": [0.5], "comment": "hand-made", "seed": 7}"#;
        assert!(parse_coefficients(text).is_ok());
    }

    #[test]
    fn control_field_is_optional() {
        let bare = parse_coefficient_document(r#"{"a": [1.0], "b": [0.0]}"#).unwrap();
        assert!(bare.control.is_none());
        let with = parse_coefficient_document(r#"{"a": [1.0], "b": [0.0], "f": [1.0, -2.0]}"#)
            .unwrap();
        assert_eq!(with.control.unwrap().as_slice(), &[1.0, -2.0]);
    }

    #[test]
    fn malformed_documents_report_parse_errors() {
        assert!(matches!(
            parse_coefficients("{\"a\": [1.0]"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse_response(r#"{"a": [1.0], "b": [0.0]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse_measure(r#"{"atoms": [[0.0]]}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn invalid_values_surface_domain_errors() {
        assert!(matches!(
            parse_coefficients(r#"{"a": [-1.0], "b": [0.0]}"#),
            Err(Error::NonPositiveOffDiagonal { index: 0, .. })
        ));
        assert!(matches!(
            parse_measure(r#"{"atoms": [[0.0, -1.0]]}"#),
            Err(Error::NonPositiveMass { index: 0, .. })
        ));
    }

    #[test]
    fn measure_files_roundtrip_sorted() {
        let mu = DiscreteMeasure::new(vec![(1.5, 0.25), (-0.5, 0.75)]).unwrap();
        let text = write_measure(&mu);
        let back = parse_measure(&text).unwrap();
        assert_eq!(back.atoms(), mu.atoms());
        assert!(text.starts_with("{\n  \"atoms\": [[-5.0000000000000000e-1"));
    }

    #[test]
    fn spectral_document_is_a_valid_measure_file() {
        let c = JacobiCoefficients::new(vec![2.0, 1.0, 3.0], vec![3.0, 0.0, -1.0]).unwrap();
        let sd = spectral_data(&BoundaryProblem::new(c, 2, 0.0).unwrap()).unwrap();
        let text = write_spectral_data(&sd).unwrap();
        let mu = parse_measure(&text).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert!((mu.total_mass() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wavefield_export_has_one_row_per_grid_point() {
        let c = JacobiCoefficients::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let w = step_forward(&c, &ControlVector::delta(3), 2).unwrap();
        let csv = wavefield_csv(&w);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,t,value");
        assert_eq!(lines.len(), 1 + (w.n_max() + 1) * 3);
        assert_eq!(lines[1], "0,0,1.0000000000000000e0");
    }

    #[test]
    fn diagnostics_export_leaves_the_first_diagonal_cell_empty() {
        let c = JacobiCoefficients::new(vec![2.0, 1.0, 3.0], vec![3.0, 0.0, -1.0]).unwrap();
        let r = response_vector(&c, 5).unwrap();
        let rec = recover_factorization(&r, 3).unwrap();
        let csv = diagnostics_csv(&rec.steps);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,det_cbar,det_cbar_sub,a,b");
        assert_eq!(lines.len(), 1 + rec.steps.len());
        assert!(lines[1].ends_with(','), "k = 0 determines no diagonal");
    }
}
