//! Relative numerical error between pressure fields and the mesh study table.
//!
//! ```text
//! e_L2  = sqrt( Σ_f Σ_g w_g |p_num - p_ref|² / Σ_f Σ_g w_g |p_ref|² )
//! e_Linf = max_{f,g} |p_num - p_ref| / max_{f,g} |p_ref|
//! ```
//!
//! `w_g` are the grid quadrature weights; frequencies are weighted
//! uniformly. For the ipsilateral and contralateral subsets both numerator
//! and denominator are restricted to the subset.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::bem::{calc_field, BemSettings, Excitation};
use crate::error::{Error, Result};
use crate::field::PressureField;
use crate::grids::{EvalGrid, Hemisphere};
use crate::mesh::TriangleMesh;
use crate::physics::Medium;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subset {
    All,
    Ipsi,
    Contra,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::All, Subset::Ipsi, Subset::Contra];

    pub fn as_str(&self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Ipsi => "ipsi",
            Subset::Contra => "contra",
        }
    }

    pub fn indices(&self, grid: &EvalGrid) -> Vec<usize> {
        match self {
            Subset::All => (0..grid.len()).collect(),
            Subset::Ipsi => grid.indices(Hemisphere::Ipsilateral),
            Subset::Contra => grid.indices(Hemisphere::Contralateral),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L2,
    Linf,
}

fn check(p_num: &PressureField, p_ref: &PressureField, grid: &EvalGrid) -> Result<()> {
    p_num.check_aligned(p_ref)?;
    if p_ref.num_points != grid.len() {
        return Err(Error::Misaligned(format!(
            "fields have {} points, grid has {}",
            p_ref.num_points,
            grid.len()
        )));
    }
    Ok(())
}

/// Weighted squared norms `(Σ w |Δ|², Σ w |ref|²)` over the given frequency
/// rows and points.
fn l2_sums(
    p_num: &PressureField,
    p_ref: &PressureField,
    grid: &EvalGrid,
    freqs: &[usize],
    idx: &[usize],
) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for &f in freqs {
        let (a, b) = (p_num.row(f), p_ref.row(f));
        for &i in idx {
            let w = grid.weights[i];
            num += w * (a[i] - b[i]).norm_sqr();
            den += w * b[i].norm_sqr();
        }
    }
    (num, den)
}

fn linf_parts(p_num: &PressureField, p_ref: &PressureField, freqs: &[usize], idx: &[usize]) -> (f64, f64) {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for &f in freqs {
        let (a, b) = (p_num.row(f), p_ref.row(f));
        for &i in idx {
            num = num.max((a[i] - b[i]).norm());
            den = den.max(b[i].norm());
        }
    }
    (num, den)
}

fn ratio(num: f64, den: f64, norm: Norm) -> Result<f64> {
    if !(den > 0.0) {
        return Err(Error::ZeroReference);
    }
    Ok(match norm {
        Norm::L2 => (num / den).sqrt(),
        Norm::Linf => num / den,
    })
}

/// Relative error over all frequencies of the fields.
pub fn relative_error(
    p_num: &PressureField,
    p_ref: &PressureField,
    grid: &EvalGrid,
    subset: Subset,
    norm: Norm,
) -> Result<f64> {
    check(p_num, p_ref, grid)?;
    let freqs: Vec<usize> = (0..p_ref.num_frequencies()).collect();
    relative_error_at(p_num, p_ref, grid, subset, norm, &freqs)
}

fn relative_error_at(
    p_num: &PressureField,
    p_ref: &PressureField,
    grid: &EvalGrid,
    subset: Subset,
    norm: Norm,
    freqs: &[usize],
) -> Result<f64> {
    let idx = subset.indices(grid);
    let (num, den) = match norm {
        Norm::L2 => l2_sums(p_num, p_ref, grid, freqs, &idx),
        Norm::Linf => linf_parts(p_num, p_ref, freqs, &idx),
    };
    ratio(num, den, norm)
}

/// Unnormalized `max |p_num - p_ref|` over a subset and all frequencies.
pub fn linf_numerator(p_num: &PressureField, p_ref: &PressureField, grid: &EvalGrid, subset: Subset) -> Result<f64> {
    check(p_num, p_ref, grid)?;
    let freqs: Vec<usize> = (0..p_ref.num_frequencies()).collect();
    Ok(linf_parts(p_num, p_ref, &freqs, &subset.indices(grid)).0)
}

/// L2 and L∞ errors for one subset.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SubsetErrors {
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyErrors {
    pub frequency: f64,
    pub all: SubsetErrors,
    pub ipsi: SubsetErrors,
    pub contra: SubsetErrors,
}

/// Errors aggregated over all frequencies plus the per-frequency breakdown.
/// Values are fractions (0.1 = 10 %).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub all: SubsetErrors,
    pub ipsi: SubsetErrors,
    pub contra: SubsetErrors,
    pub per_frequency: Vec<FrequencyErrors>,
}

impl ErrorReport {
    /// `e_L∞ / e_L2` on the full grid.
    pub fn ratio(&self) -> f64 {
        self.all.linf / self.all.l2
    }

    pub fn subset(&self, s: Subset) -> SubsetErrors {
        match s {
            Subset::All => self.all,
            Subset::Ipsi => self.ipsi,
            Subset::Contra => self.contra,
        }
    }
}

fn subset_errors(
    p_num: &PressureField,
    p_ref: &PressureField,
    grid: &EvalGrid,
    subset: Subset,
    freqs: &[usize],
) -> Result<SubsetErrors> {
    if subset.indices(grid).is_empty() {
        return Ok(SubsetErrors::default());
    }
    Ok(SubsetErrors {
        l2: relative_error_at(p_num, p_ref, grid, subset, Norm::L2, freqs)?,
        linf: relative_error_at(p_num, p_ref, grid, subset, Norm::Linf, freqs)?,
    })
}

pub fn error_report(p_num: &PressureField, p_ref: &PressureField, grid: &EvalGrid) -> Result<ErrorReport> {
    check(p_num, p_ref, grid)?;
    let all_f: Vec<usize> = (0..p_ref.num_frequencies()).collect();
    let per_frequency = all_f
        .iter()
        .map(|&f| {
            Ok(FrequencyErrors {
                frequency: p_ref.frequencies[f],
                all: subset_errors(p_num, p_ref, grid, Subset::All, &[f])?,
                ipsi: subset_errors(p_num, p_ref, grid, Subset::Ipsi, &[f])?,
                contra: subset_errors(p_num, p_ref, grid, Subset::Contra, &[f])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport {
        all: subset_errors(p_num, p_ref, grid, Subset::All, &all_f)?,
        ipsi: subset_errors(p_num, p_ref, grid, Subset::Ipsi, &all_f)?,
        contra: subset_errors(p_num, p_ref, grid, Subset::Contra, &all_f)?,
        per_frequency,
    })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("pearson needs two equal-length series of length >= 2".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("pearson of a constant series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// One mesh of a study.
#[derive(Debug, Clone)]
pub struct StudyVariant {
    pub label: String,
    pub family: String,
    pub lmin_mm: f64,
    pub lmax_mm: f64,
    pub mesh: Arc<TriangleMesh>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub label: String,
    pub family: String,
    pub lmin_mm: f64,
    pub lmax_mm: f64,
    pub faces: usize,
    pub errors: ErrorReport,
    pub seconds: f64,
}

pub const STUDY_CSV_HEADER: &str =
    "label,family,lmin,lmax,nFaces,eL2_all,eL2_ipsi,eL2_contra,eLinf_all,ratio,seconds";

impl StudyRow {
    pub fn from_field(
        variant: &StudyVariant,
        field: &PressureField,
        reference: &PressureField,
        grid: &EvalGrid,
        seconds: f64,
    ) -> Result<Self> {
        Ok(Self {
            label: variant.label.clone(),
            family: variant.family.clone(),
            lmin_mm: variant.lmin_mm,
            lmax_mm: variant.lmax_mm,
            faces: variant.mesh.num_faces(),
            errors: error_report(field, reference, grid)?,
            seconds,
        })
    }

    /// CSV line; errors in percent.
    pub fn csv_row(&self) -> String {
        let e = &self.errors;
        let ratio = if e.all.l2 > 0.0 { e.ratio() } else { 0.0 };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.label,
            self.family,
            self.lmin_mm,
            self.lmax_mm,
            self.faces,
            100.0 * e.all.l2,
            100.0 * e.ipsi.l2,
            100.0 * e.contra.l2,
            100.0 * e.all.linf,
            ratio,
            self.seconds
        )
    }
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from(STUDY_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Solve every variant and compare it with `reference`. Returns the table
/// rows and the computed fields in variant order.
pub fn error_study(
    variants: &[StudyVariant],
    excitation: &Excitation,
    grid: &EvalGrid,
    frequencies: &[f64],
    reference: &PressureField,
    medium: Medium,
    settings: &BemSettings,
) -> Result<(Vec<StudyRow>, Vec<PressureField>)> {
    let mut rows = Vec::with_capacity(variants.len());
    let mut fields = Vec::with_capacity(variants.len());
    for v in variants {
        let t = Instant::now();
        let (field, _) = calc_field(v.mesh.clone(), excitation, grid, frequencies, medium, settings)?;
        let seconds = t.elapsed().as_secs_f64();
        rows.push(StudyRow::from_field(v, &field, reference, grid, seconds)?);
        fields.push(field);
    }
    Ok((rows, fields))
}

/// Convenience: `Σ w |p|²` of one frequency row, used for sanity checks.
pub fn weighted_energy(row: &[Complex64], grid: &EvalGrid) -> f64 {
    row.iter().zip(&grid.weights).map(|(p, w)| w * p.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::make_eqa_grid;
    use proptest::prelude::*;

    fn grid() -> EvalGrid {
        make_eqa_grid(1.2, 30.0, 60.0).unwrap()
    }

    fn field_from(seed: u64, grid: &EvalGrid, nf: usize) -> PressureField {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let rows = (0..nf)
            .map(|_| (0..grid.len()).map(|_| Complex64::new(next(), next())).collect())
            .collect();
        PressureField::from_rows((0..nf).map(|f| 500.0 * (f + 1) as f64).collect(), rows).unwrap()
    }

    fn map(f: &PressureField, op: impl Fn(Complex64) -> Complex64) -> PressureField {
        PressureField { values: f.values.iter().map(|v| op(*v)).collect(), ..f.clone() }
    }

    #[test]
    fn identities() {
        let g = grid();
        let p = field_from(1, &g, 3);
        for subset in Subset::ALL {
            for norm in [Norm::L2, Norm::Linf] {
                assert_eq!(relative_error(&p, &p, &g, subset, norm).unwrap(), 0.0);
                let neg = map(&p, |v| -v);
                assert_eq!(relative_error(&neg, &p, &g, subset, norm).unwrap(), 2.0);
                let scaled = map(&p, |v| v * 1.1);
                let e = relative_error(&scaled, &p, &g, subset, norm).unwrap();
                assert!((e - 0.1).abs() < 1e-14, "{e}");
            }
        }
    }

    #[test]
    fn errors() {
        let g = grid();
        let p = field_from(1, &g, 2);
        let zero = map(&p, |_| Complex64::new(0.0, 0.0));
        assert!(matches!(relative_error(&p, &zero, &g, Subset::All, Norm::L2), Err(Error::ZeroReference)));
        let other = field_from(2, &g, 3);
        assert!(matches!(relative_error(&p, &other, &g, Subset::All, Norm::L2), Err(Error::Misaligned(_))));
        let small = make_eqa_grid(1.2, 90.0, 90.0).unwrap();
        assert!(relative_error(&p, &p, &small, Subset::All, Norm::L2).is_err());
    }

    #[test]
    fn subset_linf_numerators() {
        let g = grid();
        let a = field_from(3, &g, 2);
        let b = field_from(4, &g, 2);
        let all = linf_numerator(&a, &b, &g, Subset::All).unwrap();
        let ipsi = linf_numerator(&a, &b, &g, Subset::Ipsi).unwrap();
        let contra = linf_numerator(&a, &b, &g, Subset::Contra).unwrap();
        assert_eq!(all, ipsi.max(contra));
    }

    #[test]
    fn report_and_study_table() {
        let g = grid();
        let a = field_from(5, &g, 2);
        let b = field_from(6, &g, 2);
        let r = error_report(&a, &b, &g).unwrap();
        assert_eq!(r.per_frequency.len(), 2);
        assert!(r.all.l2 > 0.0 && r.ipsi.l2 > 0.0 && r.contra.linf > 0.0);
        assert!(r.ratio() > 0.0);
        let v = StudyVariant {
            label: "x".into(),
            family: "UNI".into(),
            lmin_mm: 10.0,
            lmax_mm: 10.0,
            mesh: Arc::new(crate::mesh::make_sphere(0.1, 40.0).unwrap()),
        };
        let row = StudyRow::from_field(&v, &b, &b, &g, 1.5).unwrap();
        assert_eq!(row.errors.all.l2, 0.0);
        let csv = study_csv(&[row]);
        assert!(csv.starts_with(STUDY_CSV_HEADER));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 11);
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]).unwrap() - 0.9986).abs() < 1e-3);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_invariance(seed in 0u64..10_000, re in -5.0f64..5.0, im in -5.0f64..5.0) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let c = Complex64::new(re, im);
            let g = grid();
            let a = field_from(seed, &g, 2);
            let b = field_from(seed + 1, &g, 2);
            let (ca, cb) = (map(&a, |v| v * c), map(&b, |v| v * c));
            for subset in Subset::ALL {
                for norm in [Norm::L2, Norm::Linf] {
                    let e0 = relative_error(&a, &b, &g, subset, norm).unwrap();
                    let e1 = relative_error(&ca, &cb, &g, subset, norm).unwrap();
                    prop_assert!((e0 - e1).abs() <= 1e-12 * e0);
                }
            }
        }

        #[test]
        fn triangle_inequality(seed in 0u64..10_000) {
            let g = grid();
            let p = field_from(seed, &g, 2);
            let q = field_from(seed + 7, &g, 2);
            let r = field_from(seed + 13, &g, 2);
            let norm = |f: &PressureField| -> f64 {
                (0..2).map(|i| weighted_energy(f.row(i), &g)).sum::<f64>().sqrt()
            };
            let e = |x: &PressureField, y: &PressureField| {
                relative_error(x, y, &g, Subset::All, Norm::L2).unwrap()
            };
            let lhs = e(&p, &r);
            let rhs = e(&p, &q) * norm(&q) / norm(&r) + e(&q, &r);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
