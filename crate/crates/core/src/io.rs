//! JSON and CSV formats.
//!
//! Complex numbers are `[re, im]`, points of `G` are `[s_re, s_im, p_re, p_im]`
//! and matrices are flat row-major lists of complex numbers. Floats are
//! written in scientific notation with 17 significant digits so that every
//! value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{ExtensionResult, VonNeumannAudit};
use crate::geometry::GPoint;
use crate::kernels::{KernelMatrix, NodeSet};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::pick::{DecompositionCertificate, DualCertificate, PickProblem};
use crate::realization::{evaluate, Colligation, RealizedFunction};

pub type Complex = [f64; 2];
pub type Point = [f64; 4];

fn cx(z: C64) -> Complex {
    [z.re, z.im]
}

fn from_cx(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn point(x: &GPoint) -> Point {
    [x.s().re, x.s().im, x.p().re, x.p().im]
}

fn from_point(x: &Point) -> Result<GPoint> {
    GPoint::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))
}

fn flat(m: &ComplexMatrix) -> Vec<Complex> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(cx(m[(r, c)]));
        }
    }
    out
}

fn square(entries: &[Complex], what: &str) -> Result<ComplexMatrix> {
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n * n != entries.len() {
        return Err(Error::Dimension(format!(
            "{what} has {} entries, not a square number",
            entries.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| from_cx(&entries[r * n + c])))
}

fn nodes_json(nodes: &NodeSet) -> Vec<Point> {
    nodes.points().iter().map(point).collect()
}

fn nodes_from_json(points: &[Point]) -> Result<NodeSet> {
    NodeSet::new(points.iter().map(from_point).collect::<Result<_>>()?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemJson {
    pub nodes: Vec<Point>,
    pub targets: Vec<Complex>,
}

impl From<&PickProblem> for ProblemJson {
    fn from(p: &PickProblem) -> Self {
        ProblemJson {
            nodes: nodes_json(p.nodes()),
            targets: p.targets().iter().copied().map(cx).collect(),
        }
    }
}

impl TryFrom<&ProblemJson> for PickProblem {
    type Error = Error;
    fn try_from(j: &ProblemJson) -> Result<Self> {
        PickProblem::new(nodes_from_json(&j.nodes)?, j.targets.iter().map(from_cx).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelJson {
    pub nodes: Vec<Point>,
    pub gram: Vec<Complex>,
}

impl From<&KernelMatrix> for KernelJson {
    fn from(k: &KernelMatrix) -> Self {
        KernelJson {
            nodes: nodes_json(k.nodes()),
            gram: flat(k.gram().as_matrix()),
        }
    }
}

impl TryFrom<&KernelJson> for KernelMatrix {
    type Error = Error;
    fn try_from(j: &KernelJson) -> Result<Self> {
        let gram = HermitianMatrix::new(square(&j.gram, "gram")?)?;
        KernelMatrix::new(nodes_from_json(&j.nodes)?, gram)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimalJson {
    pub alphas: Vec<Complex>,
    pub blocks: Vec<Vec<Complex>>,
    pub residual: f64,
    pub scale: f64,
}

impl From<&DecompositionCertificate> for PrimalJson {
    fn from(c: &DecompositionCertificate) -> Self {
        PrimalJson {
            alphas: c.alphas.iter().copied().map(cx).collect(),
            blocks: c.blocks.iter().map(|b| flat(b.as_matrix())).collect(),
            residual: c.residual,
            scale: c.scale,
        }
    }
}

impl TryFrom<&PrimalJson> for DecompositionCertificate {
    type Error = Error;
    fn try_from(j: &PrimalJson) -> Result<Self> {
        if j.alphas.len() != j.blocks.len() {
            return Err(Error::Dimension(format!(
                "{} alphas but {} blocks",
                j.alphas.len(),
                j.blocks.len()
            )));
        }
        Ok(DecompositionCertificate {
            alphas: j.alphas.iter().map(from_cx).collect(),
            blocks: j
                .blocks
                .iter()
                .map(|b| HermitianMatrix::new(square(b, "block")?))
                .collect::<Result<_>>()?,
            residual: j.residual,
            scale: j.scale,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualJson {
    pub kernel: KernelJson,
    pub violation: f64,
    pub witness: Vec<Complex>,
    pub admissibility_slack: f64,
    pub scale: f64,
}

impl From<&DualCertificate> for DualJson {
    fn from(c: &DualCertificate) -> Self {
        DualJson {
            kernel: (&c.kernel).into(),
            violation: c.violation,
            witness: c.witness.iter().copied().map(cx).collect(),
            admissibility_slack: c.admissibility_slack,
            scale: c.scale,
        }
    }
}

impl TryFrom<&DualJson> for DualCertificate {
    type Error = Error;
    fn try_from(j: &DualJson) -> Result<Self> {
        Ok(DualCertificate {
            kernel: (&j.kernel).try_into()?,
            violation: j.violation,
            witness: j.witness.iter().map(from_cx).collect(),
            admissibility_slack: j.admissibility_slack,
            scale: j.scale,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColligationJson {
    pub alphas: Vec<Complex>,
    pub block_dims: Vec<usize>,
    #[serde(rename = "A")]
    pub a: Complex,
    #[serde(rename = "B")]
    pub b: Vec<Complex>,
    #[serde(rename = "C")]
    pub c: Vec<Complex>,
    #[serde(rename = "D")]
    pub d: Vec<Complex>,
    pub scale: f64,
    pub isometry_defect: f64,
}

impl From<&Colligation> for ColligationJson {
    fn from(c: &Colligation) -> Self {
        ColligationJson {
            alphas: c.alphas.iter().copied().map(cx).collect(),
            block_dims: c.block_dims.clone(),
            a: cx(c.a),
            b: c.b.iter().copied().map(cx).collect(),
            c: c.c.iter().copied().map(cx).collect(),
            d: flat(&c.d),
            scale: c.scale,
            isometry_defect: c.isometry_defect,
        }
    }
}

impl TryFrom<&ColligationJson> for Colligation {
    type Error = Error;
    fn try_from(j: &ColligationJson) -> Result<Self> {
        let d = if j.d.is_empty() {
            ComplexMatrix::zeros(0, 0)
        } else {
            square(&j.d, "D")?
        };
        let c = Colligation {
            alphas: j.alphas.iter().map(from_cx).collect(),
            block_dims: j.block_dims.clone(),
            a: from_cx(&j.a),
            b: j.b.iter().map(from_cx).collect(),
            c: j.c.iter().map(from_cx).collect(),
            d,
            scale: j.scale,
            isometry_defect: j.isometry_defect,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditJson {
    pub trials: usize,
    pub max_ratio: f64,
}

impl From<&VonNeumannAudit> for AuditJson {
    fn from(a: &VonNeumannAudit) -> Self {
        AuditJson {
            trials: a.trials,
            max_ratio: a.max_ratio,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormAuditJson {
    pub samples: usize,
    pub observed_sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionJson {
    pub rho: f64,
    pub lower: f64,
    pub colligation: ColligationJson,
    pub norm_audit: Option<NormAuditJson>,
    pub audit: Option<AuditJson>,
    pub problem: ProblemJson,
    pub certificate: PrimalJson,
    pub dual: Option<DualJson>,
}

impl From<&ExtensionResult> for ExtensionJson {
    fn from(r: &ExtensionResult) -> Self {
        ExtensionJson {
            rho: r.rho,
            lower: r.lower,
            colligation: (&r.interpolant.colligation).into(),
            norm_audit: r.interpolant.norm_audit.map(|(samples, observed_sup)| NormAuditJson {
                samples,
                observed_sup,
            }),
            audit: r.audit.as_ref().map(Into::into),
            problem: (&r.problem).into(),
            certificate: (&r.certificate).into(),
            dual: r.dual.as_ref().map(Into::into),
        }
    }
}

impl TryFrom<&ExtensionJson> for ExtensionResult {
    type Error = Error;
    fn try_from(j: &ExtensionJson) -> Result<Self> {
        let problem: PickProblem = (&j.problem).try_into()?;
        let dual = j.dual.as_ref().map(DualCertificate::try_from).transpose()?;
        let mut interpolant = RealizedFunction::new((&j.colligation).try_into()?);
        interpolant.norm_audit = j.norm_audit.as_ref().map(|a| (a.samples, a.observed_sup));
        Ok(ExtensionResult {
            problem,
            rho: j.rho,
            lower: j.lower,
            interpolant,
            certificate: (&j.certificate).try_into()?,
            dual,
            // the worst kernel of an audit is not serialized; re-run the audit
            audit: None,
        })
    }
}

/// Writes floats as `{:.16e}` and everything else as compact JSON.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Serializes with 17 significant digits and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&fs::read_to_string(path)?)
}

/// Writes `contents` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_string(value)?.as_bytes())
}

/// CSV dump of `f` over `points` with header
/// `s_re,s_im,p_re,p_im,f_re,f_im,abs_f`. Points where the resolvent is too
/// ill-conditioned are skipped. Returns the text and the largest `|f|`.
pub fn grid_csv(f: &RealizedFunction, points: &[GPoint]) -> (String, f64) {
    let mut out = String::from("s_re,s_im,p_re,p_im,f_re,f_im,abs_f\n");
    let mut sup = 0.0f64;
    for x in points {
        let Ok(v) = evaluate(f, x) else {
            continue;
        };
        sup = sup.max(v.norm());
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            x.s().re,
            x.s().im,
            x.p().re,
            x.p().im,
            v.re,
            v.im,
            v.norm()
        );
    }
    (out, sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::pick::solve_feasibility;

    fn problem() -> PickProblem {
        let nodes = NodeSet::new(vec![
            GPoint::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap(),
            GPoint::new(C64::new(0.6, 0.1), C64::new(0.09, -0.02)).unwrap(),
        ])
        .unwrap();
        PickProblem::new(nodes, vec![C64::new(0.1, 0.0), C64::new(0.2, 0.1)]).unwrap()
    }

    #[test]
    fn floats_round_trip_exactly() {
        let values = vec![0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0];
        let text = to_json_string(&values).unwrap();
        let back: Vec<f64> = from_json_str(&text).unwrap();
        assert_eq!(values, back);
        assert!(text.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn problem_round_trip() {
        let p = problem();
        let j = ProblemJson::from(&p);
        let text = to_json_string(&j).unwrap();
        let back: ProblemJson = from_json_str(&text).unwrap();
        assert_eq!(PickProblem::try_from(&back).unwrap(), p);
    }

    #[test]
    fn certificate_round_trip() {
        let p = problem();
        let cert = solve_feasibility(&p, 1.0, &SolverConfig::default()).unwrap().primal.unwrap();
        let text = to_json_string(&PrimalJson::from(&cert)).unwrap();
        let back = DecompositionCertificate::try_from(&from_json_str::<PrimalJson>(&text).unwrap()).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn bad_problem_rejected() {
        let text = r#"{"nodes": [[2.0, 0.0, 1.0, 0.0]], "targets": [[0.1, 0.0]]}"#;
        let j: ProblemJson = from_json_str(text).unwrap();
        assert!(PickProblem::try_from(&j).is_err());
        let text = r#"{"nodes": [[0.0, 0.0, 0.0, 0.0]], "targets": []}"#;
        let j: ProblemJson = from_json_str(text).unwrap();
        assert!(PickProblem::try_from(&j).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("gp-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.json");
        write_json(&path, &vec![1.0]).unwrap();
        write_json(&path, &vec![2.0]).unwrap();
        let back: Vec<f64> = read_json(&path).unwrap();
        assert_eq!(back, vec![2.0]);
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
