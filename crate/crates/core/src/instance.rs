//! Plank instances: unit normals `v_k` in C^d with half-widths `t_k`,
//! `sum t_k^2 = 1`.

use serde::{Deserialize, Serialize};

use crate::complex::{CVector, Complex};
use crate::error::{PlankError, Result};
use crate::json;
use crate::rng::RngState;

/// Defects up to this size are accepted on load and repaired in place.
pub const LOAD_REPAIR_TOL: f64 = 1e-10;

/// Defects at or below this size are rounding noise and are left untouched,
/// so that emitted documents reload bit-for-bit.
pub const ROUNDING_TOL: f64 = 4.0 * f64::EPSILON;

#[derive(Clone, Debug, PartialEq)]
pub struct PlankInstance {
    pub d: usize,
    pub vectors: Vec<CVector>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Equal,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyInstance,
    ZeroDimension,
    VectorLength { index: usize, len: usize },
    NonFinite { index: usize },
    NonUnitVector { index: usize, norm: f64 },
    NonPositiveWeight { index: usize, weight: f64 },
    WeightSquareSum { sum: f64 },
}

impl Violation {
    /// Size of the defect in the units of the violated invariant.
    pub fn defect(&self) -> f64 {
        match *self {
            Violation::NonUnitVector { norm, .. } => (norm - 1.0).abs(),
            Violation::NonPositiveWeight { weight, .. } => -weight,
            Violation::WeightSquareSum { sum } => (sum - 1.0).abs(),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Repairs applied while loading (dropped planks, renormalizations).
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PlankInstance {
    /// Builds an instance without any checks; see [`validate`] and
    /// [`PlankInstance::sanitize`].
    pub fn new(d: usize, vectors: Vec<CVector>, weights: Vec<f64>) -> Self {
        PlankInstance {
            d,
            vectors,
            weights,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn vector(&self, k: usize) -> &CVector {
        &self.vectors[k]
    }

    /// `t_k^2` for every plank.
    pub fn squared_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(|t| t * t)
    }

    /// True when every `t_k` equals `1/sqrt(n)` within `1e-12`.
    pub fn is_equal_weight(&self) -> bool {
        let t = (1.0 / self.n() as f64).sqrt();
        self.weights.iter().all(|w| (w - t).abs() <= 1e-12)
    }

    /// Applies the load policy:
    ///
    /// * planks with `t_k = 0` are dropped;
    /// * vectors and the weight square sum within [`LOAD_REPAIR_TOL`] of 1
    ///   are renormalized (no-op below [`ROUNDING_TOL`]);
    /// * anything else out of tolerance is rejected.
    pub fn sanitize(self) -> Result<(PlankInstance, ValidationReport)> {
        let PlankInstance {
            d,
            vectors,
            weights,
        } = self;
        if d == 0 {
            return Err(PlankError::InvalidInstance(
                "dimension d must be positive".into(),
            ));
        }
        if vectors.len() != weights.len() {
            return Err(PlankError::InvalidInstance(format!(
                "{} vectors but {} weights",
                vectors.len(),
                weights.len()
            )));
        }
        let mut report = ValidationReport::default();
        let mut kept_vectors = Vec::with_capacity(vectors.len());
        let mut kept_weights = Vec::with_capacity(weights.len());
        for (k, (v, t)) in vectors.into_iter().zip(weights).enumerate() {
            if v.dim() != d {
                return Err(PlankError::InvalidInstance(format!(
                    "vector {k} has length {}, expected {d}",
                    v.dim()
                )));
            }
            if !v.is_finite() || !t.is_finite() {
                return Err(PlankError::InvalidInstance(format!(
                    "plank {k} has non-finite data"
                )));
            }
            if t < 0.0 {
                return Err(PlankError::InvalidInstance(format!(
                    "weight {k} is negative ({t})"
                )));
            }
            if t == 0.0 {
                report.notes.push(format!("dropped plank {k}: zero weight"));
                continue;
            }
            let norm = v.norm();
            let defect = (norm - 1.0).abs();
            let v = if defect > LOAD_REPAIR_TOL {
                return Err(PlankError::InvalidInstance(format!(
                    "vector {k} has norm {norm}, not within {LOAD_REPAIR_TOL} of 1"
                )));
            } else if defect > ROUNDING_TOL {
                report
                    .notes
                    .push(format!("renormalized vector {k} (norm {norm})"));
                v.scale_real(1.0 / norm)
            } else {
                v
            };
            kept_vectors.push(v);
            kept_weights.push(t);
        }
        if kept_weights.is_empty() {
            return Err(PlankError::InvalidInstance(
                "no planks with positive weight".into(),
            ));
        }
        let sum: f64 = kept_weights.iter().map(|t| t * t).sum();
        let defect = (sum - 1.0).abs();
        if defect > LOAD_REPAIR_TOL {
            return Err(PlankError::InvalidInstance(format!(
                "sum of squared weights is {sum}, not within {LOAD_REPAIR_TOL} of 1"
            )));
        } else if defect > ROUNDING_TOL {
            report
                .notes
                .push(format!("rescaled weights (sum of squares {sum})"));
            let k = 1.0 / sum.sqrt();
            kept_weights.iter_mut().for_each(|t| *t *= k);
        }
        Ok((PlankInstance::new(d, kept_vectors, kept_weights), report))
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<PlankInstance> {
        from_json(text)
    }
}

/// Lists every violated invariant at tolerance `tol`. An empty list means valid.
pub fn validate(inst: &PlankInstance, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    if inst.d == 0 {
        violations.push(Violation::ZeroDimension);
    }
    if inst.vectors.is_empty() || inst.weights.is_empty() {
        violations.push(Violation::EmptyInstance);
    }
    for (k, v) in inst.vectors.iter().enumerate() {
        if v.dim() != inst.d {
            violations.push(Violation::VectorLength {
                index: k,
                len: v.dim(),
            });
        }
        if !v.is_finite() {
            violations.push(Violation::NonFinite { index: k });
            continue;
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > tol {
            violations.push(Violation::NonUnitVector { index: k, norm });
        }
    }
    if inst.vectors.len() != inst.weights.len() {
        violations.push(Violation::VectorLength {
            index: inst.vectors.len().min(inst.weights.len()),
            len: inst.vectors.len(),
        });
    }
    for (k, &t) in inst.weights.iter().enumerate() {
        if !(t > 0.0) {
            violations.push(Violation::NonPositiveWeight {
                index: k,
                weight: t,
            });
        }
    }
    let sum: f64 = inst.weights.iter().map(|t| t * t).sum();
    if !((sum - 1.0).abs() <= tol) {
        violations.push(Violation::WeightSquareSum { sum });
    }
    ValidationReport {
        violations,
        notes: Vec::new(),
    }
}

/// Random instance: vectors i.i.d. uniform on the unit sphere of C^d; weights
/// all `1/sqrt(n)` or proportional to i.i.d. uniform(0.1, 1) draws.
pub fn gen_random(d: usize, n: usize, seed: u64, mode: WeightMode) -> PlankInstance {
    assert!(d >= 1 && n >= 1, "d and n must be positive");
    let mut rng = RngState::new(seed);
    let vectors: Vec<CVector> = (0..n).map(|_| rng.unit_vector(d)).collect();
    let weights = match mode {
        WeightMode::Equal => equal_weights(n),
        WeightMode::Random => {
            let g: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
            let scale = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            g.into_iter().map(|x| x / scale).collect()
        }
    };
    PlankInstance::new(d, vectors, weights)
}

/// Orthonormal basis with equal weights: the extremal case where every margin
/// at the optimum is exactly zero.
pub fn gen_tight(d: usize) -> PlankInstance {
    assert!(d >= 1, "d must be positive");
    let vectors = (0..d).map(|k| CVector::basis(d, k)).collect();
    PlankInstance::new(d, vectors, equal_weights(d))
}

/// `n` copies of `e_1` with equal weights.
pub fn gen_repeated(d: usize, n: usize) -> PlankInstance {
    assert!(d >= 1 && n >= 1, "d and n must be positive");
    let vectors = vec![CVector::basis(d, 0); n];
    PlankInstance::new(d, vectors, equal_weights(n))
}

fn equal_weights(n: usize) -> Vec<f64> {
    vec![(1.0 / n as f64).sqrt(); n]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    d: usize,
    n: usize,
    vectors: Vec<Vec<Complex>>,
    weights: Vec<f64>,
}

/// Compact canonical JSON: `{"d":..,"n":..,"vectors":[[[re,im],..],..],"weights":[..]}`.
pub fn to_json(inst: &PlankInstance) -> String {
    let doc = InstanceDoc {
        d: inst.d,
        n: inst.n(),
        vectors: inst.vectors.iter().map(|v| v.as_slice().to_vec()).collect(),
        weights: inst.weights.clone(),
    };
    json::to_canonical_string(&doc)
}

/// Parses and sanitizes an instance document.
pub fn from_json(text: &str) -> Result<PlankInstance> {
    from_json_with_report(text).map(|(inst, _)| inst)
}

/// Like [`from_json`], also returning the notes on repairs made while loading.
pub fn from_json_with_report(text: &str) -> Result<(PlankInstance, ValidationReport)> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| PlankError::parse_at(&e, "instance"))?;
    if doc.d == 0 {
        return Err(PlankError::field("d", "must be positive"));
    }
    if doc.n == 0 {
        return Err(PlankError::field("n", "must be positive"));
    }
    if doc.vectors.len() != doc.n {
        return Err(PlankError::field(
            "vectors",
            format!("expected {} vectors, found {}", doc.n, doc.vectors.len()),
        ));
    }
    if doc.weights.len() != doc.n {
        return Err(PlankError::field(
            "weights",
            format!("expected {} weights, found {}", doc.n, doc.weights.len()),
        ));
    }
    if let Some(k) = doc.vectors.iter().position(|v| v.len() != doc.d) {
        return Err(PlankError::field(
            "vectors",
            format!(
                "vector {k} has {} entries, expected {}",
                doc.vectors[k].len(),
                doc.d
            ),
        ));
    }
    let inst = PlankInstance::new(
        doc.d,
        doc.vectors.into_iter().map(CVector::new).collect(),
        doc.weights,
    );
    inst.sanitize()
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn validate_examples() {
        let ok = PlankInstance::new(
            2,
            vec![CVector::basis(2, 0), CVector::basis(2, 1)],
            vec![H, H],
        );
        assert!(validate(&ok, 1e-12).is_valid());

        let heavy = PlankInstance::new(2, ok.vectors.clone(), vec![1.0, 1.0]);
        let report = validate(&heavy, 1e-12);
        assert_eq!(
            report.violations,
            vec![Violation::WeightSquareSum { sum: 2.0 }]
        );
        assert_eq!(report.violations[0].defect(), 1.0);

        let short = PlankInstance::new(
            2,
            vec![CVector::from_real(&[0.9, 0.0]), CVector::basis(2, 1)],
            vec![H, H],
        );
        let report = validate(&short, 1e-12);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::NonUnitVector { index: 0, .. }
        ));
        assert!((report.violations[0].defect() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn validate_flags_nonpositive_and_shape() {
        let inst = PlankInstance::new(
            2,
            vec![CVector::basis(2, 0), CVector::basis(3, 1)],
            vec![1.0, 0.0],
        );
        let v = validate(&inst, 1e-12).violations;
        assert!(v.contains(&Violation::VectorLength { index: 1, len: 3 }));
        assert!(v.contains(&Violation::NonPositiveWeight {
            index: 1,
            weight: 0.0
        }));
    }

    #[test]
    fn generators_are_valid() {
        for seed in 0..20 {
            for mode in [WeightMode::Equal, WeightMode::Random] {
                let inst = gen_random(
                    1 + (seed as usize % 6),
                    1 + (seed as usize * 3) % 17,
                    seed,
                    mode,
                );
                assert!(validate(&inst, 1e-12).is_valid(), "seed {seed} {mode:?}");
            }
        }
        for d in 1..10 {
            assert!(validate(&gen_tight(d), 1e-12).is_valid());
            assert!(validate(&gen_repeated(d, d + 2), 1e-12).is_valid());
        }
    }

    #[test]
    fn gen_random_equal_weights() {
        let inst = gen_random(3, 4, 1, WeightMode::Equal);
        assert!(inst.weights.iter().all(|&t| t == 0.5));
        assert!(inst.is_equal_weight());
    }

    #[test]
    fn gen_random_is_deterministic() {
        assert_eq!(
            gen_random(4, 6, 7, WeightMode::Random),
            gen_random(4, 6, 7, WeightMode::Random)
        );
        assert_ne!(
            gen_random(4, 6, 7, WeightMode::Random),
            gen_random(4, 6, 8, WeightMode::Random)
        );
    }

    #[test]
    fn random_weights_are_spread() {
        let inst = gen_random(2, 50, 3, WeightMode::Random);
        let max = inst.weights.iter().cloned().fold(0.0, f64::max);
        let min = inst.weights.iter().cloned().fold(1.0, f64::min);
        // draws come from [0.1, 1), so the ratio is bounded by 10
        assert!(max / min < 10.0 && max / min > 1.5);
    }

    #[test]
    fn tight_and_repeated_shapes() {
        let t2 = gen_tight(2);
        assert_eq!(t2.vectors, vec![CVector::basis(2, 0), CVector::basis(2, 1)]);
        assert_eq!(t2.weights, vec![H, H]);
        let t1 = gen_tight(1);
        assert_eq!(t1.vectors, vec![CVector::from_real(&[1.0])]);
        assert_eq!(t1.weights, vec![1.0]);
        let r = gen_repeated(3, 4);
        assert!(r.vectors.iter().all(|v| *v == CVector::basis(3, 0)));
        assert_eq!(r.weights, vec![0.5; 4]);
    }

    #[test]
    fn tight_json_format() {
        assert_eq!(
            to_json(&gen_tight(2)),
            r#"{"d":2,"n":2,"vectors":[[[1,0],[0,0]],[[0,0],[1,0]]],"weights":[0.7071067811865476,0.7071067811865476]}"#
        );
    }

    #[test]
    fn json_round_trip() {
        for seed in 0..10 {
            let inst = gen_random(3, 5, seed, WeightMode::Random);
            let text = to_json(&inst);
            let (back, report) = from_json_with_report(&text).unwrap();
            assert_eq!(back, inst);
            assert!(report.notes.is_empty());
            assert_eq!(to_json(&back), text);
        }
    }

    #[test]
    fn malformed_documents() {
        let bad_weights = r#"{"d":1,"n":1,"vectors":[[[1,0]]],"weights":"x"}"#;
        assert!(matches!(
            from_json(bad_weights),
            Err(PlankError::Parse { .. })
        ));
        let count = r#"{"d":1,"n":2,"vectors":[[[1,0]]],"weights":[1]}"#;
        let err = from_json(count).unwrap_err();
        assert!(err.to_string().contains("vectors"), "{err}");
        let arity = r#"{"d":2,"n":1,"vectors":[[[1,0]]],"weights":[1]}"#;
        assert!(matches!(from_json(arity), Err(PlankError::Parse { .. })));
        let junk = "{\n  \"d\": 1,\n  \"n\": oops }";
        match from_json(junk) {
            Err(PlankError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn load_policy() {
        // zero weight dropped
        let doc = r#"{"d":2,"n":3,"vectors":[[[1,0],[0,0]],[[0,0],[1,0]],[[1,0],[0,0]]],"weights":[0.7071067811865476,0.7071067811865476,0]}"#;
        let (inst, report) = from_json_with_report(doc).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(report.notes.len(), 1);

        // slightly long vector renormalized
        let doc = r#"{"d":1,"n":1,"vectors":[[[1.00000000001,0]]],"weights":[1]}"#;
        let (inst, report) = from_json_with_report(doc).unwrap();
        assert_eq!(inst.vectors[0][0].re, 1.0);
        assert_eq!(report.notes.len(), 1);

        // weights rescaled
        let doc = r#"{"d":1,"n":1,"vectors":[[[1,0]]],"weights":[1.00000000002]}"#;
        let (inst, _) = from_json_with_report(doc).unwrap();
        assert!((inst.weights[0] - 1.0).abs() <= f64::EPSILON);

        // far off rejected
        let doc = r#"{"d":1,"n":1,"vectors":[[[0.9,0]]],"weights":[1]}"#;
        assert!(matches!(
            from_json(doc),
            Err(PlankError::InvalidInstance(_))
        ));
        let doc = r#"{"d":1,"n":2,"vectors":[[[1,0]],[[1,0]]],"weights":[1,1]}"#;
        assert!(matches!(
            from_json(doc),
            Err(PlankError::InvalidInstance(_))
        ));
        let doc = r#"{"d":1,"n":1,"vectors":[[[1,0]]],"weights":[-1]}"#;
        assert!(matches!(
            from_json(doc),
            Err(PlankError::InvalidInstance(_))
        ));
        let doc = r#"{"d":1,"n":1,"vectors":[[[1,0]]],"weights":[0]}"#;
        assert!(matches!(
            from_json(doc),
            Err(PlankError::InvalidInstance(_))
        ));
    }
}
