//! Degree-indexed families of linear classifiers `argmax_m wᵀz + b`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numfmt::fmt_f64;

const HEADER: &str = "# graphsig linear classifier family v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierAtProfile {
    pub weights: Vec<DVector<f64>>,
    pub biases: Vec<f64>,
}

impl ClassifierAtProfile {
    pub fn scores(&self, z: &DVector<f64>) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.dot(z) + b)
            .collect()
    }

    /// Zero-based class with the largest score; ties go to the smallest index.
    pub fn classify(&self, z: &DVector<f64>) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (m, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let s = w.dot(z) + b;
            if s > best_score {
                best = m;
                best_score = s;
            }
        }
        best
    }
}

/// Classifiers keyed by degree profile: `[d]` for one-hop representations,
/// `[d_1, …, d_K]` for k-hop ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifierFamily {
    representation_dim: usize,
    num_classes: usize,
    entries: BTreeMap<Vec<usize>, ClassifierAtProfile>,
}

impl LinearClassifierFamily {
    pub fn new(representation_dim: usize, num_classes: usize) -> Self {
        LinearClassifierFamily {
            representation_dim,
            num_classes,
            entries: BTreeMap::new(),
        }
    }

    pub fn representation_dim(&self) -> usize {
        self.representation_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn insert(&mut self, profile: Vec<usize>, weights: Vec<DVector<f64>>, biases: Vec<f64>) -> Result<()> {
        if weights.len() != self.num_classes {
            return Err(Error::dim("weight vector count", self.num_classes, weights.len()));
        }
        if biases.len() != self.num_classes {
            return Err(Error::dim("bias count", self.num_classes, biases.len()));
        }
        if let Some(w) = weights.iter().find(|w| w.len() != self.representation_dim) {
            return Err(Error::dim("weight vector length", self.representation_dim, w.len()));
        }
        self.entries.insert(profile, ClassifierAtProfile { weights, biases });
        Ok(())
    }

    /// Merges another family with the same shape; entries of `other` win.
    pub fn extend(&mut self, other: LinearClassifierFamily) -> Result<()> {
        if other.representation_dim != self.representation_dim || other.num_classes != self.num_classes {
            return Err(Error::InvalidArgument("cannot merge classifier families of different shapes".into()));
        }
        self.entries.extend(other.entries);
        Ok(())
    }

    pub fn at(&self, profile: &[usize]) -> Result<&ClassifierAtProfile> {
        self.entries
            .get(profile)
            .ok_or_else(|| Error::MissingDegree(profile.to_vec()))
    }

    pub fn at_degree(&self, degree: usize) -> Result<&ClassifierAtProfile> {
        self.at(&[degree])
    }

    pub fn classify(&self, profile: &[usize], z: &DVector<f64>) -> Result<usize> {
        if z.len() != self.representation_dim {
            return Err(Error::dim("representation length", self.representation_dim, z.len()));
        }
        Ok(self.at(profile)?.classify(z))
    }

    pub fn profiles(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.entries.keys()
    }

    /// Flat text dump: a header, then per profile one `w` and one `b` line per
    /// class (classes numbered from 1).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "representation_dim {}", self.representation_dim);
        let _ = writeln!(out, "num_classes {}", self.num_classes);
        for (profile, c) in &self.entries {
            let p: Vec<String> = profile.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "profile {}", p.join(" "));
            for (m, (w, b)) in c.weights.iter().zip(&c.biases).enumerate() {
                let ws: Vec<String> = w.iter().map(|v| fmt_f64(*v)).collect();
                let _ = writeln!(out, "w {} {}", m + 1, ws.join(" "));
                let _ = writeln!(out, "b {} {}", m + 1, fmt_f64(*b));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::Parse {
            path: "<classifier family>".into(),
            line,
            reason: reason.into(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(bad(1, "missing header")),
        }
        let mut header_value = |key: &str| -> Result<usize> {
            let (n, l) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            l.strip_prefix(key)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(n, &format!("expected `{key} <int>`")))
        };
        let dim = header_value("representation_dim")?;
        let classes = header_value("num_classes")?;
        let mut family = LinearClassifierFamily::new(dim, classes);
        let mut pending: Option<(usize, Vec<usize>, Vec<DVector<f64>>, Vec<f64>)> = None;
        let floats = |n: usize, toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| t.parse::<f64>().map_err(|_| bad(n, &format!("bad number `{t}`"))))
                .collect()
        };
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "profile" => {
                    if let Some((_, p, w, b)) = pending.take() {
                        family.insert(p, w, b)?;
                    }
                    let profile = toks[1..]
                        .iter()
                        .map(|t| t.parse().map_err(|_| bad(n, "bad degree")))
                        .collect::<Result<Vec<usize>>>()?;
                    pending = Some((n, profile, Vec::new(), Vec::new()));
                }
                kind @ ("w" | "b") => {
                    let (_, _, w, b) = pending.as_mut().ok_or_else(|| bad(n, "entry before profile"))?;
                    let class: usize = toks
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(n, "bad class index"))?;
                    let expected = if kind == "w" { w.len() + 1 } else { b.len() + 1 };
                    if class != expected {
                        return Err(bad(n, "class indices out of order"));
                    }
                    let vals = floats(n, &toks[2..])?;
                    if kind == "w" {
                        w.push(DVector::from_vec(vals));
                    } else if vals.len() == 1 {
                        b.push(vals[0]);
                    } else {
                        return Err(bad(n, "bias line must hold one value"));
                    }
                }
                other => return Err(bad(n, &format!("unknown record `{other}`"))),
            }
        }
        if let Some((_, p, w, b)) = pending.take() {
            family.insert(p, w, b)?;
        }
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_family() -> LinearClassifierFamily {
        let mut f = LinearClassifierFamily::new(2, 2);
        f.insert(
            vec![0],
            vec![DVector::from_vec(vec![1.0, 0.1]), DVector::from_vec(vec![-1.0, 1.0 / 3.0])],
            vec![-0.5, -0.5],
        )
        .unwrap();
        f.insert(
            vec![2, 5],
            vec![DVector::from_vec(vec![0.25, -7e-9]), DVector::from_vec(vec![0.0, 2.0])],
            vec![0.1, -1e12],
        )
        .unwrap();
        f
    }

    #[test]
    fn text_round_trip() {
        let f = sample_family();
        let back = LinearClassifierFamily::from_text(&f.to_text()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn unknown_degree_is_an_error() {
        let f = sample_family();
        let z = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(f.classify(&[0], &z).unwrap(), 0);
        assert!(matches!(f.classify(&[1], &z), Err(Error::MissingDegree(p)) if p == vec![1]));
    }

    #[test]
    fn ties_break_toward_smallest_class() {
        let mut f = LinearClassifierFamily::new(1, 3);
        let w = vec![DVector::from_vec(vec![1.0]); 3];
        f.insert(vec![1], w, vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.classify(&[1], &DVector::from_vec(vec![2.0])).unwrap(), 0);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(LinearClassifierFamily::from_text("nonsense").is_err());
        let mut t = sample_family().to_text();
        t.push_str("w 9 1 2\n");
        assert!(LinearClassifierFamily::from_text(&t).is_err());
    }
}
