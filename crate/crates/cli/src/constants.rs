use anyhow::{bail, Context, Result};
use serde::Serialize;

use ineqlab_core::exponents::ExponentSet;
use ineqlab_core::functional::{aizenman_lieb_factor, hardy_constant, lieb_bound_from_k};

use crate::format::fmt12;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub quantity: String,
    pub inputs: Vec<f64>,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Default, Clone)]
pub struct Requests {
    pub hardy: Vec<String>,
    pub lieb_bound: Vec<String>,
    pub al_factor: Vec<String>,
    pub exponents: Vec<String>,
}

impl Requests {
    pub fn is_empty(&self) -> bool {
        self.hardy.is_empty() && self.lieb_bound.is_empty() && self.al_factor.is_empty() && self.exponents.is_empty()
    }
}

fn parse_tuple(flag: &str, raw: &str, arity: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("--{flag}: `{p}` is not a number")))
        .collect::<Result<_>>()?;
    if parts.len() != arity {
        bail!("--{flag} takes {arity} comma-separated values, got `{raw}`");
    }
    Ok(parts)
}

fn row(quantity: &str, inputs: &[f64], name: &str, value: f64) -> Row {
    Row { quantity: quantity.into(), inputs: inputs.to_vec(), name: name.into(), value }
}

pub fn evaluate(req: &Requests) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for raw in &req.hardy {
        let p = parse_tuple("hardy", raw, 2)?;
        if p[1].fract() != 0.0 || p[1] < 1.0 {
            bail!("--hardy: dimension must be a positive integer, got {}", p[1]);
        }
        rows.push(row("hardy", &p, "C", hardy_constant(p[0], p[1] as usize)?));
    }
    for raw in &req.lieb_bound {
        let p = parse_tuple("lieb-bound", raw, 2)?;
        let b = lieb_bound_from_k(p[0], p[1])?;
        rows.push(row("lieb_bound", &p, "L", b.value));
        rows.push(row("lieb_bound", &p, "a_star", b.argmin));
    }
    for raw in &req.al_factor {
        let p = parse_tuple("al-factor", raw, 3)?;
        let al = aizenman_lieb_factor(p[0], p[1], p[2])?;
        rows.push(row("al_factor", &p, "factor", al.factor));
        rows.push(row("al_factor", &p, "s_star", al.argmin_s));
    }
    for raw in &req.exponents {
        let p = parse_tuple("exponents", raw, 2)?;
        let e = ExponentSet::from_gamma_kappa(p[0], p[1])?;
        rows.push(row("exponents", &p, "q", e.q));
        rows.push(row("exponents", &p, "theta", e.theta));
    }
    Ok(rows)
}

pub fn render(rows: &[Row]) -> String {
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|r| {
            let inputs: Vec<String> = r.inputs.iter().map(|x| fmt12(*x)).collect();
            [format!("{}({})", r.quantity, inputs.join(",")), r.name.clone(), fmt12(r.value)]
        })
        .collect();
    let head = ["quantity".to_string(), "name".to_string(), "value".to_string()];
    let mut width = [0usize; 3];
    for c in cells.iter().chain(std::iter::once(&head)) {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    let line = |c: &[String; 3]| format!("{:<w0$}  {:<w1$}  {:>w2$}\n", c[0], c[1], c[2], w0 = width[0], w1 = width[1], w2 = width[2]);
    let mut out = line(&head);
    for c in &cells {
        out.push_str(&line(c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(rows: &[Row], name: &str) -> f64 {
        rows.iter().find(|r| r.name == name).unwrap().value
    }

    #[test]
    fn documented_examples() {
        let req = Requests {
            hardy: vec!["1,3".into()],
            al_factor: vec!["1,2,1.5".into()],
            exponents: vec!["1,1.5".into()],
            ..Requests::default()
        };
        let rows = evaluate(&req).unwrap();
        assert_eq!(fmt12(value(&rows, "C")), "0.25");
        assert_eq!(fmt12(value(&rows, "factor")), "2.285714285714");
        assert_eq!(fmt12(value(&rows, "q")), "3.333333333333");
        assert_eq!(fmt12(value(&rows, "theta")), "0.6");
        assert!(render(&rows).lines().count() == rows.len() + 1);
    }

    #[test]
    fn rejects_malformed_tuples() {
        let bad = |r: Requests| evaluate(&r).is_err();
        assert!(bad(Requests { hardy: vec!["1".into()], ..Requests::default() }));
        assert!(bad(Requests { hardy: vec!["1,x".into()], ..Requests::default() }));
        assert!(bad(Requests { hardy: vec!["1,2".into()], ..Requests::default() }));
        assert!(bad(Requests { hardy: vec!["1,2.5".into()], ..Requests::default() }));
    }
}
