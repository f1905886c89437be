//! Rule-spec grammar shared by the CLI and config files.
//!
//! ```text
//! rule   := "zero" | "dyadicblock"
//!         | "power:p=<f>" | "logpower:a=<f>,b=<f>" | "geometric:r=<f>"
//!         | "harmonic:k=<int>[,re=<f>][,im=<f>]"
//!         | "table:@<path>"              CSV, one `re,im` (or `re`) per line, row k = c_k
//!         | "table:[0=<v>|]<v>|<v>|..."  inline, v = re or re,im
//!         | "scale(<re>[,<im>];<rule>)" | "sum(<rule>;<rule>)"
//! neg    := rule | "mirror:<re>[,<im>]"     c_{-k} = λ c_k
//! ```

use std::collections::HashMap;
use std::fs;

use num_complex::Complex64;

use super::{SequenceRule, TwoSidedSeq};
use crate::error::{Error, Result};

/// The negative-index half of a two-sided sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum NegSpec {
    Rule(SequenceRule),
    Mirror(Complex64),
}

impl NegSpec {
    pub fn pair_with(self, pos: SequenceRule) -> TwoSidedSeq {
        match self {
            NegSpec::Mirror(l) => TwoSidedSeq::mirrored(pos, l),
            NegSpec::Rule(neg) => {
                if *neg.kind() == super::RuleKind::Zero {
                    TwoSidedSeq::one_sided(pos)
                } else {
                    TwoSidedSeq::new(pos, neg)
                }
            }
        }
    }
}

pub fn parse_neg_rule(spec: &str) -> Result<NegSpec> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("mirror:") {
        return parse_complex(rest)
            .map(NegSpec::Mirror)
            .ok_or_else(|| bad(spec, "mirror factor must be `re` or `re,im`"));
    }
    parse_rule(spec).map(NegSpec::Rule)
}

pub fn parse_rule(spec: &str) -> Result<SequenceRule> {
    let spec = spec.trim();
    if let Some(inner) = call_args(spec, "scale") {
        let (factor, rule) = split_top(inner).ok_or_else(|| bad(spec, "expected scale(<factor>;<rule>)"))?;
        let factor = parse_complex(factor).ok_or_else(|| bad(spec, "bad scale factor"))?;
        return Ok(parse_rule(rule)?.scaled(factor));
    }
    if let Some(inner) = call_args(spec, "sum") {
        let (a, b) = split_top(inner).ok_or_else(|| bad(spec, "expected sum(<rule>;<rule>)"))?;
        return Ok(parse_rule(a)?.plus(parse_rule(b)?));
    }

    let (head, params) = match spec.split_once(':') {
        Some((h, p)) => (h, p),
        None => (spec, ""),
    };
    let head = head.to_ascii_lowercase();
    let wrap = |e: Error| match e {
        Error::InvalidParameter(reason) => bad(spec, &reason),
        other => other,
    };
    match head.as_str() {
        "zero" => Ok(SequenceRule::zero()),
        "dyadicblock" => Ok(SequenceRule::dyadic_block()),
        "power" => {
            let kv = key_values(spec, params)?;
            SequenceRule::power(get(spec, &kv, "p")?).map_err(wrap)
        }
        "logpower" => {
            let kv = key_values(spec, params)?;
            SequenceRule::log_power(get(spec, &kv, "a")?, get(spec, &kv, "b")?).map_err(wrap)
        }
        "geometric" => {
            let kv = key_values(spec, params)?;
            SequenceRule::geometric(get(spec, &kv, "r")?).map_err(wrap)
        }
        "harmonic" => {
            let kv = key_values(spec, params)?;
            let k = get(spec, &kv, "k")?;
            if k < 1.0 || k.fract() != 0.0 {
                return Err(bad(spec, "harmonic index must be a positive integer"));
            }
            let re = kv.get("re").copied().unwrap_or(1.0);
            let im = kv.get("im").copied().unwrap_or(0.0);
            SequenceRule::harmonic(k as u64, Complex64::new(re, im)).map_err(wrap)
        }
        "table" => {
            if let Some(path) = params.strip_prefix('@') {
                let text = fs::read_to_string(path)
                    .map_err(|e| bad(spec, &format!("cannot read {path}: {e}")))?;
                parse_csv_table(spec, &text)
            } else {
                parse_inline_table(spec, params)
            }
        }
        _ => Err(bad(spec, "unknown rule kind")),
    }
}

fn parse_csv_table(spec: &str, text: &str) -> Result<SequenceRule> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let z = parse_complex(line).ok_or_else(|| bad(spec, &format!("line {}: expected re,im", i + 1)))?;
        values.push(z);
    }
    SequenceRule::table(values).map_err(|e| bad(spec, &e.to_string()))
}

fn parse_inline_table(spec: &str, params: &str) -> Result<SequenceRule> {
    let mut zeroth = None;
    let mut values = Vec::new();
    for (i, item) in params.split('|').enumerate() {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if i == 0 {
            if let Some(z) = item.strip_prefix("0=") {
                zeroth = Some(parse_complex(z).ok_or_else(|| bad(spec, "bad c_0 entry"))?);
                continue;
            }
        }
        values.push(parse_complex(item).ok_or_else(|| bad(spec, &format!("bad table entry `{item}`")))?);
    }
    SequenceRule::table_with_zeroth(values, zeroth).map_err(|e| bad(spec, &e.to_string()))
}

fn bad(spec: &str, reason: &str) -> Error {
    Error::RuleSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    }
}

fn call_args<'a>(spec: &'a str, name: &str) -> Option<&'a str> {
    spec.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

/// Splits at the first `;` outside parentheses.
fn split_top(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let mut parts = s.split(',').map(str::trim);
    let re = parts.next()?.parse::<f64>().ok()?;
    let im = match parts.next() {
        Some(im) => im.parse::<f64>().ok()?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return None;
    }
    Some(Complex64::new(re, im))
}

fn key_values(spec: &str, params: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| bad(spec, &format!("expected key=value, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| bad(spec, &format!("`{v}` is not a number")))?;
        out.insert(k.trim().to_ascii_lowercase(), v);
    }
    Ok(out)
}

fn get(spec: &str, kv: &HashMap<String, f64>, key: &str) -> Result<f64> {
    kv.get(key).copied().ok_or_else(|| bad(spec, &format!("missing `{key}`")))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn parses_documented_examples() {
        assert_eq!(parse_rule("power:p=1").unwrap(), SequenceRule::power(1.0).unwrap());
        assert_eq!(parse_rule("logpower:a=0,b=2").unwrap(), SequenceRule::log_power(0.0, 2.0).unwrap());
        assert_eq!(parse_rule("dyadicblock").unwrap(), SequenceRule::dyadic_block());
        assert_eq!(parse_rule(" zero ").unwrap(), SequenceRule::zero());
        assert_eq!(
            parse_rule("scale(0,-0.5;power:p=2)").unwrap(),
            SequenceRule::power(2.0).unwrap().scaled(Complex64::new(0.0, -0.5))
        );
        assert_eq!(
            parse_rule("sum(power:p=2;geometric:r=0.5)").unwrap(),
            SequenceRule::power(2.0).unwrap().plus(SequenceRule::geometric(0.5).unwrap())
        );
    }

    #[test]
    fn table_from_csv_file() {
        let dir = std::env::temp_dir().join(format!("seqclass-spec-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.csv");
        std::fs::write(&path, "1,0\n0.5,0.25\n# comment\n\n0.25\n").unwrap();
        let rule = parse_rule(&format!("table:@{}", path.display())).unwrap();
        assert_eq!(rule.coeff(2), Complex64::new(0.5, 0.25));
        assert_eq!(rule.coeff(3), Complex64::new(0.25, 0.0));
        assert_eq!(rule.coeff(4), Complex64::new(0.0, 0.0));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn errors_are_rule_spec_errors() {
        for s in ["power", "power:q=1", "power:p=-1", "nope", "table:1|x", "scale(1)", "sum(zero)", "table:@/no/such/file"] {
            let err = parse_rule(s).unwrap_err();
            assert_eq!(err.code(), "rule_spec", "{s}: {err}");
        }
    }

    #[test]
    fn neg_specs() {
        assert_eq!(parse_neg_rule("mirror:-1").unwrap(), NegSpec::Mirror(Complex64::new(-1.0, 0.0)));
        assert!(matches!(parse_neg_rule("zero").unwrap(), NegSpec::Rule(_)));
        let pair = parse_neg_rule("zero").unwrap().pair_with(SequenceRule::power(2.0).unwrap());
        assert_eq!(pair.mirror(), Some(Complex64::new(0.0, 0.0)));
    }

    fn leaf() -> impl Strategy<Value = SequenceRule> {
        prop_oneof![
            Just(SequenceRule::zero()),
            Just(SequenceRule::dyadic_block()),
            (0.1..5.0f64).prop_map(|p| SequenceRule::power(p).unwrap()),
            (0.0..3.0f64, 0.1..3.0f64).prop_map(|(a, b)| SequenceRule::log_power(a, b).unwrap()),
            (0.01..0.99f64).prop_map(|r| SequenceRule::geometric(r).unwrap()),
            prop::collection::vec((-10.0..10.0f64, -1.0..1.0f64), 0..6).prop_map(|v| {
                SequenceRule::table(v.into_iter().map(|(a, b)| Complex64::new(a, b))).unwrap()
            }),
        ]
    }

    fn rule() -> impl Strategy<Value = SequenceRule> {
        leaf().prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                (inner.clone(), -3.0..3.0f64, -3.0..3.0f64)
                    .prop_map(|(r, a, b)| r.scaled(Complex64::new(a, b))),
                (inner.clone(), inner).prop_map(|(a, b)| a.plus(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parses_back(r in rule()) {
            let text = r.to_string();
            prop_assert_eq!(parse_rule(&text).unwrap(), r);
        }
    }
}
