//! Machine-checkable predicates over frame and object records.
//!
//! Requirements and quotas carry natural-language stimulus text; the optional
//! predicate is the machine-evaluable companion that lets the auditor test
//! delivered batches. Evaluation is total by contract: any predicate applied
//! to any record yields `true` or `false`, never an error. Comparing against
//! an absent field yields `false`; `has(path)` is the explicit presence test.

use std::fmt;

use crate::fraction::{percent_text, Fraction};

/// Boolean expression tree over record fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
    Cmp {
        op: CmpOp,
        lhs: Operand,
        rhs: Operand,
    },
    Has(FieldPath),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// `==` and `!=` do not care about operand order.
    pub fn is_commutative(&self) -> bool {
        matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Field(FieldPath),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    /// `p%` denotes the number p/100.
    Percent(Fraction),
    Bool(bool),
}

/// The closed set of addressable record fields. Frame records expose
/// `meta.*`; object records expose everything else plus the enclosing
/// frame's meta fields under `frame.*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldPath {
    Class,
    Attr(String),
    Meta(String),
    Bbox(BboxField),
    Frame(String),
    DistanceM,
    Occlusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BboxField {
    X,
    Y,
    W,
    H,
    Area,
}

impl BboxField {
    pub fn name(&self) -> &'static str {
        match self {
            BboxField::X => "x",
            BboxField::Y => "y",
            BboxField::W => "w",
            BboxField::H => "h",
            BboxField::Area => "area",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "x" => BboxField::X,
            "y" => BboxField::Y,
            "w" => BboxField::W,
            "h" => BboxField::H,
            "area" => BboxField::Area,
            _ => return None,
        })
    }
}

/// A scalar field value as seen by predicate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Num(f64),
    Bool(bool),
}

/// Anything predicates can be evaluated against. Returning `None` means the
/// field is absent on this record.
pub trait EvalRecord {
    fn field(&self, path: &FieldPath) -> Option<Value>;
}

impl Literal {
    fn value(&self) -> Value {
        match self {
            Literal::Str(s) => Value::Str(s.clone()),
            Literal::Num(n) => Value::Num(*n),
            Literal::Percent(f) => Value::Num(*f.numer() as f64 / *f.denom() as f64),
            Literal::Bool(b) => Value::Bool(*b),
        }
    }
}

impl Operand {
    fn value(&self, record: &dyn EvalRecord) -> Option<Value> {
        match self {
            Operand::Field(path) => record.field(path),
            Operand::Literal(lit) => Some(lit.value()),
        }
    }
}

fn compare(op: CmpOp, lhs: &Value, rhs: &Value) -> bool {
    match (lhs, rhs) {
        (Value::Num(a), Value::Num(b)) => match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        },
        (Value::Str(a), Value::Str(b)) => match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => false,
        },
        (Value::Bool(a), Value::Bool(b)) => match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => false,
        },
        // Mismatched types never compare true.
        _ => false,
    }
}

impl Predicate {
    /// Total evaluation: absent fields and type mismatches yield `false`.
    pub fn eval(&self, record: &dyn EvalRecord) -> bool {
        match self {
            Predicate::And(parts) => parts.iter().all(|p| p.eval(record)),
            Predicate::Or(parts) => parts.iter().any(|p| p.eval(record)),
            Predicate::Not(inner) => !inner.eval(record),
            Predicate::Has(path) => record.field(path).is_some(),
            Predicate::Cmp { op, lhs, rhs } => match (lhs.value(record), rhs.value(record)) {
                (Some(l), Some(r)) => compare(*op, &l, &r),
                _ => false,
            },
        }
    }

    /// Canonical form for syntactic comparison: nested `and`/`or` chains are
    /// flattened, their operands sorted by display text, and the operands of
    /// commutative comparisons ordered. Two predicates that differ only in
    /// operand order normalize to the same tree.
    pub fn normalized(&self) -> Predicate {
        match self {
            Predicate::And(parts) => {
                let mut flat = Vec::new();
                for p in parts {
                    match p.normalized() {
                        Predicate::And(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort_by_key(|p| p.to_string());
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Predicate::And(flat)
                }
            }
            Predicate::Or(parts) => {
                let mut flat = Vec::new();
                for p in parts {
                    match p.normalized() {
                        Predicate::Or(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort_by_key(|p| p.to_string());
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Predicate::Or(flat)
                }
            }
            Predicate::Not(inner) => Predicate::Not(Box::new(inner.normalized())),
            Predicate::Cmp { op, lhs, rhs } => {
                if op.is_commutative() && operand_text(rhs) < operand_text(lhs) {
                    Predicate::Cmp {
                        op: *op,
                        lhs: rhs.clone(),
                        rhs: lhs.clone(),
                    }
                } else {
                    self.clone()
                }
            }
            Predicate::Has(_) => self.clone(),
        }
    }

    /// Display text of the normalized tree; equal iff the normalized trees
    /// are equal.
    pub fn canonical_text(&self) -> String {
        self.normalized().to_string()
    }
}

fn operand_text(op: &Operand) -> String {
    op.to_string()
}

/// Quotes a string literal using the notation's escape rules (`\"` and `\\`).
pub fn quote_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldPath::Class => write!(f, "class"),
            FieldPath::Attr(name) => write!(f, "attr.{name}"),
            FieldPath::Meta(name) => write!(f, "meta.{name}"),
            FieldPath::Bbox(field) => write!(f, "bbox.{}", field.name()),
            FieldPath::Frame(name) => write!(f, "frame.{name}"),
            FieldPath::DistanceM => write!(f, "distance_m"),
            FieldPath::Occlusion => write!(f, "occlusion"),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write!(f, "{}", quote_string(s)),
            Literal::Num(n) => write!(f, "{n}"),
            Literal::Percent(p) => write!(f, "{}", percent_text(p)),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Field(path) => write!(f, "{path}"),
            Operand::Literal(lit) => write!(f, "{lit}"),
        }
    }
}

// Precedence levels: or(0) < and(1) < not(2) < atoms(3).
fn fmt_prec(p: &Predicate, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
    let prec = match p {
        Predicate::Or(_) => 0,
        Predicate::And(_) => 1,
        Predicate::Not(_) => 2,
        Predicate::Cmp { .. } | Predicate::Has(_) => 3,
    };
    let need_parens = prec < min_prec;
    if need_parens {
        write!(f, "(")?;
    }
    match p {
        Predicate::Or(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, " or ")?;
                }
                fmt_prec(part, f, 1)?;
            }
        }
        Predicate::And(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, " and ")?;
                }
                fmt_prec(part, f, 2)?;
            }
        }
        Predicate::Not(inner) => {
            write!(f, "not ")?;
            fmt_prec(inner, f, 3)?;
        }
        Predicate::Cmp { op, lhs, rhs } => {
            write!(f, "{lhs} {} {rhs}", op.symbol())?;
        }
        Predicate::Has(path) => {
            write!(f, "has({path})")?;
        }
    }
    if need_parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// Minimal record for tests: a flat map keyed by path display text.
    pub struct MapRecord(pub BTreeMap<String, Value>);

    impl EvalRecord for MapRecord {
        fn field(&self, path: &FieldPath) -> Option<Value> {
            self.0.get(&path.to_string()).cloned()
        }
    }

    fn rider_record() -> MapRecord {
        let mut m = BTreeMap::new();
        m.insert("class".to_string(), Value::Str("rider".into()));
        m.insert("occlusion".to_string(), Value::Num(0.6));
        m.insert("attr.wheelchair".to_string(), Value::Bool(true));
        MapRecord(m)
    }

    fn field(path: FieldPath) -> Operand {
        Operand::Field(path)
    }

    fn num(n: f64) -> Operand {
        Operand::Literal(Literal::Num(n))
    }

    fn pct(num: u64, den: u64) -> Operand {
        Operand::Literal(Literal::Percent(Fraction::new(num, den)))
    }

    #[test]
    fn has_tests_presence() {
        let p = Predicate::Has(FieldPath::Attr("wheelchair".into()));
        assert!(p.eval(&rider_record()));
        assert!(!Predicate::Has(FieldPath::Attr("helmet".into())).eval(&rider_record()));
    }

    #[test]
    fn absent_field_comparison_is_false() {
        let p = Predicate::Cmp {
            op: CmpOp::Lt,
            lhs: field(FieldPath::DistanceM),
            rhs: num(50.0),
        };
        assert!(!p.eval(&rider_record()));
        // ...even for != which would be vacuously "true" under other semantics
        let p = Predicate::Cmp {
            op: CmpOp::Ne,
            lhs: field(FieldPath::DistanceM),
            rhs: num(50.0),
        };
        assert!(!p.eval(&rider_record()));
    }

    #[test]
    fn conjunction_with_percent_literal() {
        // class == "rider" and occlusion > 50%  over  {class: rider, occlusion: 0.6}
        // hand evaluation: "rider" == "rider" -> true; 0.6 > 0.5 -> true
        let p = Predicate::And(vec![
            Predicate::Cmp {
                op: CmpOp::Eq,
                lhs: field(FieldPath::Class),
                rhs: Operand::Literal(Literal::Str("rider".into())),
            },
            Predicate::Cmp {
                op: CmpOp::Gt,
                lhs: field(FieldPath::Occlusion),
                rhs: pct(50, 100),
            },
        ]);
        assert!(p.eval(&rider_record()));
    }

    #[test]
    fn percent_equals_plain_number() {
        let gt_pct = Predicate::Cmp {
            op: CmpOp::Gt,
            lhs: field(FieldPath::Occlusion),
            rhs: pct(50, 100),
        };
        let gt_num = Predicate::Cmp {
            op: CmpOp::Gt,
            lhs: field(FieldPath::Occlusion),
            rhs: num(0.5),
        };
        for occ in [0.0, 0.49, 0.5, 0.51, 1.0] {
            let mut m = BTreeMap::new();
            m.insert("occlusion".to_string(), Value::Num(occ));
            let rec = MapRecord(m);
            assert_eq!(gt_pct.eval(&rec), gt_num.eval(&rec), "occlusion {occ}");
        }
    }

    #[test]
    fn type_mismatch_is_false() {
        let p = Predicate::Cmp {
            op: CmpOp::Eq,
            lhs: field(FieldPath::Class),
            rhs: num(1.0),
        };
        assert!(!p.eval(&rider_record()));
    }

    #[test]
    fn normalization_sorts_commutative_structure() {
        let a = Predicate::Has(FieldPath::Attr("a".into()));
        let b = Predicate::Has(FieldPath::Attr("b".into()));
        let ab = Predicate::And(vec![a.clone(), b.clone()]);
        let ba = Predicate::And(vec![b, a]);
        assert_eq!(ab.normalized(), ba.normalized());
        assert_eq!(ab.canonical_text(), ba.canonical_text());

        let eq1 = Predicate::Cmp {
            op: CmpOp::Eq,
            lhs: field(FieldPath::Class),
            rhs: Operand::Literal(Literal::Str("rider".into())),
        };
        let eq2 = Predicate::Cmp {
            op: CmpOp::Eq,
            lhs: Operand::Literal(Literal::Str("rider".into())),
            rhs: field(FieldPath::Class),
        };
        assert_eq!(eq1.normalized(), eq2.normalized());

        // < is not commutative: operands stay put
        let lt = Predicate::Cmp {
            op: CmpOp::Lt,
            lhs: field(FieldPath::DistanceM),
            rhs: num(50.0),
        };
        assert_eq!(lt.normalized(), lt);
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let p = Predicate::And(vec![
            Predicate::Or(vec![
                Predicate::Has(FieldPath::Attr("a".into())),
                Predicate::Has(FieldPath::Attr("b".into())),
            ]),
            Predicate::Not(Box::new(Predicate::Has(FieldPath::Attr("c".into())))),
        ]);
        assert_eq!(
            p.to_string(),
            "(has(attr.a) or has(attr.b)) and not has(attr.c)"
        );
    }
}
