//! Property tests for predicate evaluation: totality and determinism over
//! generated (predicate, record) pairs, and percent-literal semantics.

use std::collections::BTreeMap;

use dars_core::{
    BboxField, CmpOp, EvalRecord, FieldPath, Fraction, Literal, Operand, Predicate, Value,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct GenRecord(BTreeMap<String, Value>);

impl EvalRecord for GenRecord {
    fn field(&self, path: &FieldPath) -> Option<Value> {
        self.0.get(&path.to_string()).cloned()
    }
}

fn any_path() -> impl Strategy<Value = FieldPath> {
    let name = "[a-c]";
    prop_oneof![
        Just(FieldPath::Class),
        name.prop_map(FieldPath::Attr),
        name.prop_map(FieldPath::Meta),
        name.prop_map(FieldPath::Frame),
        prop_oneof![
            Just(BboxField::X),
            Just(BboxField::Y),
            Just(BboxField::W),
            Just(BboxField::H),
            Just(BboxField::Area)
        ]
        .prop_map(FieldPath::Bbox),
        Just(FieldPath::DistanceM),
        Just(FieldPath::Occlusion),
    ]
}

fn any_literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        "[a-c]{0,3}".prop_map(Literal::Str),
        (-100.0f64..100.0).prop_map(Literal::Num),
        (0u64..200, 1u64..10).prop_map(|(n, d)| Literal::Percent(Fraction::new(n, d * 100))),
        any::<bool>().prop_map(Literal::Bool),
    ]
}

fn any_operand() -> impl Strategy<Value = Operand> {
    prop_oneof![
        any_path().prop_map(Operand::Field),
        any_literal().prop_map(Operand::Literal),
    ]
}

fn any_cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
    ]
}

fn any_predicate() -> impl Strategy<Value = Predicate> {
    let leaf = prop_oneof![
        (any_cmp_op(), any_operand(), any_operand())
            .prop_map(|(op, lhs, rhs)| Predicate::Cmp { op, lhs, rhs }),
        any_path().prop_map(Predicate::Has),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(Predicate::And),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Predicate::Or),
            inner.prop_map(|p| Predicate::Not(Box::new(p))),
        ]
    })
}

fn any_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        "[a-c]{0,3}".prop_map(Value::Str),
        (-100.0f64..100.0).prop_map(Value::Num),
        any::<bool>().prop_map(Value::Bool),
    ]
}

fn any_record() -> impl Strategy<Value = GenRecord> {
    let keys = prop_oneof![
        Just("class".to_string()),
        "attr\\.[a-c]",
        "meta\\.[a-c]",
        "frame\\.[a-c]",
        Just("bbox.x".to_string()),
        Just("bbox.area".to_string()),
        Just("distance_m".to_string()),
        Just("occlusion".to_string()),
    ];
    prop::collection::btree_map(keys, any_value(), 0..6).prop_map(GenRecord)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    /// Evaluation terminates on every generated pair and repeated evaluation
    /// yields identical results.
    #[test]
    fn eval_is_total_and_deterministic(p in any_predicate(), r in any_record()) {
        let first = p.eval(&r);
        let second = p.eval(&r);
        prop_assert_eq!(first, second);
        // normalization preserves meaning
        prop_assert_eq!(p.normalized().eval(&r), first);
    }
}

proptest! {
    /// `x > p%` behaves exactly like `x > p/100` on every record.
    #[test]
    fn percent_literals_scale_to_fractions(r in any_record(), n in 0u64..150) {
        let pct = Predicate::Cmp {
            op: CmpOp::Gt,
            lhs: Operand::Field(FieldPath::Occlusion),
            rhs: Operand::Literal(Literal::Percent(Fraction::new(n, 100))),
        };
        let plain = Predicate::Cmp {
            op: CmpOp::Gt,
            lhs: Operand::Field(FieldPath::Occlusion),
            rhs: Operand::Literal(Literal::Num(n as f64 / 100.0)),
        };
        prop_assert_eq!(pct.eval(&r), plain.eval(&r));
    }

    /// Normalization is idempotent and order-insensitive for and/or.
    #[test]
    fn normalization_is_stable(a in any_predicate(), b in any_predicate()) {
        let ab = Predicate::And(vec![a.clone(), b.clone()]);
        let ba = Predicate::And(vec![b, a]);
        prop_assert_eq!(ab.normalized(), ba.normalized());
        let n = ab.normalized();
        prop_assert_eq!(n.normalized(), n);
    }
}
