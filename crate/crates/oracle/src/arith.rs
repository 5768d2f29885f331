//! Arbitrary-precision reference for integer arithmetic.

use fohh_core::Term;
use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BigEval {
    Value(BigInt),
    /// Mentions a variable or parameter.
    Open,
    /// A constant or a non-arithmetic compound.
    NotNumeric,
}

pub fn eval_big(t: &Term) -> BigEval {
    match t {
        Term::Int(n) => BigEval::Value(BigInt::from(*n)),
        Term::Var(_) | Term::Param(_) => BigEval::Open,
        Term::Const(_) => BigEval::NotNumeric,
        Term::Compound(f, args) => {
            let vals: Vec<BigEval> = args.iter().map(eval_big).collect();
            if vals.contains(&BigEval::NotNumeric) {
                return BigEval::NotNumeric;
            }
            if vals.contains(&BigEval::Open) {
                return BigEval::Open;
            }
            let nums: Vec<BigInt> = vals
                .into_iter()
                .map(|v| match v {
                    BigEval::Value(n) => n,
                    _ => unreachable!(),
                })
                .collect();
            match (&**f, nums.as_slice()) {
                ("+", [a, b]) => BigEval::Value(a + b),
                ("-", [a, b]) => BigEval::Value(a - b),
                ("*", [a, b]) => BigEval::Value(a * b),
                ("-", [a]) => BigEval::Value(-a),
                _ => BigEval::NotNumeric,
            }
        }
    }
}

/// Whether every intermediate result of a closed expression fits in an
/// `i64`, as a machine evaluator with checked operations needs.
pub fn fits_i64_everywhere(t: &Term) -> bool {
    let lo = BigInt::from(i64::MIN);
    let hi = BigInt::from(i64::MAX);
    fn go(t: &Term, lo: &BigInt, hi: &BigInt) -> bool {
        if let Term::Compound(_, args) = t {
            if !args.iter().all(|a| go(a, lo, hi)) {
                return false;
            }
        }
        match eval_big(t) {
            BigEval::Value(v) => &v >= lo && &v <= hi,
            _ => true,
        }
    }
    go(t, &lo, &hi)
}
