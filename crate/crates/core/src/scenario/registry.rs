//! Named initial data and sources: `zero`, `const:c`, `power4`
//! (`x^4 (1-x)^4`), `sin:k` (`sin(k pi x)`), `linear_from_x0` (`x - x0`).

use std::sync::Arc;

use crate::assembly::SourceFn;
use crate::field::Field;
use crate::num::{lit, Real};
use crate::polynomial::Polynomial;

enum Entry {
    Zero,
    Const(f64),
    Power4,
    Sin(f64),
    LinearFromX0,
}

fn lookup(name: &str) -> Result<Entry, String> {
    if let Some(c) = name.strip_prefix("const:") {
        return c
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .map(Entry::Const)
            .ok_or_else(|| format!("bad constant in `{name}`"));
    }
    if let Some(k) = name.strip_prefix("sin:") {
        return k
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .map(Entry::Sin)
            .ok_or_else(|| format!("bad wave number in `{name}`"));
    }
    match name {
        "zero" => Ok(Entry::Zero),
        "power4" => Ok(Entry::Power4),
        "linear_from_x0" => Ok(Entry::LinearFromX0),
        _ => Err(format!(
            "unknown registry entry `{name}` (expected zero, const:c, power4, sin:k or linear_from_x0)"
        )),
    }
}

/// Checks that `name` is a registry entry.
pub fn validate_name(name: &str) -> Result<(), String> {
    lookup(name).map(|_| ())
}

fn field<T: Real>(entry: Entry, x0: T) -> Arc<dyn Field<T>> {
    match entry {
        Entry::Zero => Arc::new(Polynomial::<T>::zero()),
        Entry::Const(c) => Arc::new(Polynomial::constant(lit::<T>(c))),
        Entry::Power4 => {
            let b = &Polynomial::<T>::monomial(1) * &Polynomial::new(vec![T::one(), -T::one()]);
            Arc::new(b.pow(4))
        }
        Entry::Sin(k) => {
            let w = lit::<T>(k) * T::PI();
            Arc::new(move |x: T, order: usize| {
                let phase = w * x + T::FRAC_PI_2() * lit(order as f64);
                w.powi(order as i32) * phase.sin()
            })
        }
        Entry::LinearFromX0 => Arc::new(Polynomial::linear_factor(x0)),
    }
}

/// Initial datum named `name`.
pub fn initial_field<T: Real>(name: &str, x0: T) -> Result<Arc<dyn Field<T>>, String> {
    Ok(field(lookup(name)?, x0))
}

/// Time-independent source named `name`; `zero` maps to `None`.
pub fn source_fn<T: Real>(name: &str, x0: T) -> Result<Option<SourceFn<T>>, String> {
    Ok(match lookup(name)? {
        Entry::Zero => None,
        entry => {
            let f = field(entry, x0);
            Some(Arc::new(move |_t: T, x: T| f.value(x)))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_evaluate() {
        let f = initial_field::<f64>("power4", 0.5).unwrap();
        assert_eq!(f.value(0.5), 0.5f64.powi(8));
        let s = initial_field::<f64>("sin:2", 0.5).unwrap();
        assert!(
            (s.derivative(0.125, 1) - 2.0 * std::f64::consts::PI * (0.25 * std::f64::consts::PI).cos()).abs() < 1e-12
        );
        let l = initial_field::<f64>("linear_from_x0", 0.25).unwrap();
        assert_eq!(l.value(1.0), 0.75);
        assert!(source_fn::<f64>("zero", 0.5).unwrap().is_none());
        assert_eq!(source_fn::<f64>("const:3", 0.5).unwrap().unwrap()(0.0, 0.2), 3.0);
        assert!(validate_name("cos:1").is_err());
        assert!(validate_name("const:x").is_err());
    }
}
