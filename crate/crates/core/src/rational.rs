//! Exact rational time/position arithmetic, in units of `L/c`.

use crate::error::{Error, Result};
use num_rational::Ratio;
use num_traits::Zero;

pub type Rat = Ratio<i64>;

pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(num, den)
}

/// Parses `"p/q"` or a bare integer `"n"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let err = || Error::Parse {
        line: 0,
        msg: format!("malformed rational '{s}'"),
    };
    if let Some((p, q)) = s.split_once('/') {
        let num: i64 = p.trim().parse().map_err(|_| err())?;
        let den: i64 = q.trim().parse().map_err(|_| err())?;
        if den == 0 {
            return Err(err());
        }
        Ok(Ratio::new(num, den))
    } else {
        let num: i64 = s.parse().map_err(|_| err())?;
        Ok(Ratio::from_integer(num))
    }
}

/// Formats as `p/q`, or as a bare integer when the denominator is one.
pub fn fmt_rat(r: Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn rat_abs(r: Rat) -> Rat {
    if r < Rat::zero() {
        -r
    } else {
        r
    }
}

pub fn rat_max(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rat(" 7 / 5 ").unwrap(), rat(7, 5));
        assert_eq!(parse_rat("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rat("-1/6").unwrap(), rat(-1, 6));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(fmt_rat(rat(3, 1)), "3");
        assert_eq!(fmt_rat(rat(7, 5)), "7/5");
        assert_eq!(fmt_rat(rat(14, 10)), "7/5");
    }
}
