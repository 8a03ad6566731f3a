use std::fmt;
use std::str::FromStr;

/// `lo:hi[:step]` from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: Option<f64>,
}

impl RangeSpec {
    /// Grid points `lo + k·step` up to `hi` (inclusive up to rounding).
    /// Without a step the two endpoints are returned.
    pub fn points(&self) -> Vec<f64> {
        match self.step {
            None if self.lo == self.hi => vec![self.lo],
            None => vec![self.lo, self.hi],
            Some(step) => {
                let n = ((self.hi - self.lo) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| self.lo + step * k as f64).collect()
            }
        }
    }
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = text.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(format!("expected lo:hi or lo:hi:step, got {text:?}"));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {s:?} in range {text:?}: {e}"))
        };
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let step = parts.get(2).map(|s| num(s)).transpose()?;
        if !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(format!(
                "range {text:?} must satisfy lo <= hi with finite ends"
            ));
        }
        if let Some(st) = step {
            if !(st.is_finite() && st > 0.0) {
                return Err(format!("step in {text:?} must be positive"));
            }
            if (hi - lo) / st > 1e7 {
                return Err(format!("range {text:?} has too many points"));
            }
        }
        Ok(Self { lo, hi, step })
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "{}:{}:{}", self.lo, self.hi, s),
            None => write!(f, "{}:{}", self.lo, self.hi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_expands() {
        let r: RangeSpec = "-3:3:0.5".parse().unwrap();
        let p = r.points();
        assert_eq!(p.len(), 13);
        assert_eq!(p[0], -3.0);
        assert!((p[12] - 3.0).abs() < 1e-12);
        let r: RangeSpec = "0:10:0.05".parse().unwrap();
        assert_eq!(r.points().len(), 201);
        let r: RangeSpec = "1:2".parse().unwrap();
        assert_eq!(r.points(), vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "1", "a:b", "3:1:0.1", "0:1:0", "0:1:-1", "0:1:2:3", "0:inf:1",
        ] {
            assert!(bad.parse::<RangeSpec>().is_err(), "{bad}");
        }
    }
}
