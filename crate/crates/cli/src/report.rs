//! Run reports, check lines and number formatting.

use num_rational::Ratio;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Na,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Na => "na",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

/// Deterministic report: no wall-clock values.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub name: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tester: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub testability: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracles: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decode: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Value>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn check(&mut self, id: &str, status: Status, detail: impl Into<String>) {
        self.checks.push(Check { id: id.to_string(), status, detail: detail.into() });
    }

    pub fn assert(&mut self, id: &str, ok: bool, detail: impl Into<String>) {
        self.check(id, Status::from_bool(ok), detail);
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn status_of(&self, id: &str) -> Option<Status> {
        let mut found = None;
        for c in self.checks.iter().filter(|c| c.id == id) {
            found = Some(match (found, c.status) {
                (Some(Status::Fail), _) | (_, Status::Fail) => Status::Fail,
                (Some(Status::Pass), _) | (_, Status::Pass) => Status::Pass,
                _ => Status::Na,
            });
        }
        found
    }

    /// Appends another report's sections and checks.
    pub fn merge(&mut self, other: RunReport) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f;
                }
            )*};
        }
        take!(complex, spectral, code, tester, testability, oracles, decode, montecarlo, plan);
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check_lines(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{:<4} {}  {}\n", c.status.as_str(), c.id, c.detail))
            .collect()
    }
}

/// Stage timings, kept apart from the deterministic report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn record<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = std::time::Instant::now();
        let out = f();
        self.stages.push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }
}

pub fn ratio<T: std::fmt::Display + Clone + num_traits::One + PartialEq>(r: &Ratio<T>) -> String {
    if *r.denom() == T::one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Twelve significant digits, shortest form.
pub fn float12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.11e}", x);
    let v: f64 = s.parse().expect("formatted float parses");
    if v.abs() < 1e-6 || v.abs() >= 1e16 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formats() {
        assert_eq!(ratio(&Ratio::new(2u64, 4)), "1/2");
        assert_eq!(ratio(&Ratio::new(0u64, 4)), "0");
        assert_eq!(ratio(&Ratio::new(-3i64, 9)), "-1/3");
        assert_eq!(float12(0.1 + 0.2), "0.3");
        assert_eq!(float12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(float12(1e-30), "1e-30");
    }

    #[test]
    fn status_aggregation() {
        let mut r = RunReport::default();
        r.check("x", Status::Na, "");
        assert_eq!(r.status_of("x"), Some(Status::Na));
        r.assert("x", true, "");
        assert_eq!(r.status_of("x"), Some(Status::Pass));
        r.assert("x", false, "");
        assert_eq!(r.status_of("x"), Some(Status::Fail));
        assert_eq!(r.status_of("y"), None);
        assert_eq!(r.failures(), 1);
    }
}
