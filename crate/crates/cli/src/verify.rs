//! Built-in verification suites: plane axioms, matchings, subset families,
//! replica bounds, the worked example, and the complete-graph lower bound.

use std::collections::BTreeSet;
use std::str::FromStr;

use anyhow::{bail, Result};
use fpppart::field::{prime_power, MAX_ORDER};
use fpppart::graph_io::{gen_complete, gen_preferential, gen_random};
use fpppart::metrics::{
    accumulate, check_constrained_bound, complete_graph_lower_bound, edge2d_family,
    family_multiplicity_check, fpp_line_family, torus_family,
};
use fpppart::partition::torus_subset;
use fpppart::{
    compute_metrics, perfect_matching, Edge, Method, Partitioner, PartitionerConfig, ProjPlane,
    SurplusPolicy,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Default,
    Example,
    LowerBound,
    Axioms,
    Bounds,
}

impl FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "default" | "all" => Suite::Default,
            "example" => Suite::Example,
            "lower-bound" => Suite::LowerBound,
            "axioms" => Suite::Axioms,
            "bounds" => Suite::Bounds,
            other => bail!("unknown suite {other:?} (expected default, example, lower-bound, axioms or bounds)"),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub group: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub cases: Vec<CaseResult>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

struct Collector(Vec<CaseResult>);

impl Collector {
    fn push(&mut self, group: &'static str, name: String, outcome: Result<String>) {
        let (pass, detail) = match outcome {
            Ok(d) => (true, d),
            Err(e) => (false, e.to_string()),
        };
        self.0.push(CaseResult {
            group,
            name,
            pass,
            detail,
        });
    }
}

const PLANE_ORDERS: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

pub fn run(suite: Suite) -> VerifyReport {
    let mut c = Collector(Vec::new());
    match suite {
        Suite::Example => example(&mut c),
        Suite::LowerBound => lower_bound(&mut c),
        Suite::Axioms => axioms(&mut c),
        Suite::Bounds => bounds(&mut c),
        Suite::Default => {
            example(&mut c);
            axioms(&mut c);
            bounds(&mut c);
            lower_bound(&mut c);
        }
    }
    let failed = c.0.iter().filter(|r| !r.pass).count();
    VerifyReport {
        suite,
        passed: c.0.len() - failed,
        failed,
        cases: c.0,
    }
}

fn example(c: &mut Collector) {
    let outcome = (|| {
        let edges: Vec<Edge> = [
            (0, 1),
            (0, 3),
            (1, 5),
            (1, 4),
            (2, 0),
            (2, 3),
            (3, 4),
            (6, 4),
        ]
        .into_iter()
        .map(Edge::from)
        .collect();
        let p = Partitioner::new(PartitionerConfig::new(Method::Dfpp, 7))?;
        let r = compute_metrics(&p.partition(&edges), 7)?;
        if (r.replicas, r.vertices) != (15, 7) {
            bail!("RF = {}/{}, expected 15/7", r.replicas, r.vertices);
        }
        Ok(format!("RF = 15/7 ≈ {:.2} < √7", r.rf))
    })();
    c.push("example", "dfpp-q2-walkthrough".into(), outcome);
}

fn axioms(c: &mut Collector) {
    for q in PLANE_ORDERS {
        let plane = match ProjPlane::build(q) {
            Ok(p) => p,
            Err(e) => {
                c.push("axioms", format!("plane q={q}"), Err(e.into()));
                continue;
            }
        };
        let report = plane.check_axioms();
        c.push(
            "axioms",
            format!("plane q={q}"),
            if report.all_pass() {
                Ok(format!("{} points and lines", report.points))
            } else {
                Err(anyhow::anyhow!("{report:?}"))
            },
        );
        c.push(
            "matching",
            format!("perfect matching q={q}"),
            perfect_matching(&plane)
                .map_err(anyhow::Error::from)
                .and_then(|m| {
                    let distinct: BTreeSet<u32> = m.as_slice().iter().copied().collect();
                    let on_line =
                        (0..plane.size()).all(|i| plane.incident(i, m.point_for(i) as usize));
                    if distinct.len() == plane.size() && on_line {
                        Ok(format!("bijection of size {}", plane.size()))
                    } else {
                        bail!("not a bijection onto incident points")
                    }
                }),
        );
        c.push(
            "family",
            format!("fpp lines q={q}"),
            family_multiplicity_check(&fpp_line_family(&plane), plane.size())
                .map_err(anyhow::Error::from)
                .and_then(|f| {
                    if f.r == q + 1 && f.pass {
                        Ok(format!("r = {} ≥ √{}", f.r, f.subsets))
                    } else {
                        bail!("{f:?}")
                    }
                }),
        );
    }
    for s in 2..=8u64 {
        for (name, fam, want) in [
            ("edge2d", edge2d_family(s), 2 * s - 1),
            ("torus", torus_family(s), s + s / 2),
        ] {
            c.push(
                "family",
                format!("{name} grid s={s}"),
                family_multiplicity_check(&fam, (s * s) as usize)
                    .map_err(anyhow::Error::from)
                    .and_then(|f| {
                        if f.r == want && f.pass {
                            Ok(format!("r = {} ≥ {s}", f.r))
                        } else {
                            bail!("{f:?}, expected r = {want}")
                        }
                    }),
            );
        }
    }
    for s in 1..=8u64 {
        let outcome = (|| {
            let subsets: Vec<BTreeSet<(u64, u64)>> = (0..s * s)
                .map(|g| torus_subset(s, (g / s, g % s)).collect())
                .collect();
            for (i, a) in subsets.iter().enumerate() {
                for b in &subsets[i..] {
                    if a.is_disjoint(b) {
                        bail!("disjoint torus subsets");
                    }
                }
            }
            Ok(format!("{} subsets pairwise intersect", subsets.len()))
        })();
        c.push("torus", format!("torus intersections s={s}"), outcome);
    }
    let outcome = (|| {
        let mut count = 0;
        for q in 2..=MAX_ORDER {
            if prime_power(q).is_some() {
                let n = q * q + q + 1;
                if !(n <= (q + 1) * (q + 1) && q * q <= n) {
                    bail!("√n ≤ q+1 ≤ √n+1 fails at q={q}");
                }
                count += 1;
            }
        }
        Ok(format!("holds for {count} prime powers"))
    })();
    c.push("arith", "plane order brackets √n".into(), outcome);
}

fn bounds(c: &mut Collector) {
    for seed in 0..3u64 {
        let graphs = [
            ("K_60", gen_complete(60).expect("m >= 2")),
            (
                "random(800,8000)",
                gen_random(800, 8000, seed).expect("feasible"),
            ),
            ("pa(800,4)", gen_preferential(800, 4, seed).expect("m > d")),
        ];
        for method in Method::ALL {
            for parts in [7u64, 13, 21, 31] {
                for (gname, g) in &graphs {
                    let outcome = (|| {
                        let p = Partitioner::new(
                            PartitionerConfig::new(method, parts).with_seed(seed),
                        )?;
                        let acc = accumulate(&p.partition(g), parts)?;
                        let check = check_constrained_bound(p.replica_bound(), &acc);
                        if check.pass {
                            Ok(format!(
                                "max replicas {} ≤ {}",
                                check.max_replicas, check.bound
                            ))
                        } else {
                            bail!("vertex {:?} exceeds bound {}", check.witness, check.bound)
                        }
                    })();
                    c.push(
                        "bound",
                        format!("{method} n={parts} {gname} seed={seed}"),
                        outcome,
                    );
                }
            }
        }
    }
    let g = gen_random(600, 5000, 17).expect("feasible");
    for parts in [10u64, 20, 40] {
        for method in [Method::Fpp, Method::Dfpp] {
            let outcome = (|| {
                let cfg = PartitionerConfig::new(method, parts).with_surplus(SurplusPolicy::Fold);
                let p = Partitioner::new(cfg)?;
                let acc = accumulate(&p.partition(&g), parts)?;
                let check = check_constrained_bound(p.replica_bound(), &acc);
                if check.pass {
                    Ok(format!(
                        "max replicas {} ≤ {}",
                        check.max_replicas, check.bound
                    ))
                } else {
                    bail!("vertex {:?} exceeds bound {}", check.witness, check.bound)
                }
            })();
            c.push("bound", format!("{method} n={parts} fold"), outcome);
        }
    }
}

fn lower_bound(c: &mut Collector) {
    let k50 = gen_complete(50).expect("m >= 2");
    for method in Method::ALL {
        for parts in [7u64, 13, 21] {
            let outcome = (|| {
                let p = Partitioner::new(PartitionerConfig::new(method, parts))?;
                let r = compute_metrics(&p.partition(&k50), parts)?;
                let bound = if r.alpha > 0.0 {
                    complete_graph_lower_bound(50, parts, r.alpha)?
                } else {
                    0.0
                };
                if r.rf >= bound {
                    Ok(format!(
                        "RF {:.3} ≥ {:.3} (α = {:.3})",
                        r.rf, bound, r.alpha
                    ))
                } else {
                    bail!("RF {:.3} < {:.3}", r.rf, bound)
                }
            })();
            c.push("lower-bound", format!("{method} K_50 n={parts}"), outcome);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_suite_passes() {
        let r = run(Suite::Example);
        assert_eq!(r.cases.len(), 1);
        assert!(r.all_pass());
    }

    #[test]
    fn default_suite_is_large_and_green() {
        let r = run(Suite::Default);
        assert!(r.cases.len() >= 200, "{} cases", r.cases.len());
        let failures: Vec<_> = r.cases.iter().filter(|c| !c.pass).collect();
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn suite_names() {
        assert_eq!("lower-bound".parse::<Suite>().unwrap(), Suite::LowerBound);
        assert!("nope".parse::<Suite>().is_err());
    }
}
