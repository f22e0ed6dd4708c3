use serde::Serialize;

use crate::algebra::GroupElem;
use crate::error::Result;
use crate::measures::SparseMeasure;

use super::rng::{rng_from_seed, StepSampler};

/// A sampled trajectory `z_k = g_1 ⋯ g_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkRecord {
    pub seed: u64,
    pub steps: Vec<GroupElem>,
    /// `z_0 = e, z_1, …, z_n`.
    pub partials: Vec<GroupElem>,
}

impl WalkRecord {
    /// `M_k = z_k.n`, starting with `M_0 = 0`.
    pub fn exponents(&self) -> Vec<i64> {
        self.partials.iter().map(|z| z.n).collect()
    }

    pub fn endpoint(&self) -> &GroupElem {
        self.partials.last().expect("z_0 is always present")
    }
}

#[derive(Serialize)]
pub struct WalkRecordJson {
    pub seed: u64,
    pub steps: Vec<String>,
    pub partials: Vec<String>,
    pub exponents: Vec<i64>,
}

impl From<&WalkRecord> for WalkRecordJson {
    fn from(r: &WalkRecord) -> Self {
        WalkRecordJson {
            seed: r.seed,
            steps: r.steps.iter().map(|g| g.to_string()).collect(),
            partials: r.partials.iter().map(|g| g.to_string()).collect(),
            exponents: r.exponents(),
        }
    }
}

/// `steps` i.i.d. increments from `t`, deterministic in `seed`.
pub fn sample_path(t: &SparseMeasure, steps: usize, seed: u64) -> Result<WalkRecord> {
    let sampler = StepSampler::new(t)?;
    let mut rng = rng_from_seed(seed);
    let mut z = GroupElem::identity(t.ctx());
    let mut record = WalkRecord { seed, steps: Vec::with_capacity(steps), partials: vec![z.clone()] };
    for _ in 0..steps {
        let g = sampler.sample(&mut rng).clone();
        z = z.mul(&g);
        record.steps.push(g);
        record.partials.push(z.clone());
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldContext;
    use crate::measures::e_bs;

    #[test]
    fn empty_path_is_identity() {
        let r = sample_path(&e_bs(), 0, 5).unwrap();
        assert!(r.endpoint().is_identity());
        assert!(r.steps.is_empty());
    }

    #[test]
    fn dirac_walk_is_power() {
        let ctx = FieldContext::baumslag_solitar(3).unwrap();
        let g = GroupElem::parse(ctx, "(2/3 | 1)").unwrap();
        let r = sample_path(&SparseMeasure::point(g.clone()), 7, 1).unwrap();
        assert_eq!(*r.endpoint(), g.pow(7));
    }

    #[test]
    fn deterministic_and_consistent() {
        let a = sample_path(&e_bs(), 200, 42).unwrap();
        assert_eq!(a, sample_path(&e_bs(), 200, 42).unwrap());
        assert_ne!(a, sample_path(&e_bs(), 200, 43).unwrap());
        for k in 1..=200 {
            assert_eq!(a.partials[k], a.partials[k - 1].mul(&a.steps[k - 1]));
        }
    }
}
