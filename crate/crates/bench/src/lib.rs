//! Fixtures shared by the benchmarks.

use gl2measure::sample::Sampler;
use gl2measure::{full_k_at, DDDSet, GlobalParams, Level, Result, SimpleFn};

pub fn params(q: u32) -> GlobalParams {
    GlobalParams::new(q).expect("q is prime")
}

/// `n` random ddd-sets.
pub fn random_sets(p: &GlobalParams, seed: u64, n: usize) -> Result<Vec<DDDSet>> {
    let mut s = Sampler::new(p, seed)?;
    (0..n).map(|_| s.dddset(4)).collect()
}

/// `n` pairs of distinct presentations of one set.
pub fn equal_pairs(p: &GlobalParams, seed: u64, n: usize) -> Result<Vec<(DDDSet, DDDSet)>> {
    let mut s = Sampler::new(p, seed)?;
    (0..n)
        .map(|_| {
            let a = s.dddset(3)?.reduce()?;
            let b = s.rewrite(&a, 3)?;
            Ok((a, b))
        })
        .collect()
}

/// `1_K` written as a sum over the cosets of `K_level`.
pub fn k_indicator(p: &GlobalParams, level: Level) -> Result<SimpleFn> {
    Ok(SimpleFn::indicator(&full_k_at(p, level)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gl2measure::MeasureContext;

    #[test]
    fn fixtures_build() {
        let p = params(2);
        assert_eq!(random_sets(&p, 1, 3).unwrap().len(), 3);
        for (a, b) in equal_pairs(&p, 1, 3).unwrap() {
            assert!(a.set_equal(&b, &p).unwrap());
        }
        let f = k_indicator(&p, Level::new(1, 0)).unwrap();
        assert_eq!(gl2measure::integrate(&MeasureContext::new(p), &f), gl2measure::ValueElem::one());
    }
}
