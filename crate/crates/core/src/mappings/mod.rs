//! The three planning-to-QUBO compilers: the generic time-slice encoding,
//! the CNF pipeline (encode, prune, clause penalties, degree reduction), and
//! the compact problem-specific direct encodings.

pub mod cnf;
pub mod direct;
pub mod timeslice;

pub use cnf::{cnf_qubo, encode_planning_cnf, CnfBuilder, CnfFormula, CnfQubo, CnfVarMeaning};
pub use direct::{direct_coloring_qubo, direct_hampath_qubo};
pub use timeslice::{
    time_slice_qubo, time_slice_variable_count, TimeSliceLayout, TimeSliceOptions, VariableCount,
};

use crate::error::{Error, Result};
use crate::gen::Family;

/// Which of the three compilers to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    TimeSlice,
    Cnf,
    Direct,
}

impl Mapping {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "timeslice" | "time-slice" => Ok(Mapping::TimeSlice),
            "cnf" => Ok(Mapping::Cnf),
            "direct" => Ok(Mapping::Direct),
            other => Err(Error::InvalidInput(format!("unknown mapping '{}'", other))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mapping::TimeSlice => "timeslice",
            Mapping::Cnf => "cnf",
            Mapping::Direct => "direct",
        }
    }
}

/// Plan length used when compiling a family instance of size `n`: visiting
/// problems need one step per site, coloring problems color everything in a
/// single parallel step.
pub fn plan_length_for(family: Family, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidInput("family size must be positive".into()));
    }
    Ok(match family {
        Family::Navigation => n,
        Family::Scheduling => 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_lengths_per_family() {
        assert_eq!(plan_length_for(Family::Navigation, 6).unwrap(), 6);
        assert_eq!(plan_length_for(Family::Scheduling, 12).unwrap(), 1);
        assert!(plan_length_for(Family::Scheduling, 0).is_err());
    }
}
