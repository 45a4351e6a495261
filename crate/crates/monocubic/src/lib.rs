//! Enumeration of monogenized cubic fields by height, with 2-class-group and
//! narrow 2-class-group computation by two independent methods: a bijection
//! with orbits of integral binary quartic forms, and direct ideal-lattice
//! class-group computation. Exact local masses and moment predictions are
//! provided for comparison against the enumerated data.

pub mod acceptance;
pub mod arith;
pub mod class_groups;
pub mod corpus;
pub mod cubic;
pub mod fp;
pub mod interval;
pub mod local;
pub mod moments;
pub mod orders;
pub mod qenum;
pub mod qequiv;
pub mod qring;
pub mod quartic;
pub mod rint;
pub mod sturm;
