pub mod error;
pub mod precision;
pub mod primes;
pub mod modspace;
pub mod confsearch;
pub mod titchmarsh;
pub mod scanner;
pub mod store;
pub mod zeta;
