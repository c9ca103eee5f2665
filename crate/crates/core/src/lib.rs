//! Rank probabilities of random real `N x N x 2` tensors.
//!
//! A Gaussian `N x N x 2` tensor has rank `N` exactly when the pencil
//! `det(T1 - λ T2) = 0` has only real roots, which happens with probability
//! `P_N = Γ((N+1)/2)^N / G(N+1)`. This crate evaluates `P_N` exactly by
//! several independent routes, checks it by Monte Carlo simulation, and
//! classifies and decomposes concrete tensors.

pub mod exact_arith;
pub mod linalg;
pub mod mc_simulator;
pub mod prob_engine;
pub mod rank_tool;
pub mod rng;
