//! Deterministic desk-scale simulator and benchmark harness for
//! language-guided object search.
//!
//! A robot explores an unknown 2D building looking for a target object. Each
//! decision round it maps with a simulated lidar, detects objects with a noisy
//! open-vocabulary detector, gets a numbered list of candidate waypoints and asks
//! a reasoner which one to visit next. Three reasoners are provided:
//!
//! * [`reasoning::vefep_select`], a volumetric-gain frontier baseline that
//!   drives straight to any detected target,
//! * [`reasoning::scripted_select`], a deterministic semantic scorer that uses
//!   room/object affinities, novelty and a bounded memory of past choices,
//! * [`llm_bridge::llm_select`], which fills prompt templates, calls a
//!   chat-completion endpoint and parses the returned form.
//!
//! The [`harness`] module runs episodes and seeded trial batches and writes
//! JSONL, CSV and SVG artifacts.

pub mod explore_graph;
pub mod geometry;
pub mod harness;
pub mod llm_bridge;
pub mod mapping;
pub mod params;
pub mod perception;
pub mod reasoning;
pub mod rng;
pub mod world;

pub use geometry::{Cell, Point};
pub use mapping::{CellState, LidarModel, OccupancyGrid};
pub use params::ExperimentParams;
pub use world::{EnvironmentSpec, Pose, Scenario, SimClock, Task};
