//! Radio medium: topology, mobility, and channel arbitration.
//!
//! The channel is ideal except for collisions: a frame is decoded by a
//! listener iff it is the only in-range transmission overlapping the frame's
//! airtime at that listener (optionally relaxed by power capture).

use crate::engine::SimError;
use crate::frame::Frame;
use crate::rng::{NodeId, RngStream};
use crate::time::SimTime;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn dist(&self, other: &Position) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub enum TopologyKind {
    Clique,
    Geometric { range_m: f64 },
    Explicit { adj: Vec<BTreeSet<NodeId>> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityKind {
    Static,
    RandomWaypoint { speed_mps: f64, pause_s: f64 },
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub at: SimTime,
    pub node: NodeId,
    pub pos: Position,
}

/// Per-node random-waypoint progress.
#[derive(Debug, Clone, Copy)]
struct WaypointState {
    target: Position,
    pause_until: SimTime,
}

#[derive(Debug, Clone)]
pub struct ActiveTx {
    pub id: u64,
    pub sender: NodeId,
    pub start: SimTime,
    pub end: SimTime,
    pub frame: Frame,
}

/// Outcome of reception resolution at one listener.
#[derive(Debug)]
pub enum Reception {
    Decoded(Frame),
    Collision,
    Silence,
}

#[derive(Debug)]
pub struct Medium {
    n: usize,
    kind: TopologyKind,
    pub arena_m: f64,
    positions: Vec<Position>,
    mobility: MobilityKind,
    waypoints: Vec<WaypointState>,
    trace: Vec<TraceRow>,
    trace_cursor: usize,
    last_update: SimTime,
    /// Transmissions still relevant for overlap checks, pruned as time moves.
    txs: Vec<ActiveTx>,
    next_tx_id: u64,
    /// None: capture disabled (any overlap collides).
    pub capture_p: Option<f64>,
}

impl Medium {
    pub fn new(
        n: usize,
        kind: TopologyKind,
        arena_m: f64,
        positions: Vec<Position>,
        mobility: MobilityKind,
        trace: Vec<TraceRow>,
    ) -> Result<Self, SimError> {
        if let TopologyKind::Explicit { adj } = &kind {
            if adj.len() != n {
                return Err(SimError::Config(format!(
                    "adjacency list covers {} nodes, topology has {n}",
                    adj.len()
                )));
            }
            for (u, set) in adj.iter().enumerate() {
                for &v in set {
                    if v as usize >= n {
                        return Err(SimError::Config(format!("edge {u}-{v} out of range")));
                    }
                    if !adj[v as usize].contains(&(u as u32)) {
                        return Err(SimError::Config(format!("asymmetric edge {u}-{v}")));
                    }
                }
            }
        }
        for row in &trace {
            if row.pos.x < 0.0 || row.pos.y < 0.0 || row.pos.x > arena_m || row.pos.y > arena_m {
                return Err(SimError::Config(format!(
                    "trace row for node {} at {} outside arena",
                    row.node, row.at
                )));
            }
        }
        let waypoints = positions
            .iter()
            .map(|p| WaypointState {
                target: *p,
                pause_until: SimTime::ZERO,
            })
            .collect();
        Ok(Medium {
            n,
            kind,
            arena_m,
            positions,
            mobility,
            waypoints,
            trace,
            trace_cursor: 0,
            last_update: SimTime::ZERO,
            txs: Vec::new(),
            next_tx_id: 0,
            capture_p: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn position(&self, node: NodeId) -> Position {
        self.positions
            .get(node as usize)
            .copied()
            .unwrap_or(Position { x: 0.0, y: 0.0 })
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        if a == b {
            return false;
        }
        match &self.kind {
            TopologyKind::Clique => true,
            TopologyKind::Geometric { range_m } => {
                self.positions[a as usize].dist(&self.positions[b as usize]) <= *range_m
            }
            TopologyKind::Explicit { adj } => adj[a as usize].contains(&b),
        }
    }

    pub fn in_range_neighbors(&self, node: NodeId) -> Vec<NodeId> {
        assert!(
            (node as usize) < self.n,
            "unknown node {node} in topology of {}",
            self.n
        );
        (0..self.n as NodeId)
            .filter(|&v| self.in_range(node, v))
            .collect()
    }

    pub fn degree(&self, node: NodeId) -> usize {
        (0..self.n as NodeId).filter(|&v| self.in_range(node, v)).count()
    }

    /// BFS hop distance from `root` over the current adjacency.
    pub fn hop_distances(&self, root: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        let mut frontier = vec![root];
        dist[root as usize] = Some(0);
        let mut h = 0u32;
        while !frontier.is_empty() {
            h += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for v in 0..self.n as NodeId {
                    if dist[v as usize].is_none() && self.in_range(u, v) {
                        dist[v as usize] = Some(h);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    // ------------------------------------------------------------------
    // Mobility
    // ------------------------------------------------------------------

    /// Advances node positions to time `to`.
    pub fn advance_mobility(&mut self, to: SimTime, waypoint_rngs: &mut [RngStream]) {
        let dt = (to.saturating_sub(self.last_update)).as_secs_f64();
        self.last_update = to;
        match self.mobility {
            MobilityKind::Static => {}
            MobilityKind::RandomWaypoint { speed_mps, pause_s } => {
                if speed_mps <= 0.0 {
                    return;
                }
                for i in 0..self.n {
                    let mut remaining = dt;
                    while remaining > 0.0 {
                        let wp = &mut self.waypoints[i];
                        if wp.pause_until > to {
                            break;
                        }
                        let pos = self.positions[i];
                        let d = pos.dist(&wp.target);
                        let step = speed_mps * remaining;
                        if d <= step {
                            self.positions[i] = wp.target;
                            remaining -= d / speed_mps;
                            let rng = &mut waypoint_rngs[i];
                            wp.target = Position {
                                x: rng.uniform(0.0, self.arena_m),
                                y: rng.uniform(0.0, self.arena_m),
                            };
                            if pause_s > 0.0 {
                                wp.pause_until = to + SimTime::from_secs_f64(pause_s);
                                break;
                            }
                        } else {
                            let f = step / d;
                            self.positions[i] = Position {
                                x: pos.x + (wp.target.x - pos.x) * f,
                                y: pos.y + (wp.target.y - pos.y) * f,
                            };
                            remaining = 0.0;
                        }
                    }
                }
            }
            MobilityKind::Trace => {
                while self.trace_cursor < self.trace.len() && self.trace[self.trace_cursor].at <= to
                {
                    let row = self.trace[self.trace_cursor];
                    self.positions[row.node as usize] = row.pos;
                    self.trace_cursor += 1;
                }
            }
        }
    }

    // ------------------------------------------------------------------
    // Channel
    // ------------------------------------------------------------------

    pub fn begin_tx(&mut self, sender: NodeId, frame: Frame, start: SimTime, end: SimTime) -> u64 {
        debug_assert!(end > start);
        let id = self.next_tx_id;
        self.next_tx_id += 1;
        self.txs.push(ActiveTx {
            id,
            sender,
            start,
            end,
            frame,
        });
        id
    }

    pub fn tx(&self, tx_id: u64) -> Option<&ActiveTx> {
        self.txs.iter().find(|t| t.id == tx_id)
    }

    /// Drops transmissions that can no longer overlap anything new.
    pub fn prune(&mut self, now: SimTime) {
        let horizon = now.saturating_sub(SimTime::from_millis(50));
        self.txs.retain(|t| t.end >= horizon);
    }

    /// True if some in-range transmission is on the air at `now` for `node`.
    pub fn busy_at(&self, node: NodeId, now: SimTime) -> Option<SimTime> {
        self.txs
            .iter()
            .filter(|t| t.start <= now && t.end > now && self.in_range(t.sender, node))
            .map(|t| t.end)
            .max()
    }

    /// Resolves reception of transmission `tx_id` at `listener`.
    ///
    /// The caller guarantees the listener's radio was on for the whole
    /// airtime and that it was not itself transmitting. Exactly one in-range
    /// transmission overlapping the frame's window decodes; two or more
    /// collide unless capture lets the geometrically nearest sender through.
    pub fn resolve_reception(
        &self,
        listener: NodeId,
        tx_id: u64,
        capture_rng: &mut RngStream,
    ) -> Reception {
        let target = match self.txs.iter().find(|t| t.id == tx_id) {
            Some(t) => t,
            None => return Reception::Silence,
        };
        if !self.in_range(target.sender, listener) {
            return Reception::Silence;
        }
        let overlapping: Vec<&ActiveTx> = self
            .txs
            .iter()
            .filter(|t| {
                t.sender != listener
                    && t.start < target.end
                    && t.end > target.start
                    && self.in_range(t.sender, listener)
            })
            .collect();
        if overlapping.len() <= 1 {
            return Reception::Decoded(target.frame.clone());
        }
        if let Some(p) = self.capture_p {
            let lpos = self.positions[listener as usize];
            let nearest = overlapping
                .iter()
                .min_by(|a, b| {
                    let da = self.positions[a.sender as usize].dist(&lpos);
                    let db = self.positions[b.sender as usize].dist(&lpos);
                    da.partial_cmp(&db).unwrap().then(a.sender.cmp(&b.sender))
                })
                .unwrap();
            if nearest.id == target.id && capture_rng.chance(p) {
                return Reception::Decoded(target.frame.clone());
            }
        }
        Reception::Collision
    }
}

/// Parses a mobility trace: whitespace-separated `time_s node_id x_m y_m`
/// rows sorted by time. Lines starting with `#` are comments.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, SimError> {
    let mut rows = Vec::new();
    let mut last = SimTime::ZERO;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(SimError::Config(format!(
                "trace line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64, SimError> {
            s.parse::<f64>()
                .map_err(|_| SimError::Config(format!("trace line {}: bad {what} '{s}'", lineno + 1)))
        };
        let t = parse_f(fields[0], "time")?;
        let node: NodeId = fields[1]
            .parse()
            .map_err(|_| SimError::Config(format!("trace line {}: bad node id", lineno + 1)))?;
        let x = parse_f(fields[2], "x")?;
        let y = parse_f(fields[3], "y")?;
        let at = SimTime::from_secs_f64(t);
        if at < last {
            return Err(SimError::Config(format!(
                "trace line {}: rows not sorted by time",
                lineno + 1
            )));
        }
        last = at;
        rows.push(TraceRow {
            at,
            node,
            pos: Position { x, y },
        });
    }
    Ok(rows)
}
