//! Named topologies shared by tests, the CLI and the browser demo.

use std::f64::consts::{PI, TAU};

use crate::topology::{
    build_topology, grid_spacing, place_nodes, Node, NodeId, NodeSet, Placement, Position, Role,
    Topology, DEFAULT_AREA_SIDE,
};

pub const DEFAULT_RANGE: f64 = 130.0;

pub const FIG3_SOURCE: NodeId = NodeId(0);
pub const FIG3_RELAYS: [NodeId; 3] = [NodeId(1), NodeId(2), NodeId(3)];

fn topology_from(positions: &[Position], area: f64, range: f64) -> Topology {
    let nodes = positions
        .iter()
        .enumerate()
        .map(|(i, &pos)| Node {
            id: NodeId::from(i),
            role: if i == 0 { Role::Source } else { Role::Client },
            pos,
        })
        .collect();
    let set = NodeSet::new(nodes, area).expect("fixture nodes are valid");
    build_topology(set, range).expect("fixture range is valid")
}

/// Source `S` (node 0) in the middle of three mutually adjacent routers
/// (nodes 1, 2, 3). Each router reaches two outer clients that neither `S`
/// nor the other routers can hear: clients 4-5 behind router 1, 6-7 behind
/// router 2, 8-9 behind router 3. Range 120 m.
pub fn fig3() -> Topology {
    let center = Position::new(250.0, 250.0);
    let at = |radius: f64, angle: f64| {
        Position::new(
            center.x + radius * angle.cos(),
            center.y + radius * angle.sin(),
        )
    };
    let spread = 12f64.to_radians();
    let mut pos = vec![center];
    let headings: Vec<f64> = (0..3).map(|i| PI / 2.0 + i as f64 * TAU / 3.0).collect();
    pos.extend(headings.iter().map(|&h| at(60.0, h)));
    for &h in &headings {
        pos.push(at(170.0, h - spread));
        pos.push(at(170.0, h + spread));
    }
    topology_from(&pos, DEFAULT_AREA_SIDE, 120.0)
}

/// Path `0 - 1 - ... - (n-1)` with 100 m spacing and 100 m range.
pub fn path(n: usize) -> Topology {
    assert!(n >= 1);
    let area = DEFAULT_AREA_SIDE.max(100.0 * (n - 1) as f64);
    let pos: Vec<_> = (0..n)
        .map(|i| Position::new(100.0 * i as f64, 0.0))
        .collect();
    topology_from(&pos, area, 100.0)
}

/// Complete graph: `n` nodes on a 20 m circle, range 120 m.
pub fn complete(n: usize) -> Topology {
    assert!(n >= 1);
    let pos: Vec<_> = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            Position::new(250.0 + 20.0 * a.cos(), 250.0 + 20.0 * a.sin())
        })
        .collect();
    topology_from(&pos, DEFAULT_AREA_SIDE, 120.0)
}

/// Star `K1,leaves`: center node 0, leaves on a 100 m circle that cannot hear
/// each other. At most five leaves fit.
pub fn star(leaves: usize) -> Topology {
    assert!((1..=5).contains(&leaves));
    let mut pos = vec![Position::new(250.0, 250.0)];
    pos.extend((0..leaves).map(|i| {
        let a = TAU * i as f64 / leaves as f64;
        Position::new(250.0 + 100.0 * a.cos(), 250.0 + 100.0 * a.sin())
    }));
    topology_from(&pos, DEFAULT_AREA_SIDE, 100.0)
}

/// Grid placement over the 500 m area with range equal to the lattice
/// spacing, i.e. the 4-neighbor grid graph.
pub fn grid(n: usize) -> Topology {
    let set = place_nodes(n, Placement::Grid, DEFAULT_AREA_SIDE, 0).expect("n >= 1");
    let spacing = grid_spacing(n, DEFAULT_AREA_SIDE);
    let range = if spacing > 0.0 {
        spacing
    } else {
        DEFAULT_RANGE
    };
    build_topology(set, range).expect("positive range")
}

/// First connected unit-disk graph (range 120 m) over uniformly placed nodes,
/// with the square area sized for roughly `mean_degree` neighbors per node.
/// Seeds are derived from `seed` deterministically; `None` if 1000 draws all
/// came out disconnected.
pub fn random_connected(n: usize, mean_degree: f64, seed: u64) -> Option<Topology> {
    let range = 120.0;
    let side = (n as f64 * PI * range * range / mean_degree)
        .sqrt()
        .max(1.0);
    (0..1000u64).find_map(|attempt| {
        let s = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(attempt);
        let set = place_nodes(n, Placement::UniformRandom, side, s).ok()?;
        let t = build_topology(set, range).ok()?;
        t.is_connected().then_some(t)
    })
}

/// Resolves `fig3`, `path:<n>`, `grid:<n>`, `k:<n>` and `star:<leaves>`.
pub fn by_name(name: &str) -> Result<Topology, String> {
    if name == "fig3" {
        return Ok(fig3());
    }
    let (kind, arg) = name
        .split_once(':')
        .ok_or_else(|| format!("unknown fixture `{name}`"))?;
    let n: usize = arg
        .parse()
        .map_err(|_| format!("fixture `{name}`: `{arg}` is not a node count"))?;
    if n == 0 {
        return Err(format!("fixture `{name}` has no nodes"));
    }
    match kind {
        "path" => Ok(path(n)),
        "grid" => Ok(grid(n)),
        "k" => Ok(complete(n)),
        "star" if n <= 5 => Ok(star(n)),
        "star" => Err(format!("fixture `{name}`: at most 5 leaves")),
        _ => Err(format!("unknown fixture `{name}`")),
    }
}
