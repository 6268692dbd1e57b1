//! Resolves named component specs into environments, graph models and
//! policies.

use std::path::PathBuf;

use rand::Rng;

use crate::env::{
    make_thm4_instance, make_thm5_instance_with_coin, make_thm8_instance, ArmDistribution, Environment, Instance,
};
use crate::graph::{
    make_complete_graph, make_disconnected_clique_graph, make_path_graph, make_two_expander_graph, Graph,
    TemporalGraphModel,
};
use crate::policy::PolicySpec;
use crate::rng::{stream, Stream};

use super::config::SpecCall;
use super::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceKind {
    Thm4 { m: usize, q: usize, delta: f64 },
    /// `coin = None` draws the latent coin per run.
    Thm5 { m: usize, q: usize, coin: Option<u8> },
    /// `None` means derived from the run horizon.
    Thm8 { m: Option<usize>, horizon: Option<u64>, eta: f64 },
    Homogeneous { m: usize, means: Vec<f64> },
    Custom { path: PathBuf, instance: Instance },
}

/// `T^(1/3)` rounded to the nearest positive multiple of 4.
pub fn round4_cube_root(horizon: u64) -> usize {
    let r = (horizon as f64).cbrt() / 4.0;
    (r.round() as usize).max(1) * 4
}

impl InstanceKind {
    pub fn resolve(call: &SpecCall) -> Result<InstanceKind, CliError> {
        Ok(match call.name.as_str() {
            "thm4" => {
                let b = call.bind(&["M", "Q", "delta"])?;
                InstanceKind::Thm4 {
                    m: b.req("M")?,
                    q: b.or("Q", 1)?,
                    delta: b.or("delta", 0.4)?,
                }
            }
            "thm5" => {
                let b = call.bind(&["M", "Q", "x"])?;
                let coin: Option<u8> = b.opt("x")?;
                if coin.is_some_and(|x| x > 1) {
                    return Err(CliError::config("thm5: x must be 0 or 1"));
                }
                InstanceKind::Thm5 {
                    m: b.req("M")?,
                    q: b.or("Q", 1)?,
                    coin,
                }
            }
            "thm8" => {
                let b = call.bind(&["M", "T", "eta"])?;
                InstanceKind::Thm8 {
                    m: b.opt("M")?,
                    horizon: b.opt("T")?,
                    eta: b.or("eta", 4.0)?,
                }
            }
            "homogeneous" => {
                let m: usize = call
                    .positional
                    .first()
                    .or(call.named.get("M"))
                    .ok_or_else(|| CliError::config("homogeneous: missing M"))?
                    .parse()
                    .map_err(|_| CliError::config("homogeneous: bad M"))?;
                let raw: Vec<&String> = if call.named.contains_key("M") {
                    call.positional.iter().collect()
                } else {
                    call.positional.iter().skip(1).collect()
                };
                let means = raw
                    .iter()
                    .map(|s| s.parse().map_err(|_| CliError::config(format!("homogeneous: bad mean `{s}`"))))
                    .collect::<Result<Vec<f64>, _>>()?;
                if call.named.keys().any(|k| k != "M") {
                    return Err(CliError::config("homogeneous takes M followed by the arm means"));
                }
                InstanceKind::Homogeneous { m, means }
            }
            "custom" => {
                let b = call.bind(&["path"])?;
                let path = PathBuf::from(b.req::<String>("path")?);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
                let instance = Instance::from_means_table(path.display().to_string(), &text).map_err(CliError::config)?;
                InstanceKind::Custom { path, instance }
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown instance `{other}` (expected thm4, thm5, thm8, homogeneous, custom)"
                )))
            }
        })
    }

    /// Clique size hint for `disconnected_clique` graphs.
    pub fn clique_size(&self) -> Option<usize> {
        match *self {
            InstanceKind::Thm4 { q, .. } | InstanceKind::Thm5 { q, .. } => Some(q),
            _ => None,
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match *self {
            InstanceKind::Thm8 { eta, .. } => Some(eta),
            _ => None,
        }
    }

    /// Whether the environment depends on the run horizon.
    pub fn per_horizon(&self) -> bool {
        matches!(self, InstanceKind::Thm8 { .. })
    }

    /// Builds the environment for one `(T, seed)` cell.
    pub fn environment(&self, horizon: u64, run_seed: u64) -> Result<Environment, CliError> {
        let env: Environment = match self {
            InstanceKind::Thm4 { m, q, delta } => make_thm4_instance(*m, *q, *delta).map_err(CliError::config)?.into(),
            InstanceKind::Thm5 { m, q, coin } => {
                let x = match coin {
                    Some(x) => *x,
                    None => stream(run_seed, Stream::Instance).random_range(0..2u8),
                };
                make_thm5_instance_with_coin(*m, *q, 2, x).map_err(CliError::config)?.into()
            }
            InstanceKind::Thm8 { m, horizon: fixed, eta } => {
                let t = fixed.unwrap_or(horizon);
                let m = m.unwrap_or_else(|| round4_cube_root(t));
                make_thm8_instance(m, t, *eta).map_err(CliError::config)?.into()
            }
            InstanceKind::Homogeneous { m, means } => {
                let row = means
                    .iter()
                    .map(|&p| ArmDistribution::bernoulli(p))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::config)?;
                Instance::homogeneous(*m, &row).map_err(CliError::config)?.into()
            }
            InstanceKind::Custom { instance, .. } => instance.clone().into(),
        };
        Ok(env)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphKind {
    Complete,
    Path,
    Empty,
    DisconnectedClique { q: Option<usize> },
    TwoExpander { eta: Option<f64> },
    ErdosRenyi { c: f64 },
    RandomConnected { c: f64 },
    Edges { graph: Graph },
    Periodic { period: usize, graphs: Vec<Graph> },
}

fn load_edge_list(path: &str) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {path}: {e}")))?;
    Graph::from_edge_list(&text).map_err(CliError::config)
}

impl GraphKind {
    pub fn resolve(call: &SpecCall) -> Result<GraphKind, CliError> {
        Ok(match call.name.as_str() {
            "complete" => {
                call.bind(&[])?;
                GraphKind::Complete
            }
            "path" => {
                call.bind(&[])?;
                GraphKind::Path
            }
            "empty" => {
                call.bind(&[])?;
                GraphKind::Empty
            }
            "disconnected_clique" => GraphKind::DisconnectedClique {
                q: call.bind(&["Q"])?.opt("Q")?,
            },
            "two_expander" => GraphKind::TwoExpander {
                eta: call.bind(&["eta"])?.opt("eta")?,
            },
            "er" => GraphKind::ErdosRenyi {
                c: call.bind(&["c"])?.req("c")?,
            },
            "random_connected" => GraphKind::RandomConnected {
                c: call.bind(&["c"])?.req("c")?,
            },
            "edges" => GraphKind::Edges {
                graph: load_edge_list(&call.bind(&["path"])?.req::<String>("path")?)?,
            },
            "periodic" => {
                if !call.named.is_empty() || call.positional.len() < 2 {
                    return Err(CliError::config("periodic takes a period followed by edge-list files"));
                }
                let period = call.positional[0]
                    .parse()
                    .map_err(|_| CliError::config("periodic: bad period"))?;
                let graphs = call.positional[1..]
                    .iter()
                    .map(|p| load_edge_list(p))
                    .collect::<Result<_, _>>()?;
                GraphKind::Periodic { period, graphs }
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown graph `{other}` (expected complete, path, empty, disconnected_clique, two_expander, er, random_connected, edges, periodic)"
                )))
            }
        })
    }

    pub fn model(&self, m: usize, instance: &InstanceKind) -> Result<TemporalGraphModel, CliError> {
        let fixed = |g: Result<Graph, crate::graph::GraphError>| -> Result<TemporalGraphModel, CliError> {
            g.map(TemporalGraphModel::Static).map_err(CliError::config)
        };
        match self {
            GraphKind::Complete => fixed(make_complete_graph(m)),
            GraphKind::Path => fixed(make_path_graph(m)),
            GraphKind::Empty => fixed(Graph::empty(m)),
            GraphKind::DisconnectedClique { q } => {
                let q = q
                    .or(instance.clique_size())
                    .ok_or_else(|| CliError::config("disconnected_clique: missing Q"))?;
                fixed(make_disconnected_clique_graph(m, q))
            }
            GraphKind::TwoExpander { eta } => {
                let eta = eta.or(instance.eta()).unwrap_or(4.0);
                fixed(make_two_expander_graph(m, eta).map(|x| x.graph))
            }
            GraphKind::ErdosRenyi { c } => TemporalGraphModel::erdos_renyi(m, *c).map_err(CliError::config),
            GraphKind::RandomConnected { c } => TemporalGraphModel::random_connected(m, *c).map_err(CliError::config),
            GraphKind::Edges { graph } => Ok(TemporalGraphModel::Static(graph.clone())),
            GraphKind::Periodic { period, graphs } => {
                TemporalGraphModel::periodic_union(*period, graphs.clone()).map_err(CliError::config)
            }
        }
    }
}

/// `fixed(k)` takes a 1-based arm.
pub fn resolve_policy(call: &SpecCall) -> Result<PolicySpec, CliError> {
    match call.name.as_str() {
        "gossip_ucb" => PolicySpec::gossip_ucb(call.bind(&["C"])?.or("C", 2.0)?).map_err(CliError::config),
        "exp3_gossip" => PolicySpec::exp3_gossip(call.bind(&["gamma0"])?.or("gamma0", 1.0)?).map_err(CliError::config),
        "full_info_leader" => {
            call.bind(&[])?;
            Ok(PolicySpec::FullInfoLeader)
        }
        "uniform_random" => {
            call.bind(&[])?;
            Ok(PolicySpec::UniformRandom)
        }
        "fixed" => {
            let k: usize = call.bind(&["k"])?.req("k")?;
            if k == 0 {
                return Err(CliError::config("fixed(k) counts arms from 1"));
            }
            Ok(PolicySpec::Fixed { arm: k - 1 })
        }
        other => Err(CliError::config(format!(
            "unknown policy `{other}` (expected gossip_ucb, exp3_gossip, full_info_leader, fixed, uniform_random)"
        ))),
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub instance: InstanceKind,
    pub graph: GraphKind,
    pub policy: PolicySpec,
}

impl Resolved {
    pub fn new(instance: &SpecCall, graph: &SpecCall, policy: &SpecCall) -> Result<Resolved, CliError> {
        Ok(Resolved {
            instance: InstanceKind::resolve(instance)?,
            graph: GraphKind::resolve(graph)?,
            policy: resolve_policy(policy)?,
        })
    }
}
