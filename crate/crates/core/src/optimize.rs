//! Routing-aware Lloyd iteration and the baselines it is compared against.
//!
//! One iteration of the routing-aware Lloyd (RL) algorithm performs, in
//! order:
//!
//! 1. a Gauss-Seidel sweep moving each sensor (ascending index) and then
//!    each fusion center to the exact minimizer of the cost with every
//!    other quantity frozen,
//! 2. re-routing with the energy-optimal router and recomputing the power
//!    coefficients,
//! 3. re-partitioning the grid into the power diagram and recomputing the
//!    flows from the new cell volumes.
//!
//! Each step is an exact (constrained) minimization over one block of
//! variables, so the objective never increases. Iteration stops once the
//! relative improvement of one iteration drops below `epsilon`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{lagrangian_cost, sensing_uncertainty, total_power, CostBreakdown};
use crate::density::{cell_moments, data_rates, CellMoments, DensityGrid, Region};
use crate::error::{Error, Result};
use crate::flownet::{power_coefficients, propagate_flows, FlowMatrix, NormalizedFlowMatrix, PowerCoefficients};
use crate::geometry::{NodeDeployment, Point};
use crate::partition::{power_diagram, voronoi, CellAssignment};
use crate::routing::{bellman_ford_routing, one_hop_routing, PhysicalParams};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_RBF_TRIALS: usize = 100;
/// Iteration cap of the plain Lloyd quantizer used for initialization.
pub const LLOYD_MAX_ITERATIONS: usize = 100;

/// How the starting deployment is chosen when none is supplied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitPolicy {
    /// Independent Lloyd quantizers for sensors and fusion centers.
    #[default]
    Lloyd,
    /// Uniformly random positions.
    Random,
}

/// Which routings the iteration may choose from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Router {
    /// Energy-optimal multi-hop routing.
    BellmanFord,
    /// Each sensor talks directly to its cheapest fusion center.
    OneHop,
}

impl Router {
    pub fn route(self, deployment: &NodeDeployment, params: &PhysicalParams) -> NormalizedFlowMatrix {
        match self {
            Router::BellmanFord => bellman_ford_routing(deployment, params),
            Router::OneHop => one_hop_routing(deployment, params),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_sensors: usize,
    pub n_fcs: usize,
    pub lambda: f64,
    pub params: PhysicalParams,
    /// Stop once `(D_old - D_new) / D_old < epsilon`.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub init: InitPolicy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_sensors: 40,
            n_fcs: 4,
            lambda: 0.25,
            params: PhysicalParams::default(),
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
            init: InitPolicy::Lloyd,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_sensors == 0 || self.n_fcs == 0 {
            return Err(Error::InvalidConfig("need at least one sensor and one fusion center".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    fn check_deployment(&self, deployment: &NodeDeployment) -> Result<()> {
        if deployment.n_sensors() != self.n_sensors || deployment.n_fcs() != self.n_fcs {
            return Err(Error::Dimension(format!(
                "config expects {}+{} nodes, deployment has {}+{}",
                self.n_sensors,
                self.n_fcs,
                deployment.n_sensors(),
                deployment.n_fcs()
            )));
        }
        Ok(())
    }
}

/// A fully evaluated network state.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub deployment: NodeDeployment,
    pub routing: NormalizedFlowMatrix,
    pub coefficients: PowerCoefficients,
    pub assignment: CellAssignment,
    pub flows: FlowMatrix,
    pub cost: CostBreakdown,
}

/// Routes `deployment`, partitions with `partition` and evaluates the cost.
fn evaluate_with(
    grid: &DensityGrid,
    deployment: NodeDeployment,
    routing: NormalizedFlowMatrix,
    assignment: CellAssignment,
    params: &PhysicalParams,
    lambda: f64,
) -> Result<Solution> {
    let coefficients = power_coefficients(&deployment, &routing, params)?;
    let moments = cell_moments(grid, &assignment, deployment.n_sensors());
    let flows = propagate_flows(&routing, &data_rates(&moments, params.kappa))?;
    let cost = lagrangian_cost(&deployment, &assignment, grid, &flows, params, lambda);
    Ok(Solution { deployment, routing, coefficients, assignment, flows, cost })
}

/// Evaluates `deployment` with energy-optimal routing and the plain
/// Voronoi partition of the sensors.
pub fn evaluate_voronoi(
    grid: &DensityGrid,
    deployment: NodeDeployment,
    params: &PhysicalParams,
    lambda: f64,
) -> Result<Solution> {
    let routing = bellman_ford_routing(&deployment, params);
    let assignment = voronoi(deployment.sensors(), grid);
    evaluate_with(grid, deployment, routing, assignment, params, lambda)
}

/// Cost, positions and iteration number after each RL iteration; entry 0 is
/// the starting state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub positions: Vec<Point>,
    pub cost: CostBreakdown,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<IterationRecord>,
    pub solution: Solution,
    /// Set when `max_iterations` ran out before the stop rule fired.
    pub truncated: bool,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn costs(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.cost.d)
    }
}

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub solution: Solution,
    /// Cost of every evaluated candidate, in evaluation order.
    pub trial_costs: Vec<f64>,
}

/// Exact minimizer of the cost over sensor `i`'s position with the
/// partition, flows and every other node frozen. Unchanged when the sensor
/// neither covers mass nor carries flow.
pub fn sensor_update(
    i: usize,
    moments: &CellMoments,
    flows: &FlowMatrix,
    deployment: &NodeDeployment,
    lambda: f64,
    beta: f64,
) -> Point {
    let lb = lambda * beta;
    let v = moments.volumes[i];
    let mut num = moments.centroids[i].map_or(Point::default(), |c| c * v);
    let mut den = v;
    if lb > 0.0 {
        for (j, &rate) in flows.row(i).iter().enumerate().filter(|(_, &r)| r > 0.0) {
            num = num + deployment.position(j) * (lb * rate);
            den += lb * rate;
        }
        for j in 0..flows.n_sensors() {
            let rate = flows.get(j, i);
            if rate > 0.0 {
                num = num + deployment.position(j) * (lb * rate);
                den += lb * rate;
            }
        }
    }
    if den > 0.0 {
        num * (1.0 / den)
    } else {
        deployment.position(i)
    }
}

/// Flow-weighted mean of fusion center `i`'s predecessors; unchanged
/// without inflow.
pub fn fc_update(i: usize, flows: &FlowMatrix, deployment: &NodeDeployment) -> Point {
    let mut num = Point::default();
    let mut den = 0.0;
    for j in 0..flows.n_sensors() {
        let rate = flows.get(j, i);
        if rate > 0.0 {
            num = num + deployment.position(j) * rate;
            den += rate;
        }
    }
    if den > 0.0 {
        num * (1.0 / den)
    } else {
        deployment.position(i)
    }
}

fn random_points(region: &Region, k: usize, rng: &mut impl Rng) -> Vec<Point> {
    (0..k)
        .map(|_| {
            Point::new(
                rng.gen_range(region.x_min..region.x_max),
                rng.gen_range(region.y_min..region.y_max),
            )
        })
        .collect()
}

/// Plain Lloyd quantizer of the grid density with `k` points, started at
/// `start`. Points owning no mass stay put.
pub fn lloyd_quantizer(grid: &DensityGrid, mut points: Vec<Point>, epsilon: f64, max_iterations: usize) -> Vec<Point> {
    let distortion = |pts: &[Point], a: &CellAssignment| -> f64 {
        a.owners()
            .iter()
            .zip(grid.centers())
            .zip(grid.masses())
            .map(|((&o, &c), &m)| pts[o].dist2(c) * m)
            .sum()
    };
    let mut assignment = voronoi(&points, grid);
    let mut current = distortion(&points, &assignment);
    for _ in 0..max_iterations {
        let moments = cell_moments(grid, &assignment, points.len());
        for (p, c) in points.iter_mut().zip(&moments.centroids) {
            if let Some(c) = c {
                *p = *c;
            }
        }
        assignment = voronoi(&points, grid);
        let next = distortion(&points, &assignment);
        let improved = current - next;
        current = next;
        if current <= 0.0 || improved / (current + improved) < epsilon {
            break;
        }
    }
    points
}

/// Sensors and fusion centers placed by two independent Lloyd quantizers
/// of the density from seeded uniform random starts.
pub fn lloyd_init(grid: &DensityGrid, n_sensors: usize, n_fcs: usize, seed: u64) -> Result<NodeDeployment> {
    lloyd_init_with(grid, n_sensors, n_fcs, seed, DEFAULT_EPSILON)
}

pub fn lloyd_init_with(
    grid: &DensityGrid,
    n_sensors: usize,
    n_fcs: usize,
    seed: u64,
    epsilon: f64,
) -> Result<NodeDeployment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sensors = random_points(grid.region(), n_sensors, &mut rng);
    let fcs = random_points(grid.region(), n_fcs, &mut rng);
    NodeDeployment::new(
        lloyd_quantizer(grid, sensors, epsilon, LLOYD_MAX_ITERATIONS),
        lloyd_quantizer(grid, fcs, epsilon, LLOYD_MAX_ITERATIONS),
    )
}

/// Uniformly random deployment.
pub fn random_deployment(region: &Region, n_sensors: usize, n_fcs: usize, rng: &mut impl Rng) -> Result<NodeDeployment> {
    let sensors = random_points(region, n_sensors, rng);
    let fcs = random_points(region, n_fcs, rng);
    NodeDeployment::new(sensors, fcs)
}

fn initial_deployment(grid: &DensityGrid, config: &OptimizerConfig) -> Result<NodeDeployment> {
    match config.init {
        InitPolicy::Lloyd => lloyd_init_with(grid, config.n_sensors, config.n_fcs, config.seed, config.epsilon),
        InitPolicy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            random_deployment(grid.region(), config.n_sensors, config.n_fcs, &mut rng)
        }
    }
}

/// Mutable state of one RL run.
#[derive(Clone, Debug)]
pub struct RlState<'a> {
    grid: &'a DensityGrid,
    lambda: f64,
    params: PhysicalParams,
    router: Router,
    solution: Solution,
}

impl<'a> RlState<'a> {
    /// Routes the starting deployment and partitions into its power
    /// diagram, so the first scored state is already consistent.
    pub fn new(
        grid: &'a DensityGrid,
        deployment: NodeDeployment,
        lambda: f64,
        params: PhysicalParams,
        router: Router,
    ) -> Result<Self> {
        let routing = router.route(&deployment, &params);
        let g = power_coefficients(&deployment, &routing, &params)?;
        let assignment = power_diagram(&deployment, g.as_slice(), lambda, params.kappa, grid);
        let solution = evaluate_with(grid, deployment, routing, assignment, &params, lambda)?;
        Ok(Self { grid, lambda, params, router, solution })
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    pub fn into_solution(self) -> Solution {
        self.solution
    }

    pub fn cost(&self) -> CostBreakdown {
        self.solution.cost
    }

    /// Node moves, re-route, re-partition. Returns the new cost.
    pub fn step(&mut self) -> Result<CostBreakdown> {
        let region = *self.grid.region();
        let sol = &self.solution;
        let n = sol.deployment.n_sensors();
        let moments = cell_moments(self.grid, &sol.assignment, n);
        let mut deployment = sol.deployment.clone();
        for i in 0..n {
            let p = sensor_update(i, &moments, &sol.flows, &deployment, self.lambda, self.params.beta);
            deployment.set_position(i, p, Some(&region));
        }
        for i in n..deployment.n_nodes() {
            let p = fc_update(i, &sol.flows, &deployment);
            deployment.set_position(i, p, Some(&region));
        }

        let routing = self.router.route(&deployment, &self.params);
        let g = power_coefficients(&deployment, &routing, &self.params)?;
        let assignment = power_diagram(&deployment, g.as_slice(), self.lambda, self.params.kappa, self.grid);
        self.solution = evaluate_with(self.grid, deployment, routing, assignment, &self.params, self.lambda)?;
        Ok(self.solution.cost)
    }
}

fn run_lloyd_like(
    grid: &DensityGrid,
    config: &OptimizerConfig,
    initial: Option<NodeDeployment>,
    router: Router,
) -> Result<Trajectory> {
    config.validate()?;
    let deployment = match initial {
        Some(d) => {
            config.check_deployment(&d)?;
            d
        }
        None => initial_deployment(grid, config)?,
    };
    let mut state = RlState::new(grid, deployment, config.lambda, config.params, router)?;
    let mut records = vec![IterationRecord {
        iteration: 0,
        positions: state.solution().deployment.positions().to_vec(),
        cost: state.cost(),
    }];
    let mut truncated = true;
    for iteration in 1..=config.max_iterations {
        let old = state.cost().d;
        let new = state.step()?;
        records.push(IterationRecord {
            iteration,
            positions: state.solution().deployment.positions().to_vec(),
            cost: new,
        });
        if old <= 0.0 || (old - new.d) / old < config.epsilon {
            truncated = false;
            break;
        }
    }
    Ok(Trajectory { records, solution: state.into_solution(), truncated })
}

/// Routing-aware Lloyd algorithm. Starts from `initial` when given,
/// otherwise from the configured initialization.
pub fn rl_algorithm(grid: &DensityGrid, config: &OptimizerConfig, initial: Option<NodeDeployment>) -> Result<Trajectory> {
    run_lloyd_like(grid, config, initial, Router::BellmanFord)
}

/// One-hop variant: identical updates, but every sensor is routed straight
/// to its cheapest fusion center. Stand-in for the combined-Lloyd scheme
/// restricted to single-hop links.
pub fn baseline_cl_onehop(grid: &DensityGrid, config: &OptimizerConfig, initial: Option<NodeDeployment>) -> Result<Trajectory> {
    run_lloyd_like(grid, config, initial, Router::OneHop)
}

/// Best of `trials` uniformly random deployments, each evaluated with the
/// Voronoi partition and energy-optimal routing.
pub fn baseline_rbf(grid: &DensityGrid, config: &OptimizerConfig, trials: usize) -> Result<BaselineResult> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::InvalidConfig("RBF needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<Solution> = None;
    let mut trial_costs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let deployment = random_deployment(grid.region(), config.n_sensors, config.n_fcs, &mut rng)?;
        let candidate = evaluate_voronoi(grid, deployment, &config.params, config.lambda)?;
        trial_costs.push(candidate.cost.d);
        if best.as_ref().is_none_or(|b| candidate.cost.d < b.cost.d) {
            best = Some(candidate);
        }
    }
    Ok(BaselineResult { solution: best.expect("at least one trial"), trial_costs })
}

/// Lloyd-placed sensors and fusion centers, then energy-optimal routing.
/// No joint iteration, so the deployment does not depend on `lambda`.
pub fn baseline_lbf(grid: &DensityGrid, config: &OptimizerConfig) -> Result<BaselineResult> {
    config.validate()?;
    let deployment = lloyd_init_with(grid, config.n_sensors, config.n_fcs, config.seed, config.epsilon)?;
    let solution = evaluate_voronoi(grid, deployment, &config.params, config.lambda)?;
    let trial_costs = vec![solution.cost.d];
    Ok(BaselineResult { solution, trial_costs })
}

/// The objective as a function of positions only, with partition and flows
/// held fixed.
#[derive(Clone, Debug)]
pub struct FrozenCost<'a> {
    pub grid: &'a DensityGrid,
    pub assignment: &'a CellAssignment,
    pub flows: &'a FlowMatrix,
    pub params: PhysicalParams,
    pub lambda: f64,
}

impl<'a> FrozenCost<'a> {
    pub fn from_solution(grid: &'a DensityGrid, solution: &'a Solution, params: PhysicalParams) -> Self {
        Self {
            grid,
            assignment: &solution.assignment,
            flows: &solution.flows,
            params,
            lambda: solution.cost.lambda,
        }
    }

    pub fn eval(&self, deployment: &NodeDeployment) -> f64 {
        sensing_uncertainty(deployment, self.assignment, self.grid)
            + self.lambda * total_power(deployment, self.flows, &self.params)
    }

    /// Closed-form gradient with respect to every node position.
    pub fn gradient(&self, deployment: &NodeDeployment) -> Vec<Point> {
        let n = deployment.n_sensors();
        let moments = cell_moments(self.grid, self.assignment, n);
        let lb2 = 2.0 * self.lambda * self.params.beta;
        let mut grad = vec![Point::default(); deployment.n_nodes()];
        for i in 0..n {
            if let Some(c) = moments.centroids[i] {
                grad[i] = (deployment.position(i) - c) * (2.0 * moments.volumes[i]);
            }
        }
        for (i, j, rate) in self.flows.links() {
            let d = (deployment.position(i) - deployment.position(j)) * (lb2 * rate);
            grad[i] = grad[i] + d;
            grad[j] = grad[j] - d;
        }
        grad
    }
}

/// Central differences of `cost` in every coordinate with step `h`.
pub fn finite_diff_gradient(deployment: &NodeDeployment, cost: &FrozenCost<'_>, h: f64) -> Vec<Point> {
    let mut probe = deployment.clone();
    (0..deployment.n_nodes())
        .map(|i| {
            let p = deployment.position(i);
            let mut partial = |delta: Point| {
                probe.set_position(i, p + delta, None);
                let up = cost.eval(&probe);
                probe.set_position(i, p - delta, None);
                let down = cost.eval(&probe);
                probe.set_position(i, p, None);
                (up - down) / (2.0 * h)
            };
            let gx = partial(Point::new(h, 0.0));
            let gy = partial(Point::new(0.0, h));
            Point::new(gx, gy)
        })
        .collect()
}
