use crate::network::{BoundNetwork, Domain, Node, NodeId};

/// Evaluates the expression DAG for one ODE instance: the real subsystem, or
/// the spatial subsystem at one grid point.
pub(crate) struct Instance<'a> {
    bound: &'a BoundNetwork,
    /// Grid point index for spatial instances.
    point: usize,
    x: f64,
    /// Nodes evaluated by this instance, in topological order.
    schedule: Vec<NodeId>,
    /// Global state index → position in the local state vector.
    local: Vec<Option<usize>>,
    /// Global indices of the states owned by this instance.
    pub states: Vec<usize>,
}

impl<'a> Instance<'a> {
    pub fn new(bound: &'a BoundNetwork, domain: Domain, point: usize) -> Instance<'a> {
        let sys = bound.system();
        let schedule = (0..sys.nodes().len()).filter(|&id| matches!(sys.domain(id), Domain::Any) || sys.domain(id) == domain).collect();
        let spatial = domain == Domain::Spatial;
        let states: Vec<usize> = (0..sys.states().len()).filter(|&i| sys.states()[i].kind.is_spatial() == spatial).collect();
        let mut local = vec![None; sys.states().len()];
        for (k, &i) in states.iter().enumerate() {
            local[i] = Some(k);
        }
        let x = if spatial { sys.grid().expect("spatial systems carry a grid").points()[point] } else { 0.0 };
        Instance { bound, point, x, schedule, local, states }
    }

    /// Fills `buf` (one slot per arena node) at time `t` and state `y`.
    pub fn eval(&self, t: f64, y: &[f64], buf: &mut [f64]) {
        let sys = self.bound.system();
        let nodes = sys.nodes();
        let bindings = self.bound.bindings();
        for &id in &self.schedule {
            buf[id] = match nodes[id] {
                Node::Num(v) => v,
                Node::Table(i) => sys.table(i)[self.point],
                Node::Time => t,
                Node::State(i) => y[self.local[i].expect("state owned by instance")],
                Node::Input(i) => bindings[i].value.eval(t, self.x),
                Node::InputDeriv(i) => bindings[i].derivative.as_ref().map_or(f64::NAN, |d| d.eval(t, self.x)),
                Node::Add(a, b) => buf[a] + buf[b],
                Node::Mul(a, b) => buf[a] * buf[b],
            };
        }
    }

    pub fn initial_state(&self, buf: &mut [f64]) -> Vec<f64> {
        let zeros = vec![0.0; self.states.len()];
        self.eval(0.0, &zeros, buf);
        let states = self.bound.system().states();
        self.states.iter().map(|&i| buf[states[i].init]).collect()
    }

    /// Right-hand side y' = f(t, y).
    pub fn rate(&self, t: f64, y: &[f64], buf: &mut [f64], dy: &mut [f64]) {
        self.eval(t, y, buf);
        let states = self.bound.system().states();
        for (k, &i) in self.states.iter().enumerate() {
            dy[k] = buf[states[i].rate];
        }
    }

    pub fn buffer(&self) -> Vec<f64> {
        vec![0.0; self.bound.system().nodes().len()]
    }
}
