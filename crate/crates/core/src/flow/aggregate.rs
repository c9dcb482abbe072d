use super::nfp::solve_nfp;
use super::{normalize, RawNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSolution {
    /// One value per vertex of the input network.
    pub y: Vec<f64>,
    /// `a·y`.
    pub value: f64,
    /// `b·y`, at most `(1+ε)²`.
    pub load: f64,
    pub gammas: Vec<f64>,
    /// Weight of each γ in the convex combination (at most two are nonzero).
    pub z: Vec<f64>,
}

/// `Γ`: start at `φ/3`, multiply by `1+ε` while the last value is below `total`.
pub fn gamma_grid(phi: f64, eps: f64, total: f64) -> Vec<f64> {
    let mut gamma = phi / 3.0;
    let mut out = vec![gamma];
    while gamma < total {
        gamma *= 1.0 + eps;
        out.push(gamma);
    }
    out
}

/// `max ã·z` subject to `z ≥ 0`, `Σz ≤ 1`, `b̃·z ≤ cap`. Two constraints, so an
/// optimum has support at most two; enumerate singletons and tight pairs.
fn two_constraint_lp(a: &[f64], b: &[f64], cap: f64) -> Vec<f64> {
    let k = a.len();
    let mut best = (0.0, vec![0.0; k]);
    for i in 0..k {
        let zi = if b[i] > 0.0 { (cap / b[i]).min(1.0) } else { 1.0 };
        if a[i] * zi > best.0 {
            let mut z = vec![0.0; k];
            z[i] = zi;
            best = (a[i] * zi, z);
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if b[i] == b[j] {
                continue;
            }
            let zi = (cap - b[j]) / (b[i] - b[j]);
            let zj = 1.0 - zi;
            if !(0.0..=1.0).contains(&zi) {
                continue;
            }
            let v = a[i] * zi + a[j] * zj;
            if v > best.0 {
                let mut z = vec![0.0; k];
                z[i] = zi;
                z[j] = zj;
                best = (v, z);
            }
        }
    }
    best.1
}

/// Approximately maximizes `a·y` over `{y ∈ [0,1]^V : y_v ≤ y_u ∀(v,u) ∈ E}`
/// subject to `b·y ≤ 1`: the output has `b·y ≤ (1+ε)²` and `a·y ≥ a·y* − φ`.
///
/// Each `γ ∈ Γ` yields a cut `S′_γ` from [`solve_nfp`]; `y` is the indicator of
/// the closure of `S′_γ` averaged with the weights `z` of a two-constraint LP
/// over the values `(a(S′_γ), b(T(S′_γ)))`.
pub fn aggregate_oracle(net: &RawNetwork, eps: f64, phi: f64) -> Result<AggregateSolution> {
    net.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("ε = {eps} outside (0, 1)")));
    }
    let total: f64 = net.supply.iter().sum();
    if !(phi > 0.0 && phi < total / 2.0) {
        return Err(Error::Argument(format!("φ = {phi} outside (0, |a|₁/2 = {})", total / 2.0)));
    }
    let (inst, lift) = normalize(net, 1.0)?;
    let cap = (1.0 + eps).powi(2);
    let n = inst.n_vertices();
    let mut y_norm = vec![0.0; n];
    let mut gammas = Vec::new();
    let mut z = Vec::new();
    if inst.total_supply() > 0.0 {
        gammas = gamma_grid(phi, eps, inst.total_supply());
        let mut closures = Vec::with_capacity(gammas.len());
        let mut a_t = Vec::with_capacity(gammas.len());
        let mut b_t = Vec::with_capacity(gammas.len());
        for &gamma in &gammas {
            let sol = solve_nfp(&inst.with_gamma(gamma)?, eps, phi)?;
            let sources = sol.cut.sources;
            a_t.push(sources.iter().map(|&s| inst.supply()[s]).sum::<f64>());
            b_t.push(sol.cut.sinks.iter().map(|&t| inst.demand()[t]).sum::<f64>());
            closures.push(inst.reachable_from(&sources));
        }
        z = two_constraint_lp(&a_t, &b_t, cap);
        for (k, closure) in closures.iter().enumerate() {
            if z[k] > 0.0 {
                for v in 0..n {
                    if closure[v] {
                        y_norm[v] += z[k];
                    }
                }
            }
        }
        for y in &mut y_norm {
            *y = y.min(1.0);
        }
    }
    let y = lift.lift_y(&y_norm);
    let value: f64 = y.iter().zip(&net.supply).map(|(y, a)| y * a).sum();
    let load: f64 = y.iter().zip(&net.demand).map(|(y, b)| y * b).sum();
    if let Some(&(u, v)) = net.edges.iter().find(|&&(u, v)| y[u] > y[v]) {
        return Err(Error::Invariant(format!("y_{u} = {} > y_{v} = {} on an edge", y[u], y[v])));
    }
    if load > cap + 1e-9 {
        return Err(Error::Invariant(format!("b·y = {load} exceeds (1+ε)² = {cap}")));
    }
    Ok(AggregateSolution { y, value, load, gammas, z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hand_run() {
        assert_eq!(gamma_grid(3.0, 1.0, 5.0), vec![1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn no_demand_means_all_ones() {
        let net = RawNetwork {
            n_vertices: 3,
            edges: vec![(0, 1), (1, 2)],
            supply: vec![1.0, 2.0, 0.0],
            demand: vec![0.0; 3],
        };
        let sol = aggregate_oracle(&net, 0.2, 0.5).unwrap();
        assert_eq!(sol.y, vec![1.0; 3]);
        assert_eq!(sol.value, 3.0);
    }

    #[test]
    fn single_edge_fits() {
        let net = RawNetwork { n_vertices: 2, edges: vec![(0, 1)], supply: vec![4.0, 0.0], demand: vec![0.0, 1.0] };
        let sol = aggregate_oracle(&net, 0.2, 0.5).unwrap();
        assert_eq!(sol.y, vec![1.0, 1.0]);
    }

    #[test]
    fn pair_support_lp() {
        // ã = (1, 3), b̃ = (0, 2), cap 1 → z = (0.5, 0.5), value 2.
        let z = two_constraint_lp(&[1.0, 3.0], &[0.0, 2.0], 1.0);
        assert_eq!(z, vec![0.5, 0.5]);
    }

    #[test]
    fn phi_out_of_range() {
        let net = RawNetwork { n_vertices: 2, edges: vec![(0, 1)], supply: vec![1.0, 0.0], demand: vec![0.0, 1.0] };
        assert!(aggregate_oracle(&net, 0.2, 0.6).is_err());
        assert!(aggregate_oracle(&net, 0.2, 0.0).is_err());
    }
}
