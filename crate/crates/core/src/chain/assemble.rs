use nalgebra::DMatrix;

use super::spec::ChainSpec;
use crate::lti::{tf_to_statespace, Interconnection, RationalTf, StateSpace};
use crate::{Error, Result};

/// Closed-loop realisation of a chain without absorbers.
///
/// Inputs: `0` is `x_ref`, `i` is `W_f,i`, `N + i` is `W_r,i`.
/// Outputs: `X_1..X_N` followed by `U_1..U_N`.
#[derive(Debug, Clone)]
pub struct ChainSystem {
    pub ss: StateSpace,
    pub n: usize,
}

impl ChainSystem {
    pub const INPUT_REF: usize = 0;

    pub fn input_wf(&self, i: usize) -> usize {
        i
    }

    pub fn input_wr(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn output_x(&self, i: usize) -> usize {
        i - 1
    }

    pub fn output_u(&self, i: usize) -> usize {
        self.n + i - 1
    }
}

fn block(agent: usize, g: &RationalTf) -> Result<StateSpace> {
    tf_to_statespace(g).map_err(|e| Error::Agent {
        agent,
        reason: e.to_string(),
    })
}

/// Interconnects every agent's loops (or plant and controllers) into one
/// state-space system. Agents given only through open loops have `U = X`.
pub fn assemble_chain_ss(chain: &ChainSpec) -> Result<ChainSystem> {
    let n = chain.len();
    // per agent: (index of first block output, has plant, has rear)
    let mut blocks = Vec::new();
    let mut layout = Vec::with_capacity(n);
    for i in 1..=n {
        let a = chain.agent(i);
        let rear = chain.rear_loop(i).is_some();
        let first = blocks.len();
        match a.plant() {
            Some(p) => {
                blocks.push(block(i, a.cf().expect("plant agents carry controllers"))?);
                if rear {
                    let cr = a.cr().ok_or_else(|| Error::Agent {
                        agent: i,
                        reason: "missing rear controller".into(),
                    })?;
                    blocks.push(block(i, cr)?);
                }
                blocks.push(block(i, p)?);
            }
            None => {
                blocks.push(block(i, a.mf())?);
                if rear {
                    blocks.push(block(i, chain.rear_loop(i).unwrap())?);
                }
            }
        }
        layout.push((first, a.plant().is_some(), rear));
    }
    let ny = blocks.len();
    let nw = 1 + 2 * n;
    let mut x_of = DMatrix::zeros(n, ny);
    let mut u_of = DMatrix::zeros(n, ny);
    for (k, &(first, plant, rear)) in layout.iter().enumerate() {
        if plant {
            let p = first + 1 + usize::from(rear);
            x_of[(k, p)] = 1.0;
            u_of[(k, first)] = 1.0;
            if rear {
                u_of[(k, first + 1)] = 1.0;
            }
        } else {
            x_of[(k, first)] = 1.0;
            if rear {
                x_of[(k, first + 1)] = 1.0;
            }
            u_of[(k, first)] = 1.0;
            if rear {
                u_of[(k, first + 1)] = 1.0;
            }
        }
    }
    // block inputs: front error, rear error, plant input
    let mut k = DMatrix::zeros(ny, ny);
    let mut l = DMatrix::zeros(ny, nw);
    for (idx, &(first, plant, rear)) in layout.iter().enumerate() {
        let i = idx + 1;
        let xrow = |m: &DMatrix<f64>, r: usize| m.row(r).clone_owned();
        let front = if i == 1 {
            -xrow(&x_of, 0)
        } else {
            xrow(&x_of, idx - 1) - xrow(&x_of, idx)
        };
        k.set_row(first, &front);
        if i == 1 {
            l[(first, 0)] = 1.0;
        }
        l[(first, i)] = 1.0;
        if rear {
            k.set_row(first + 1, &(xrow(&x_of, idx + 1) - xrow(&x_of, idx)));
            l[(first + 1, n + i)] = 1.0;
        }
        if plant {
            k.set_row(first + 1 + usize::from(rear), &xrow(&u_of, idx));
        }
    }
    let mut s = DMatrix::zeros(2 * n, ny);
    s.view_mut((0, 0), (n, ny)).copy_from(&x_of);
    s.view_mut((n, 0), (n, ny)).copy_from(&u_of);
    let ss = Interconnection {
        blocks,
        k,
        l,
        s,
        r: DMatrix::zeros(2 * n, nw),
    }
    .close()?;
    Ok(ChainSystem { ss, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::AgentSpec;
    use num_complex::Complex64;

    fn m1() -> RationalTf {
        RationalTf::from_coeffs(&[4.0, 4.0], &[0.0, 0.0, 4.0, 1.0]).unwrap()
    }

    #[test]
    fn single_agent_is_unity_feedback() {
        let chain = ChainSpec::new(vec![AgentSpec::symmetric(m1())], vec![]).unwrap();
        let sys = assemble_chain_ss(&chain).unwrap();
        let s = Complex64::new(0.0, 0.9);
        let t = sys.ss.eval(s).unwrap();
        let want = m1().feedback().eval(s).unwrap();
        assert!((t[(0, 0)] - want).norm() < 1e-12);
        // U = X for open-loop agents
        assert!((t[(1, 0)] - want).norm() < 1e-12);
    }

    #[test]
    fn two_agents_match_hand_solution() {
        let chain = ChainSpec::new(vec![AgentSpec::symmetric(m1()); 2], vec![]).unwrap();
        let sys = assemble_chain_ss(&chain).unwrap();
        let s = Complex64::new(0.1, 1.3);
        let m = m1().eval(s).unwrap();
        // (1+2M) X1 - M X2 = M r ;  (1+M) X2 - M X1 = 0
        let x2 = m * m / ((1.0 + 2.0 * m) * (1.0 + m) - m * m);
        let x1 = x2 * (1.0 + m) / m;
        let t = sys.ss.eval(s).unwrap();
        assert!((t[(0, 0)] - x1).norm() < 1e-12);
        assert!((t[(1, 0)] - x2).norm() < 1e-12);
    }

    #[test]
    fn plant_and_controllers_give_same_outputs() {
        let p = RationalTf::from_coeffs(&[1.0], &[0.0, 1.0, 1.0]).unwrap();
        let c = RationalTf::from_coeffs(&[2.0, 1.0], &[1.0, 0.1]).unwrap();
        let m = p.mul(&c);
        let a = ChainSpec::new(
            vec![AgentSpec::from_plant(p.clone(), c.clone(), Some(c.clone())); 3],
            vec![],
        )
        .unwrap();
        let b = ChainSpec::new(vec![AgentSpec::symmetric(m); 3], vec![]).unwrap();
        let (sa, sb) = (
            assemble_chain_ss(&a).unwrap(),
            assemble_chain_ss(&b).unwrap(),
        );
        let s = Complex64::new(0.0, 0.4);
        let (ta, tb) = (sa.ss.eval(s).unwrap(), sb.ss.eval(s).unwrap());
        for i in 0..3 {
            for j in 0..7 {
                assert!((ta[(i, j)] - tb[(i, j)]).norm() < 1e-10);
            }
        }
        // U_1 = C (e_f + e_r) differs from X_1
        assert!((ta[(3, 0)] - ta[(0, 0)]).norm() > 1e-3);
    }

    #[test]
    fn improper_loop_names_agent() {
        let bad = RationalTf::from_coeffs(&[1.0, 1.0, 1.0], &[0.0, 1.0]).unwrap();
        let chain = ChainSpec::new(
            vec![
                AgentSpec::symmetric(m1()),
                AgentSpec::symmetric(bad),
                AgentSpec::symmetric(m1()),
            ],
            vec![],
        );
        let r = chain.and_then(|c| assemble_chain_ss(&c));
        assert!(matches!(r, Err(Error::Agent { agent: 2, .. })), "{r:?}");
    }
}
