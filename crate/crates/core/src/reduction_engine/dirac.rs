//! Gauge fixing and the Dirac bracket on the gauge-fixed surface.

use super::linalg::vector_text;
use super::{Matrix, TruncatedSystem};
use crate::moment_space::poisson_bracket;
use crate::symbolic_ring::{Labels, ScalarExpr};
use crate::Error;

#[derive(Clone, Debug)]
pub struct DiracStructure {
    /// Second-class constraints followed by the gauge conditions.
    pub phis: Vec<(String, ScalarExpr)>,
    pub delta: Matrix,
    pub inverse: Matrix,
    /// Constraint surface with the gauge conditions solved in.
    pub surface: TruncatedSystem,
}

/// Build `Δᵢⱼ = {φᵢ, φⱼ}` on the gauge surface and invert it.
pub fn gauge_fix_and_dirac(
    sys: &TruncatedSystem,
    second_class: &[(String, ScalarExpr)],
    gauge: &[(String, ScalarExpr)],
) -> Result<DiracStructure, Error> {
    let surface = sys.with_conditions(gauge)?;
    let phis: Vec<(String, ScalarExpr)> = second_class.iter().chain(gauge).cloned().collect();
    let n = phis.len();
    let mut delta = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = surface.reduce_exact(&poisson_bracket(&phis[i].1, &phis[j].1))?;
            delta.set(j, i, v.neg());
            delta.set(i, j, v);
        }
    }
    let inverse = delta.inverse().map_err(|v| Error::SingularDelta(vector_text(&v, &Labels::default())))?;
    Ok(DiracStructure { phis, delta, inverse, surface })
}

impl DiracStructure {
    /// `{f,g}_D = {f,g} − {f,φᵢ}(Δ⁻¹)^{ij}{φⱼ,g}` on the gauge surface.
    pub fn bracket(&self, f: &ScalarExpr, g: &ScalarExpr) -> Result<ScalarExpr, Error> {
        let red = |e: ScalarExpr| self.surface.reduce_exact(&e);
        let fp: Vec<ScalarExpr> =
            self.phis.iter().map(|(_, p)| red(poisson_bracket(f, p))).collect::<Result<_, _>>()?;
        let pg: Vec<ScalarExpr> =
            self.phis.iter().map(|(_, p)| red(poisson_bracket(p, g))).collect::<Result<_, _>>()?;
        let mut r = red(poisson_bracket(f, g))?;
        for (i, a) in fp.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in pg.iter().enumerate() {
                let m = self.inverse.get(i, j);
                if !b.is_zero() && !m.is_zero() {
                    r = r.sub(&a.mul(m).mul(b));
                }
            }
        }
        Ok(r)
    }

    pub fn delta_text(&self, labels: &Labels) -> String {
        self.delta.to_text(labels)
    }
}
