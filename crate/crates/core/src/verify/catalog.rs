//! Residual formulas, one per identity, evaluated on the coordinate frame.

use crate::geometry::{nijenhuis, nijenhuis_vector, torsion_of};
use crate::structures::{
    anc_residual_at, check_axioms_at, nearly_kahler_residual_at, AxiomKind, PointGeometry, StructureError,
};
use crate::tensor::{relative_residual, TensorValue, Valence};

pub(crate) type Residual = Result<f64, StructureError>;

fn t3(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> TensorValue {
    TensorValue::from_fn(n, Valence::new(0, 3), |ix| f(ix[0], ix[1], ix[2]))
}

fn rel(a: &TensorValue, b: &TensorValue) -> f64 {
    relative_residual(a, b)
}

/// `‖t‖∞ / (1 + scale)` for quantities that should vanish.
fn vanishing(t: &TensorValue, scale: f64) -> f64 {
    t.sup_norm() / (1.0 + scale)
}

fn comp(t: &TensorValue, maps: [Option<&TensorValue>; 3]) -> TensorValue {
    PointGeometry::compose(t, maps)
}

/// Largest deviation from total antisymmetry.
fn skewness(t: &TensorValue) -> f64 {
    let neg = t.scale(-1.0);
    rel(&t.permute(&[1, 0, 2]), &neg).max(rel(&t.permute(&[0, 2, 1]), &neg))
}

fn missing(field: &'static str, what: &'static str) -> StructureError {
    StructureError::MissingField { field, what }
}

fn q_of(pg: &PointGeometry) -> Result<&TensorValue, StructureError> {
    pg.q.as_ref().ok_or(missing("Q", "identity"))
}

fn big_g(pg: &PointGeometry) -> (TensorValue, TensorValue) {
    (pg.g.add(&pg.f), pg.dg.add(&pg.dfield))
}

/// `(∇_X b)(Y, Z)` at `[x, y, z]` for the Einstein connection.
fn nabla_form(pg: &PointGeometry, value: &TensorValue, grad: &TensorValue) -> TensorValue {
    PointGeometry::direction_first(&pg.nabla(value, grad))
}

pub(crate) fn emc(pg: &PointGeometry) -> Residual {
    let n = pg.dim();
    let (big, dbig) = big_g(pg);
    let gm = &pg.gamma;
    let rhs = t3(n, |i, j, m| {
        (0..n)
            .map(|p| gm.get(&[p, i, m]) * big.at(p, j) + gm.get(&[p, m, j]) * big.at(i, p))
            .sum()
    });
    Ok(rel(&dbig, &rhs))
}

pub(crate) fn emc_t(pg: &PointGeometry) -> Residual {
    let (big, dbig) = big_g(pg);
    let lhs = nabla_form(pg, &big, &dbig);
    let ta = comp(&pg.torsion, [None, None, Some(&pg.a)]);
    Ok(rel(&lhs, &ta.sub(&pg.torsion)))
}

pub(crate) fn ein_g(pg: &PointGeometry) -> Residual {
    let n = pg.dim();
    let lhs = nabla_form(pg, &pg.g, &pg.dg);
    let (t, ta) = (&pg.torsion, comp(&pg.torsion, [None, None, Some(&pg.a)]));
    let rhs = t3(n, |x, y, z| {
        -0.5 * (t.get(&[x, y, z]) + t.get(&[x, z, y]) - ta.get(&[x, y, z]) - ta.get(&[x, z, y]))
    });
    Ok(rel(&lhs, &rhs))
}

/// `(∇_X F)(Y, Z)` in pure torsion form.
pub(crate) fn nabla_f_torsion_form(pg: &PointGeometry) -> TensorValue {
    let (t, ta) = (&pg.torsion, comp(&pg.torsion, [None, None, Some(&pg.a)]));
    t3(pg.dim(), |x, y, z| {
        0.5 * (t.get(&[x, z, y]) - t.get(&[x, y, z]) + ta.get(&[x, y, z]) - ta.get(&[x, z, y]))
    })
}

/// `(∇_Z F)(X, Y)` at `[x, y, z]` in mixed `dF`/torsion form; `sign` is
/// the sign of the `T(Z, X, AY)` term.
pub(crate) fn nabla_f_mixed_form(pg: &PointGeometry, sign: f64) -> TensorValue {
    let (t, ta, df) = (&pg.torsion, comp(&pg.torsion, [None, None, Some(&pg.a)]), &pg.df);
    t3(pg.dim(), |x, y, z| {
        0.5 * (df.get(&[x, y, z]) + t.get(&[x, y, z]) - ta.get(&[z, y, x]) + sign * ta.get(&[z, x, y]))
    })
}

/// Main residual: `∇F` against the torsion form. Sub-residual: the torsion
/// form against the mixed form, both read as `(∇_Z F)(X, Y)`.
pub(crate) fn ein_f_parts(pg: &PointGeometry) -> (f64, f64) {
    let lhs = nabla_form(pg, &pg.f, &pg.dfield);
    let torsion_form = nabla_f_torsion_form(pg);
    // (∇_Z F)(X, Y) stored [x, y, z] reads torsion_form[z, x, y]
    let as_z_first = torsion_form.permute(&[1, 2, 0]);
    (rel(&lhs, &torsion_form), rel(&as_z_first, &nabla_f_mixed_form(pg, 1.0)))
}

pub(crate) fn ein_f(pg: &PointGeometry) -> Residual {
    let (a, b) = ein_f_parts(pg);
    Ok(a.max(b))
}

fn torsion_condition(pg: &PointGeometry, p: &TensorValue) -> f64 {
    let t = &pg.torsion;
    let first = comp(t, [Some(p), None, None]);
    rel(&first, &comp(t, [None, Some(p), None])).max(rel(&first, &comp(t, [None, None, Some(p)])))
}

pub(crate) fn a_torsion(pg: &PointGeometry) -> Residual {
    Ok(torsion_condition(pg, &pg.a))
}

pub(crate) fn q_torsion(pg: &PointGeometry) -> Residual {
    Ok(torsion_condition(pg, q_of(pg)?))
}

/// Right side of the existence criterion for the skew-torsion Einstein
/// connection, as a `(0,3)` form.
pub(crate) fn criterion_rhs(pg: &PointGeometry) -> TensorValue {
    let a = Some(&pg.a);
    let a2 = pg.a_squared();
    let a2 = Some(&a2);
    let d = |m: [Option<&TensorValue>; 3]| pg.df_with(m);
    TensorValue::combine(&[
        (2.0 / 3.0, &d([None, None, a])),
        (1.0 / 3.0, &d([a, None, None])),
        (1.0 / 3.0, &d([None, a, None])),
        (1.0 / 3.0, &d([a, a, a])),
        (-1.0 / 6.0, &d([a2, None, a])),
        (-1.0 / 6.0, &d([a2, a, None])),
        (-1.0 / 6.0, &d([None, a2, a])),
        (1.0 / 6.0, &d([None, a, a2])),
        (-1.0 / 6.0, &d([a, a2, None])),
        (1.0 / 6.0, &d([a, None, a2])),
    ])
}

pub(crate) fn skew1(pg: &PointGeometry) -> Residual {
    Ok(rel(&pg.nijenhuis_a(), &criterion_rhs(pg)))
}

/// `⅓dF(X,Y,Z) + ⅓dF(X,AY,AZ) − ⅙dF(AX,Y,AZ) − ⅙dF(AX,AY,Z)`.
pub(crate) fn ff2_rhs(pg: &PointGeometry) -> TensorValue {
    let a = Some(&pg.a);
    TensorValue::combine(&[
        (1.0 / 3.0, &pg.df),
        (1.0 / 3.0, &pg.df_with([None, a, a])),
        (-1.0 / 6.0, &pg.df_with([a, None, a])),
        (-1.0 / 6.0, &pg.df_with([a, a, None])),
    ])
}

pub(crate) fn ff2(pg: &PointGeometry) -> Residual {
    let rhs = ff2_rhs(pg);
    let lc_f = PointGeometry::direction_first(&pg.nabla_lc(&pg.f, &pg.dfield));
    Ok(rel(&lc_f, &rhs).max(rel(&pg.lc_nabla_a_form(), &rhs)))
}

pub(crate) fn tordf(pg: &PointGeometry) -> Residual {
    Ok(rel(&pg.torsion, &pg.df.scale(-1.0 / 3.0)))
}

pub(crate) fn skew0_g(pg: &PointGeometry) -> Residual {
    let a = Some(&pg.a);
    let rhs = pg
        .df_with([None, None, a])
        .sub(&pg.df_with([None, a, None]))
        .scale(-1.0 / 6.0);
    Ok(rel(&nabla_form(pg, &pg.g, &pg.dg), &rhs))
}

pub(crate) fn skew0_f(pg: &PointGeometry) -> Residual {
    let a = Some(&pg.a);
    let rhs = TensorValue::combine(&[
        (1.0 / 3.0, &pg.df),
        (-1.0 / 6.0, &pg.df_with([None, None, a])),
        (-1.0 / 6.0, &pg.df_with([None, a, None])),
    ]);
    Ok(rel(&nabla_form(pg, &pg.f, &pg.dfield), &rhs))
}

fn nabla_g_scale(pg: &PointGeometry) -> f64 {
    pg.dg.sup_norm().max(pg.gamma.sup_norm() * pg.g.sup_norm())
}

pub(crate) fn p27_nabla_a(pg: &PointGeometry) -> Residual {
    let metric = vanishing(&nabla_form(pg, &pg.g, &pg.dg), nabla_g_scale(pg));
    Ok(rel(&pg.lc_nabla_a_form(), &pg.torsion.scale(-1.0)).max(metric))
}

pub(crate) fn p27_na(pg: &PointGeometry) -> Residual {
    let rhs = pg.df_with([None, None, Some(&pg.a)]).scale(4.0 / 3.0);
    Ok(rel(&pg.nijenhuis_a(), &rhs))
}

/// `N_A(X, Y)` through the Einstein connection's `∇A` and torsion.
pub(crate) fn nijenhuis_via_connection(pg: &PointGeometry) -> TensorValue {
    let n = pg.dim();
    let a = &pg.a;
    let a2 = pg.a_squared();
    let d = pg.nabla(a, &pg.da);
    let tv = torsion_of(&pg.gamma, &pg.g).0;
    TensorValue::from_fn(n, Valence::new(1, 2), |ix| {
        let (k, x, y) = (ix[0], ix[1], ix[2]);
        let mut acc = 0.0;
        for s in 0..n {
            acc += a.at(s, x) * d.get(&[k, y, s]) - a.at(s, y) * d.get(&[k, x, s]);
            acc -= a.at(k, s) * d.get(&[s, y, x]) - a.at(k, s) * d.get(&[s, x, y]);
            acc -= a2.at(k, s) * tv.get(&[s, x, y]);
            for t in 0..n {
                acc -= a.at(s, x) * a.at(t, y) * tv.get(&[k, s, t]);
                acc += a.at(k, s) * (a.at(t, x) * tv.get(&[s, t, y]) + a.at(t, y) * tv.get(&[s, x, t]));
            }
        }
        acc
    })
}

pub(crate) fn nuj1_xcheck(pg: &PointGeometry) -> Residual {
    Ok(rel(&nijenhuis_vector(&pg.a, &pg.da), &nijenhuis_via_connection(pg)))
}

pub(crate) fn nujq_xcheck(pg: &PointGeometry) -> Residual {
    let q = q_of(pg)?;
    let dq = pg.dq.as_ref().ok_or(missing("Q", "identity"))?;
    let qs = Some(q);
    let q2 = q.matmul(q);
    let f1 = pg.as_form(&pg.nabla(q, dq));
    let c1 = comp(&f1, [qs, None, None]);
    let c2 = comp(&f1, [None, None, qs]);
    let t = &pg.torsion;
    let rhs = TensorValue::combine(&[
        (1.0, &c1),
        (-1.0, &c1.permute(&[1, 0, 2])),
        (-1.0, &c2),
        (1.0, &c2.permute(&[1, 0, 2])),
        (-1.0, &comp(t, [qs, qs, None])),
        (-1.0, &comp(t, [None, None, Some(&q2)])),
        (1.0, &comp(t, [qs, None, qs])),
        (1.0, &comp(t, [None, qs, qs])),
    ]);
    Ok(rel(&nijenhuis(q, dq, &pg.g), &rhs))
}

/// `K(X,Y,Z) = ½[T(X,Y,Z) − T(X,Z,AY) − T(Y,Z,AX)]` with `T = −⅓dF`,
/// raised and added to the Levi-Civita coefficients.
pub(crate) fn genconein_xcheck(pg: &PointGeometry) -> Residual {
    let n = pg.dim();
    let t = pg.df.scale(-1.0 / 3.0);
    let ta = comp(&t, [None, None, Some(&pg.a)]);
    let k = t3(n, |x, y, z| {
        0.5 * (t.get(&[x, y, z]) - ta.get(&[x, z, y]) - ta.get(&[y, z, x]))
    });
    let gamma = pg.gamma_lc.add(&k.raise_first(2, &pg.g_inv));
    Ok(rel(&pg.gamma, &gamma))
}

pub(crate) fn contorsion_xcheck(pg: &PointGeometry) -> Residual {
    let k = pg.gamma.sub(&pg.gamma_lc).lower_last(0, &pg.g);
    let a = Some(&pg.a);
    let rhs = TensorValue::combine(&[
        (1.0 / 6.0, &pg.df_with([a, None, None])),
        (-1.0 / 6.0, &pg.df_with([None, a, None])),
        (-1.0 / 6.0, &pg.df),
    ]);
    Ok(rel(&k, &rhs))
}

pub(crate) fn axioms(kind: AxiomKind) -> impl Fn(&PointGeometry) -> Residual {
    move |pg| Ok(check_axioms_at(pg, kind)?.max_residual())
}

pub(crate) fn wah(pg: &PointGeometry) -> Residual {
    axioms(AxiomKind::WeakHermitian)(pg)
}

pub(crate) fn acm(pg: &PointGeometry) -> Residual {
    axioms(AxiomKind::WeakAcm)(pg)
}

pub(crate) fn para_h(pg: &PointGeometry) -> Residual {
    axioms(AxiomKind::WeakParaHermitian)(pg)
}

pub(crate) fn para_c(pg: &PointGeometry) -> Residual {
    axioms(AxiomKind::WeakParaContact)(pg)
}

pub(crate) fn nk(pg: &PointGeometry) -> Residual {
    Ok(nearly_kahler_residual_at(pg))
}

pub(crate) fn anc(pg: &PointGeometry) -> Residual {
    anc_residual_at(pg)
}

fn contact(pg: &PointGeometry) -> Result<(&TensorValue, &TensorValue, TensorValue, TensorValue), StructureError> {
    let what = "contact identity";
    let xi = pg.xi.as_ref().ok_or(missing("xi", what))?;
    let eta = pg.eta.as_ref().ok_or(missing("eta", what))?;
    let nxi = pg.lc_nabla_xi().ok_or(missing("xi", what))?;
    let deta = pg.deta().ok_or(missing("eta", what))?;
    Ok((xi, eta, nxi, deta))
}

pub(crate) fn reeb_geo(pg: &PointGeometry) -> Residual {
    let (xi, _, nxi, _) = contact(pg)?;
    let n = pg.dim();
    let v = TensorValue::vector(
        (0..n)
            .map(|k| (0..n).map(|m| nxi.at(k, m) * xi.comps()[m]).sum())
            .collect(),
    );
    Ok(vanishing(&v, nxi.sup_norm()))
}

pub(crate) fn reeb_kill(pg: &PointGeometry) -> Residual {
    let (_, _, nxi, _) = contact(pg)?;
    let n = pg.dim();
    let m = TensorValue::from_fn(n, Valence::new(0, 2), |ix| {
        (0..n).map(|k| pg.g.at(ix[1], k) * nxi.at(k, ix[0])).sum()
    });
    Ok(rel(&m, &m.transpose().scale(-1.0)))
}

pub(crate) fn deta_xi(pg: &PointGeometry) -> Residual {
    let (xi, _, _, deta) = contact(pg)?;
    let n = pg.dim();
    let v = TensorValue::covector(
        (0..n)
            .map(|x| (0..n).map(|s| deta.at(x, s) * xi.comps()[s]).sum())
            .collect(),
    );
    Ok(vanishing(&v, deta.sup_norm()))
}

/// `∇ᵍξ = 0`, `dη = 0` and `T(X, Y, ξ) = 0`.
pub(crate) fn reeb_parallel(pg: &PointGeometry) -> Residual {
    let (xi, _, nxi, deta) = contact(pg)?;
    let n = pg.dim();
    let scale = pg
        .dxi
        .as_ref()
        .map_or(0.0, |d| d.sup_norm())
        .max(pg.gamma_lc.sup_norm());
    let t_xi = TensorValue::from_fn(n, Valence::new(0, 2), |ix| {
        (0..n).map(|s| pg.torsion.get(&[ix[0], ix[1], s]) * xi.comps()[s]).sum()
    });
    Ok(vanishing(&nxi, scale)
        .max(vanishing(&deta, pg.deta_grad.as_ref().map_or(0.0, |d| d.sup_norm())))
        .max(vanishing(&t_xi, pg.torsion.sup_norm())))
}

fn nabla_q_scale(pg: &PointGeometry, q: &TensorValue) -> f64 {
    pg.dq
        .as_ref()
        .map_or(0.0, |d| d.sup_norm())
        .max(pg.gamma.sup_norm().max(pg.gamma_lc.sup_norm()) * q.sup_norm())
}

pub(crate) fn nabla_q_lc(pg: &PointGeometry) -> Residual {
    let q = q_of(pg)?;
    let dq = pg.dq.as_ref().ok_or(missing("Q", "identity"))?;
    Ok(vanishing(&pg.nabla_lc(q, dq), nabla_q_scale(pg, q)))
}

pub(crate) fn nabla_q(pg: &PointGeometry) -> Residual {
    let q = q_of(pg)?;
    let dq = pg.dq.as_ref().ok_or(missing("Q", "identity"))?;
    Ok(vanishing(&pg.nabla(q, dq), nabla_q_scale(pg, q)))
}

pub(crate) fn eq32(pg: &PointGeometry) -> Residual {
    let a = Some(&pg.a);
    let lhs = comp(&pg.torsion, [a, None, None]);
    let by_df = pg.df_with([a, None, None]).scale(-1.0 / 3.0);
    let by_n = pg.nijenhuis_a().scale(-0.25);
    Ok(rel(&lhs, &by_df).max(rel(&lhs, &by_n)))
}

/// Right side of the expansion of `2g((∇ᵍ_X A)Y, Z)` for weak a.c.m.
/// structures.
pub(crate) fn mainw_rhs(pg: &PointGeometry) -> Result<TensorValue, StructureError> {
    let (_, eta, _, deta) = contact(pg)?;
    let n5 = pg.n5().ok_or(missing("Q", "contact identity"))?;
    let nwac = pg.nwac().expect("contact fields");
    let n = pg.dim();
    let a = &pg.a;
    let dfaa = pg.df_with([None, Some(a), Some(a)]);
    let e = eta.comps();
    let d_a = |x: usize, y: usize| -> f64 { (0..n).map(|s| deta.at(x, s) * a.at(s, y)).sum() };
    let a_d = |x: usize, y: usize| -> f64 { (0..n).map(|s| a.at(s, x) * deta.at(s, y)).sum() };
    Ok(t3(n, |x, y, z| {
        let nwac_yz_ax: f64 = (0..n).map(|s| a.at(s, x) * nwac.get(&[y, z, s])).sum();
        n5.get(&[x, y, z]) + pg.df.get(&[x, y, z]) - dfaa.get(&[x, y, z]) + nwac_yz_ax + (a_d(y, z) - a_d(z, y)) * e[x]
            - d_a(x, y) * e[z]
            + d_a(x, z) * e[y]
    }))
}

pub(crate) fn mainw(pg: &PointGeometry) -> Residual {
    Ok(rel(&pg.lc_nabla_a_form().scale(2.0), &mainw_rhs(pg)?))
}

pub(crate) fn n51(pg: &PointGeometry) -> Residual {
    contact(pg)?;
    let n5 = pg.n5().ok_or(missing("Q", "contact identity"))?;
    let a = Some(&pg.a);
    let rhs = pg.df.add(&pg.df_with([None, a, a])).scale(-1.0 / 3.0);
    Ok(rel(&n5, &rhs).max(skewness(&n5)))
}

pub(crate) fn nwac_skew(pg: &PointGeometry) -> Residual {
    let (xi, _, _, _) = contact(pg)?;
    let nwac = pg.nwac().expect("contact fields");
    let n = pg.dim();
    let on_xi = TensorValue::from_fn(n, Valence::new(0, 2), |ix| {
        (0..n).map(|s| nwac.get(&[ix[0], ix[1], s]) * xi.comps()[s]).sum()
    });
    Ok(skewness(&nwac).max(vanishing(&on_xi, nwac.sup_norm())))
}

pub(crate) fn skewac_b1(pg: &PointGeometry) -> Residual {
    contact(pg)?;
    let nwac = pg.nwac().expect("contact fields");
    Ok(rel(&nwac, &pg.df_with([Some(&pg.a), None, None]).scale(4.0 / 3.0)))
}

pub(crate) fn t38(pg: &PointGeometry) -> Residual {
    contact(pg)?;
    let a = Some(&pg.a);
    let t = &pg.torsion;
    let by_df = rel(t, &pg.df.scale(-1.0 / 3.0));
    let by_n = rel(t, &comp(&pg.nijenhuis_a(), [a, a, a]).scale(-0.25));
    let metric = vanishing(&nabla_form(pg, &pg.g, &pg.dg), nabla_g_scale(pg));
    let nabla_f = nabla_form(pg, &pg.f, &pg.dfield);
    let want = pg.df.sub(&pg.df_with([None, None, a])).scale(1.0 / 3.0);
    Ok(by_df.max(by_n).max(metric).max(rel(&nabla_f, &want)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin, sample_points, FieldProvider};

    fn geometries(d: &str, count: usize) -> Vec<PointGeometry> {
        let p = FieldProvider::new(builtin(d).unwrap());
        sample_points(&p.spec().domain, count, 0x5eed)
            .iter()
            .map(|pt| PointGeometry::new(&p, pt).unwrap())
            .collect()
    }

    /// Central differences of `G_ij` against the EMC residual's `∂G` term.
    #[test]
    fn emc_derivative_matches_finite_differences() {
        let p = FieldProvider::new(builtin("round_s2(1.5)").unwrap());
        let pt = [1.1, 0.3];
        let pg = PointGeometry::new(&p, &pt).unwrap();
        let (_, dbig) = big_g(&pg);
        let h = 1e-6;
        for m in 0..2 {
            let mut hi = pt;
            let mut lo = pt;
            hi[m] += h;
            lo[m] -= h;
            let gh = p.value("G", &hi).unwrap();
            let gl = p.value("G", &lo).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (gh.at(i, j) - gl.at(i, j)) / (2.0 * h);
                    assert!((fd - dbig.get(&[i, j, m])).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn s6_hermitian_identities_hold() {
        for pg in geometries("s6", 4) {
            for (name, f) in [
                ("emc", emc as fn(&PointGeometry) -> Residual),
                ("emc_t", emc_t),
                ("ein_g", ein_g),
                ("ein_f", ein_f),
                ("a_torsion", a_torsion),
                ("skew1", skew1),
                ("ff2", ff2),
                ("tordf", tordf),
                ("skew0_g", skew0_g),
                ("skew0_f", skew0_f),
                ("p27_nablaA", p27_nabla_a),
                ("p27_NA", p27_na),
                ("nuj1", nuj1_xcheck),
                ("nujq", nujq_xcheck),
                ("genconein", genconein_xcheck),
                ("contorsion", contorsion_xcheck),
                ("eq32", eq32),
                ("nablaQ", nabla_q),
            ] {
                let r = f(&pg).unwrap();
                assert!(r < 1e-9, "{name}: {r:e}");
            }
        }
    }

    /// The local coordinate form writes `−T(Z, X, AY)` where the mixed
    /// display has `+T(Z, X, AY)`; on S⁶ only the display sign holds.
    #[test]
    fn mixed_form_sign_is_settled_numerically() {
        for pg in geometries("s6", 4) {
            let lhs = PointGeometry::direction_first(&pg.nabla(&pg.f, &pg.dfield)).permute(&[1, 2, 0]);
            let plus = relative_residual(&lhs, &nabla_f_mixed_form(&pg, 1.0));
            let minus = relative_residual(&lhs, &nabla_f_mixed_form(&pg, -1.0));
            assert!(plus < 1e-12, "{plus:e}");
            assert!(minus > 1e-2, "{minus:e}");
        }
    }

    #[test]
    fn criterion_fails_on_control() {
        for pg in geometries("control_noncriterion", 4) {
            assert!(skew1(&pg).unwrap() > 1e-2);
            assert!(emc(&pg).unwrap() > 1e-2);
            assert!(genconein_xcheck(&pg).unwrap() < 1e-12);
            assert!(nuj1_xcheck(&pg).unwrap() < 1e-12);
        }
    }

    #[test]
    fn line_product_s6_contact_identities_hold() {
        for pg in geometries("line_product(s6)", 4) {
            for (name, f) in [
                (
                    "acm",
                    &axioms(AxiomKind::WeakAcm) as &dyn Fn(&PointGeometry) -> Residual,
                ),
                ("anc", &anc),
                ("reeb_geo", &reeb_geo),
                ("reeb_kill", &reeb_kill),
                ("deta_xi", &deta_xi),
                ("reeb_parallel", &reeb_parallel),
                ("mainw", &mainw),
                ("n51", &n51),
                ("nwac_skew", &nwac_skew),
                ("skewacB1", &skewac_b1),
                ("t38", &t38),
                ("nablaQ_g", &nabla_q_lc),
                ("nablaQ", &nabla_q),
                ("emc", &emc),
            ] {
                let r = f(&pg).unwrap();
                assert!(r < 1e-8, "{name}: {r:e}");
            }
        }
    }

    #[test]
    fn weighted_line_product_expansion_holds_with_nontrivial_q() {
        for pg in geometries("line_product(weighted_product([s6, flat_kahler(2)], [1, 3]))", 3) {
            for (name, f) in [
                (
                    "acm",
                    &axioms(AxiomKind::WeakAcm) as &dyn Fn(&PointGeometry) -> Residual,
                ),
                ("mainw", &mainw),
                ("n51", &n51),
                ("nwac_skew", &nwac_skew),
                ("skewacB1", &skewac_b1),
                ("t38", &t38),
                ("q_torsion", &q_torsion),
                ("nujq", &nujq_xcheck),
                ("nablaQ", &nabla_q),
            ] {
                let r = f(&pg).unwrap();
                assert!(r < 1e-9, "{name}: {r:e}");
            }
        }
    }
}
