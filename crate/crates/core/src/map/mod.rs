//! Evaluatable maps with derivatives, inverses, composition, and gluing.
//!
//! A [`SmoothMap`] is an immutable bundle of an evaluator, a domain, first
//! and second derivative sources (analytic closures or central differences),
//! and an optional inverse handle. Everything is reference-counted, so maps
//! clone cheaply and evaluate concurrently.

mod fd;
mod newton;
mod piecewise;

pub use fd::{fd_jacobian, fd_hessian, step_first, step_second};
pub use newton::NewtonOptions;
pub use piecewise::{glue, glue_with, invert_piecewise, GlueOptions, PiecewiseMap};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};

pub type EvalFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
pub type JacFn = Arc<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>;
pub type HessFn = Arc<dyn Fn(&Point) -> Hessian + Send + Sync>;
pub type PredFn = Arc<dyn Fn(&Point) -> bool + Send + Sync>;
pub type MarginFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type MapBuilder = Arc<dyn Fn() -> SmoothMap + Send + Sync>;

/// Third-order data: `comps[i][(j, k)] = ∂_j ∂_k f_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hessian {
    comps: Vec<DMatrix<f64>>,
}

impl Hessian {
    pub fn new(comps: Vec<DMatrix<f64>>) -> Hessian {
        Hessian { comps }
    }

    pub fn zeros(dim_out: usize, dim_in: usize) -> Hessian {
        Hessian {
            comps: vec![DMatrix::zeros(dim_in, dim_in); dim_out],
        }
    }

    pub fn component(&self, i: usize) -> &DMatrix<f64> {
        &self.comps[i]
    }

    pub fn components(&self) -> &[DMatrix<f64>] {
        &self.comps
    }

    pub fn dim_out(&self) -> usize {
        self.comps.len()
    }

    /// Hilbert–Schmidt norm: square root of the sum of all squared entries.
    pub fn hs_norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|m| m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest |H[i][j][k] − H[i][k][j]| (Schwarz symmetry defect).
    pub fn max_asymmetry(&self) -> f64 {
        self.comps
            .iter()
            .map(|m| (m - m.transpose()).amax())
            .fold(0.0, f64::max)
    }

    pub fn symmetrized(&self) -> Hessian {
        Hessian {
            comps: self
                .comps
                .iter()
                .map(|m| (m + m.transpose()) * 0.5)
                .collect(),
        }
    }
}

/// Value, Jacobian, and symmetrized Hessian of a map at a point.
#[derive(Clone, Debug)]
pub struct DerivativeBundle {
    pub value: Point,
    pub jacobian: DMatrix<f64>,
    pub hessian: Hessian,
}

impl DerivativeBundle {
    /// Hilbert–Schmidt norm |Df|.
    pub fn jacobian_norm(&self) -> f64 {
        self.jacobian.norm()
    }

    /// Hilbert–Schmidt norm |D²f|.
    pub fn hessian_norm(&self) -> f64 {
        self.hessian.hs_norm()
    }
}

#[derive(Clone)]
pub enum JacobianSource {
    Analytic(JacFn),
    FiniteDifference,
}

#[derive(Clone)]
pub enum HessianSource {
    Analytic(HessFn),
    FiniteDifference,
}

#[derive(Clone)]
pub enum InverseHandle {
    Absent,
    /// Builder for an analytic (or otherwise explicit) inverse map.
    Lazy(MapBuilder),
    /// Invert numerically with damped multi-start Newton iteration.
    Numeric(NewtonOptions),
}

struct MapInner {
    name: String,
    dim_in: usize,
    dim_out: usize,
    domain: Region,
    eval: EvalFn,
    jacobian: JacobianSource,
    hessian: HessianSource,
    inverse: InverseHandle,
    singular_distance: Option<MarginFn>,
    seam_margin: Option<MarginFn>,
    /// When this map is a composition, the factors in application order;
    /// lets `compose` flatten chains and evaluate derivatives in one pass.
    chain: Option<Vec<SmoothMap>>,
    /// Affine structure `x ↦ M·x + b` when the map is affine; adjacent
    /// affine factors of a chain merge analytically, which both speeds up
    /// deep pipelines and avoids translation round-trips that would erase
    /// tiny components.
    affine: Option<(DMatrix<f64>, Point)>,
}

/// An immutable, evaluatable map between Euclidean spaces.
#[derive(Clone)]
pub struct SmoothMap {
    inner: Arc<MapInner>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SmoothMap({}: R^{} -> R^{})",
            self.inner.name, self.inner.dim_in, self.inner.dim_out
        )
    }
}

impl SmoothMap {
    pub fn builder(name: impl Into<String>, dim_in: usize, dim_out: usize) -> SmoothMapBuilder {
        SmoothMapBuilder {
            name: name.into(),
            dim_in,
            dim_out,
            domain: Region::All,
            eval: None,
            jacobian: JacobianSource::FiniteDifference,
            hessian: HessianSource::FiniteDifference,
            inverse: InverseHandle::Absent,
            singular_distance: None,
            seam_margin: None,
            chain: None,
            affine: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn dim_in(&self) -> usize {
        self.inner.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.inner.dim_out
    }

    pub fn domain(&self) -> &Region {
        &self.inner.domain
    }

    pub fn has_inverse(&self) -> bool {
        !matches!(self.inner.inverse, InverseHandle::Absent)
    }

    pub fn is_singular_at(&self, x: &Point) -> bool {
        self.inner
            .singular_distance
            .as_ref()
            .is_some_and(|d| d(x) < 1e-150)
    }

    /// Distance proxy to the map's singular set; infinite for maps without
    /// singularities.
    pub fn singular_distance(&self, x: &Point) -> f64 {
        match &self.inner.singular_distance {
            Some(d) => d(x),
            None => f64::INFINITY,
        }
    }

    /// Raw evaluation. Total on ℝⁿ minus singular points; values off the
    /// declared domain are formula extensions without meaning.
    pub fn eval(&self, x: &Point) -> Point {
        (self.inner.eval)(x)
    }

    /// Domain- and singularity-checked evaluation.
    pub fn evaluate(&self, x: &Point) -> Result<Point> {
        if self.is_singular_at(x) {
            return Err(Error::SingularPoint {
                map: self.inner.name.clone(),
            });
        }
        if !self.inner.domain.contains(x) {
            return Err(Error::DomainViolation {
                map: self.inner.name.clone(),
            });
        }
        Ok(self.eval(x))
    }

    /// Jacobian at `x`, analytic when available, otherwise central differences.
    pub fn jacobian_at(&self, x: &Point) -> DMatrix<f64> {
        match &self.inner.jacobian {
            JacobianSource::Analytic(j) => j(x),
            JacobianSource::FiniteDifference => {
                let f = self.inner.eval.clone();
                fd::fd_jacobian(&*f, x, self.inner.dim_out)
            }
        }
    }

    /// Hessian at `x`, analytic when available, otherwise central differences.
    pub fn hessian_at(&self, x: &Point) -> Hessian {
        match &self.inner.hessian {
            HessianSource::Analytic(h) => h(x),
            HessianSource::FiniteDifference => {
                let f = self.inner.eval.clone();
                fd::fd_hessian(&*f, x, self.inner.dim_out)
            }
        }
    }

    fn uses_fd(&self) -> bool {
        matches!(self.inner.jacobian, JacobianSource::FiniteDifference)
            || matches!(self.inner.hessian, HessianSource::FiniteDifference)
    }

    /// Full derivative bundle with the Hessian symmetrized. Finite-difference
    /// sources require an interior margin of two steps.
    pub fn derivatives(&self, x: &Point) -> Result<DerivativeBundle> {
        if self.is_singular_at(x) {
            return Err(Error::SingularPoint {
                map: self.inner.name.clone(),
            });
        }
        if self.uses_fd() {
            let needed = 2.0 * fd::step_second(x);
            let margin = self.inner.domain.margin(x);
            if margin < needed {
                return Err(Error::InsufficientMargin { needed, margin });
            }
        } else if !self.inner.domain.contains(x) {
            return Err(Error::DomainViolation {
                map: self.inner.name.clone(),
            });
        }
        Ok(DerivativeBundle {
            value: self.eval(x),
            jacobian: self.jacobian_at(x),
            hessian: self.hessian_at(x).symmetrized(),
        })
    }

    /// The inverse as a map of its own.
    ///
    /// Lazy handles call their builder; numeric handles produce a map whose
    /// evaluator runs Newton iteration and whose derivatives come from the
    /// inverse-function formulas applied to the forward map.
    pub fn inverse(&self) -> Result<SmoothMap> {
        match &self.inner.inverse {
            InverseHandle::Absent => Err(Error::NoInverse {
                map: self.inner.name.clone(),
            }),
            InverseHandle::Lazy(builder) => Ok(builder()),
            InverseHandle::Numeric(opts) => Ok(numeric_inverse(self, opts.clone())),
        }
    }

    /// Solve `m(x) = y`. Analytic inverses evaluate directly; otherwise
    /// damped Newton iteration with multi-start. Non-convergence is an error.
    pub fn invert_point(&self, y: &Point) -> Result<Point> {
        match &self.inner.inverse {
            InverseHandle::Absent => Err(Error::NoInverse {
                map: self.inner.name.clone(),
            }),
            InverseHandle::Lazy(builder) => Ok(builder().eval(y)),
            InverseHandle::Numeric(opts) => newton::invert(self, y, opts),
        }
    }

    /// Distance proxy to the nearest internal seam of a piecewise map;
    /// infinite for maps without seams.
    pub fn seam_distance(&self, x: &Point) -> f64 {
        match &self.inner.seam_margin {
            Some(f) => f(x),
            None => f64::INFINITY,
        }
    }

    /// The composition factors in application order (just the map itself for
    /// leaf maps).
    pub fn chain_parts(&self) -> Vec<SmoothMap> {
        match &self.inner.chain {
            Some(parts) => parts.clone(),
            None => vec![self.clone()],
        }
    }

    /// The affine data `(M, b)` when the map is affine.
    pub fn affine_data(&self) -> Option<&(DMatrix<f64>, Point)> {
        self.inner.affine.as_ref()
    }
}

pub struct SmoothMapBuilder {
    name: String,
    dim_in: usize,
    dim_out: usize,
    domain: Region,
    eval: Option<EvalFn>,
    jacobian: JacobianSource,
    hessian: HessianSource,
    inverse: InverseHandle,
    singular_distance: Option<MarginFn>,
    seam_margin: Option<MarginFn>,
    chain: Option<Vec<SmoothMap>>,
    affine: Option<(DMatrix<f64>, Point)>,
}

impl SmoothMapBuilder {
    pub fn domain(mut self, region: Region) -> Self {
        self.domain = region;
        self
    }

    pub fn eval(mut self, f: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        self.eval = Some(Arc::new(f));
        self
    }

    pub fn jacobian(mut self, f: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = JacobianSource::Analytic(Arc::new(f));
        self
    }

    pub fn hessian(mut self, f: impl Fn(&Point) -> Hessian + Send + Sync + 'static) -> Self {
        self.hessian = HessianSource::Analytic(Arc::new(f));
        self
    }

    pub fn inverse_lazy(mut self, builder: impl Fn() -> SmoothMap + Send + Sync + 'static) -> Self {
        self.inverse = InverseHandle::Lazy(Arc::new(builder));
        self
    }

    pub fn inverse_newton(mut self, opts: NewtonOptions) -> Self {
        self.inverse = InverseHandle::Numeric(opts);
        self
    }

    pub fn singular_distance(
        mut self,
        dist: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.singular_distance = Some(Arc::new(dist));
        self
    }

    pub fn seam_margin(mut self, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        self.seam_margin = Some(Arc::new(f));
        self
    }

    pub fn build(self) -> SmoothMap {
        SmoothMap {
            inner: Arc::new(MapInner {
                name: self.name,
                dim_in: self.dim_in,
                dim_out: self.dim_out,
                domain: self.domain,
                eval: self.eval.expect("map evaluator must be set"),
                jacobian: self.jacobian,
                hessian: self.hessian,
                inverse: self.inverse,
                singular_distance: self.singular_distance,
                seam_margin: self.seam_margin,
                chain: self.chain,
                affine: self.affine,
            }),
        }
    }

    fn chain(mut self, parts: Vec<SmoothMap>) -> Self {
        self.chain = Some(parts);
        self
    }

    fn affine(mut self, m: DMatrix<f64>, b: Point) -> Self {
        self.affine = Some((m, b));
        self
    }
}

/// Inverse map backed by Newton iteration on the forward map, with analytic
/// derivative formulas pulled back through the forward Jacobian and Hessian.
fn numeric_inverse(forward: &SmoothMap, opts: NewtonOptions) -> SmoothMap {
    let name = format!("inv({})", forward.name());
    let dim = forward.dim_in();
    let f_eval = forward.clone();
    let f_jac = forward.clone();
    let f_hess = forward.clone();
    let f_back = forward.clone();
    let opts_eval = opts.clone();
    let opts_jac = opts.clone();
    let opts_hess = opts;

    SmoothMap::builder(name, dim, dim)
        .eval(move |y| {
            newton::invert(&f_eval, y, &opts_eval)
                .unwrap_or_else(|e| panic!("numeric inversion failed: {e}"))
        })
        .jacobian(move |y| {
            let x = newton::invert(&f_jac, y, &opts_jac)
                .unwrap_or_else(|e| panic!("numeric inversion failed: {e}"));
            f_jac
                .jacobian_at(&x)
                .try_inverse()
                .expect("forward jacobian is singular")
        })
        .hessian(move |y| {
            let x = newton::invert(&f_hess, y, &opts_hess)
                .unwrap_or_else(|e| panic!("numeric inversion failed: {e}"));
            let a = f_hess
                .jacobian_at(&x)
                .try_inverse()
                .expect("forward jacobian is singular");
            inverse_hessian(&a, &f_hess.hessian_at(&x))
        })
        .inverse_lazy(move || f_back.clone())
        .build()
}

/// Hessian of f⁻¹ from A = (Df)⁻¹ and D²f at the preimage point:
/// D²(f⁻¹)[i](j,k) = −Σ_{p,q,l} A_ip H[p](q,l) A_qj A_lk.
pub fn inverse_hessian(a: &DMatrix<f64>, h_fwd: &Hessian) -> Hessian {
    let n = a.nrows();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for p in 0..n {
                    let hp = h_fwd.component(p);
                    let mut inner = 0.0;
                    for q in 0..n {
                        for l in 0..n {
                            inner += hp[(q, l)] * a[(q, j)] * a[(l, k)];
                        }
                    }
                    s += a[(i, p)] * inner;
                }
                m[(j, k)] = -s;
            }
        }
        comps.push(m);
    }
    Hessian::new(comps)
}

/// First- and second-order chain rule for `outer ∘ inner` evaluated with
/// `j_out`, `h_out` at the inner image and `j_in`, `h_in` at the point.
pub fn chain_hessian(
    j_out: &DMatrix<f64>,
    h_out: &Hessian,
    j_in: &DMatrix<f64>,
    h_in: &Hessian,
) -> Hessian {
    let dim_out = j_out.nrows();
    let mid = j_out.ncols();
    let dim_in = j_in.ncols();
    let mut comps = Vec::with_capacity(dim_out);
    for i in 0..dim_out {
        let mut m = j_in.transpose() * h_out.component(i) * j_in;
        for l in 0..mid {
            let w = j_out[(i, l)];
            if w != 0.0 {
                m += w * h_in.component(l);
            }
        }
        debug_assert_eq!(m.ncols(), dim_in);
        comps.push(m);
    }
    Hessian::new(comps)
}

/// Composite `outer ∘ inner` with chain-rule derivatives. The domain is the
/// inner map's domain; image containment is the caller's contract (see
/// [`compose_checked`]).
///
/// Compositions flatten: composing chains concatenates their factors, and
/// evaluation, Jacobians, and Hessians run in a single forward pass over the
/// factors, so deep pipelines stay linear in depth.
pub fn compose(outer: &SmoothMap, inner: &SmoothMap) -> SmoothMap {
    assert_eq!(
        inner.dim_out(),
        outer.dim_in(),
        "composition dimension mismatch: {} then {}",
        inner.name(),
        outer.name()
    );
    let mut parts = inner.chain_parts();
    parts.extend(outer.chain_parts());
    compose_chain(parts)
}

/// General affine map `x ↦ M·x + b` (invertible M).
pub fn affine_map(matrix: DMatrix<f64>, shift: Point) -> SmoothMap {
    let dim_out = matrix.nrows();
    let dim_in = matrix.ncols();
    assert_eq!(dim_out, shift.len());
    let m1 = matrix.clone();
    let s1 = shift.clone();
    let m2 = matrix.clone();
    let m3 = matrix.clone();
    let s3 = shift.clone();
    let mut b = SmoothMap::builder("affine", dim_in, dim_out)
        .eval(move |x: &Point| &m1 * x + &s1)
        .jacobian(move |_| m2.clone())
        .hessian(move |_| Hessian::zeros(dim_out, dim_in))
        .affine(matrix.clone(), shift.clone());
    if dim_in == dim_out {
        if let Some(minv) = matrix.clone().try_inverse() {
            let _ = m3;
            b = b.inverse_lazy(move || {
                let shift_inv = -(&minv * &s3);
                affine_map(minv.clone(), shift_inv)
            });
        }
    }
    b.build()
}

/// Merge runs of adjacent affine factors analytically.
fn merge_affine_runs(parts: Vec<SmoothMap>) -> Vec<SmoothMap> {
    let mut out: Vec<SmoothMap> = Vec::with_capacity(parts.len());
    let mut run: Option<(DMatrix<f64>, Point)> = None;
    let flush = |run: &mut Option<(DMatrix<f64>, Point)>, out: &mut Vec<SmoothMap>| {
        if let Some((m, b)) = run.take() {
            let dim = m.ncols();
            let is_identity = b.norm() == 0.0 && (&m - DMatrix::identity(m.nrows(), dim)).amax() == 0.0;
            if !is_identity || out.is_empty() {
                out.push(affine_map(m, b));
            }
        }
    };
    for part in parts {
        match part.affine_data() {
            Some((m, b)) => {
                run = Some(match run.take() {
                    None => (m.clone(), b.clone()),
                    Some((m0, b0)) => (m * &m0, m * &b0 + b),
                });
            }
            None => {
                flush(&mut run, &mut out);
                out.push(part);
            }
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Composite of `parts` applied left to right.
pub fn compose_chain(parts: Vec<SmoothMap>) -> SmoothMap {
    assert!(!parts.is_empty());
    let parts = merge_affine_runs(parts);
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap();
    }
    for w in parts.windows(2) {
        assert_eq!(w[0].dim_out(), w[1].dim_in(), "chain dimension mismatch");
    }
    let dim_in = parts[0].dim_in();
    let dim_out = parts.last().unwrap().dim_out();
    let name = compose_name(parts.last().unwrap().name(), parts[0].name());
    let p_eval = parts.clone();
    let p_jac = parts.clone();
    let p_hess = parts.clone();
    let p_sing = parts.clone();
    let p_seam = parts.clone();

    let mut b = SmoothMap::builder(name, dim_in, dim_out)
        .domain(parts[0].domain().clone())
        .chain(parts.clone())
        .eval(move |x| {
            let mut cur = p_eval[0].eval(x);
            for part in &p_eval[1..] {
                cur = part.eval(&cur);
            }
            cur
        })
        .jacobian(move |x| {
            let mut cur = x.clone();
            let mut jac = p_jac[0].jacobian_at(&cur);
            cur = p_jac[0].eval(&cur);
            for part in &p_jac[1..] {
                jac = part.jacobian_at(&cur) * jac;
                cur = part.eval(&cur);
            }
            jac
        })
        .hessian(move |x| {
            let mut cur = x.clone();
            let mut jac = p_hess[0].jacobian_at(&cur);
            let mut hess = p_hess[0].hessian_at(&cur);
            cur = p_hess[0].eval(&cur);
            for part in &p_hess[1..] {
                let j_node = part.jacobian_at(&cur);
                let h_node = part.hessian_at(&cur);
                hess = chain_hessian(&j_node, &h_node, &jac, &hess);
                jac = j_node * jac;
                cur = part.eval(&cur);
            }
            hess
        })
        .singular_distance(move |x| {
            let mut cur = x.clone();
            let mut dist = f64::INFINITY;
            for (i, part) in p_sing.iter().enumerate() {
                let d = part.singular_distance(&cur);
                dist = dist.min(d);
                if d < 1e-150 {
                    return dist;
                }
                if i + 1 < p_sing.len() {
                    cur = part.eval(&cur);
                }
            }
            dist
        })
        .seam_margin(move |x| {
            let mut cur = x.clone();
            let mut seam = f64::INFINITY;
            for (i, part) in p_seam.iter().enumerate() {
                if part.is_singular_at(&cur) {
                    return 0.0;
                }
                seam = seam.min(part.seam_distance(&cur));
                if i + 1 < p_seam.len() {
                    cur = part.eval(&cur);
                }
            }
            seam
        });

    if parts.iter().all(|p| p.has_inverse()) {
        let back = parts.clone();
        b = b.inverse_lazy(move || {
            let rev: Vec<SmoothMap> = back
                .iter()
                .rev()
                .map(|p| p.inverse().expect("chain factor inverse"))
                .collect();
            compose_chain(rev)
        });
    }
    b.build()
}

fn compose_name(outer: &str, inner: &str) -> String {
    let s = format!("{outer}.{inner}");
    if s.len() > 48 {
        "composite".to_string()
    } else {
        s
    }
}

/// Composition with the image-containment precondition checked by sampling
/// the inner domain.
pub fn compose_checked(
    outer: &SmoothMap,
    inner: &SmoothMap,
    samples: usize,
    seed: u64,
) -> Result<SmoothMap> {
    use rand::SeedableRng;
    if let Some((lo, hi)) = inner.domain().bounding_box() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut found = 0usize;
        let mut tries = 0usize;
        while found < samples && tries < samples * 50 {
            tries += 1;
            let x = Point::from_fn(inner.dim_in(), |i, _| {
                use rand::Rng;
                lo[i] + (hi[i] - lo[i]) * rng.gen::<f64>()
            });
            if !inner.domain().contains(&x) || inner.is_singular_at(&x) {
                continue;
            }
            found += 1;
            let y = inner.eval(&x);
            if !outer.domain().contains(&y) {
                return Err(Error::DomainViolation {
                    map: format!("{} (image of {} escapes)", outer.name(), inner.name()),
                });
            }
        }
    }
    Ok(compose(outer, inner))
}

/// The identity of ℝⁿ.
pub fn identity(dim: usize) -> SmoothMap {
    SmoothMap::builder("id", dim, dim)
        .eval(|x| x.clone())
        .jacobian(move |_| DMatrix::identity(dim, dim))
        .hessian(move |_| Hessian::zeros(dim, dim))
        .inverse_lazy(move || identity(dim))
        .affine(DMatrix::identity(dim, dim), Point::zeros(dim))
        .build()
}

/// Translation `x ↦ x + shift`.
pub fn translation(shift: &Point) -> SmoothMap {
    let dim = shift.len();
    let s1 = shift.clone();
    let s2 = shift.clone();
    SmoothMap::builder("translate", dim, dim)
        .eval(move |x| x + &s1)
        .jacobian(move |_| DMatrix::identity(dim, dim))
        .hessian(move |_| Hessian::zeros(dim, dim))
        .inverse_lazy(move || translation(&(-&s2)))
        .affine(DMatrix::identity(dim, dim), shift.clone())
        .build()
}

/// Dilation `x ↦ scale·x` about the origin, `scale ≠ 0`.
pub fn dilation(dim: usize, scale: f64) -> SmoothMap {
    assert!(scale != 0.0 && scale.is_finite());
    SmoothMap::builder(format!("dilate[{scale}]"), dim, dim)
        .eval(move |x| x * scale)
        .jacobian(move |_| DMatrix::identity(dim, dim) * scale)
        .hessian(move |_| Hessian::zeros(dim, dim))
        .inverse_lazy(move || dilation(dim, 1.0 / scale))
        .affine(DMatrix::identity(dim, dim) * scale, Point::zeros(dim))
        .build()
}

/// Invertible linear map `x ↦ M·x`.
pub fn linear(matrix: DMatrix<f64>) -> SmoothMap {
    let dim_out = matrix.nrows();
    let dim_in = matrix.ncols();
    let m1 = matrix.clone();
    let m2 = matrix.clone();
    let mut b = SmoothMap::builder("linear", dim_in, dim_out)
        .eval(move |x| &m1 * x)
        .jacobian(move |_| m2.clone())
        .hessian(move |_| Hessian::zeros(dim_out, dim_in))
        .affine(matrix.clone(), Point::zeros(dim_out));
    if dim_in == dim_out {
        if let Some(inv) = matrix.clone().try_inverse() {
            b = b.inverse_lazy(move || linear(inv.clone()));
        }
    }
    b.build()
}

/// Affine map `x ↦ scale·Q·x + shift` from a similarity.
pub fn from_similarity(s: &crate::geometry::Similarity) -> SmoothMap {
    let dim = s.shift.len();
    let s1 = s.clone();
    let s2 = s.clone();
    let s3 = s.clone();
    SmoothMap::builder("similarity", dim, dim)
        .eval(move |x| s1.apply(x))
        .jacobian(move |_| &s2.rotation * s2.scale)
        .hessian(move |_| Hessian::zeros(dim, dim))
        .inverse_lazy(move || from_similarity(&s3.inverse()))
        .affine(&s.rotation * s.scale, s.shift.clone())
        .build()
}
