//! Shared numerical kernels: complex polynomials, small dense complex linear
//! algebra (problems here never exceed 20x20), Gauss-Legendre rules and a
//! scaled-exponential value type used to keep contour integrands inside f64
//! range.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// exp(z) with underflow saturation: very negative real parts map to exact 0
/// instead of subnormal noise.
pub fn cexp(z: C64) -> C64 {
    if z.re < -745.0 {
        C64::new(0.0, 0.0)
    } else {
        z.exp()
    }
}

/// A complex value stored as `m * exp(shift)` with a normalized mantissa.
///
/// Contour integrands and characteristic determinants combine factors like
/// `e^{-i a^j λ}` whose magnitudes leave f64 range long before the assembled
/// quantity does. All determinant and transform assembly runs on `Sc`
/// values; the node summation folds `shift` together with `iλx - aλⁿt` into
/// one final `exp`.
#[derive(Debug, Clone, Copy)]
pub struct Sc {
    pub m: C64,
    pub shift: C64,
}

impl Sc {
    pub fn new(m: C64, shift: C64) -> Self {
        Sc { m, shift }.normalized()
    }

    pub fn plain(m: C64) -> Self {
        Sc {
            m,
            shift: C64::new(0.0, 0.0),
        }
        .normalized()
    }

    pub fn zero() -> Self {
        Sc {
            m: C64::new(0.0, 0.0),
            shift: C64::new(0.0, 0.0),
        }
    }

    /// exp(w) as an Sc (unit mantissa).
    pub fn expc(w: C64) -> Self {
        Sc {
            m: C64::new(1.0, 0.0),
            shift: w,
        }
    }

    fn normalized(mut self) -> Self {
        let a = self.m.norm();
        if a == 0.0 || !a.is_finite() {
            self.shift = C64::new(0.0, 0.0);
            return self;
        }
        let ln = a.ln();
        if ln.abs() > 1.0 {
            self.m /= a;
            self.shift.re += ln;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.m.norm() == 0.0
    }

    /// log of the magnitude: ln|m| + Re(shift).
    pub fn ln_norm(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.m.norm().ln() + self.shift.re
        }
    }

    /// Collapse to a plain complex number. Only safe when the represented
    /// value is known to be in range (saturates to 0 on deep underflow).
    pub fn value(&self) -> C64 {
        self.m * cexp(self.shift)
    }

    pub fn scale(self, k: C64) -> Self {
        Sc::new(self.m * k, self.shift)
    }

    pub fn mul(self, o: Sc) -> Self {
        Sc::new(self.m * o.m, self.shift + o.shift)
    }

    pub fn div(self, o: Sc) -> Self {
        Sc::new(self.m / o.m, self.shift - o.shift)
    }

    pub fn neg(mut self) -> Self {
        self.m = -self.m;
        self
    }

    /// Sum, aligning to the larger exponent so the folded factor never
    /// overflows.
    pub fn add(self, o: Sc) -> Self {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        if self.shift.re >= o.shift.re {
            Sc::new(self.m + o.m * cexp(o.shift - self.shift), self.shift)
        } else {
            Sc::new(o.m + self.m * cexp(self.shift - o.shift), o.shift)
        }
    }

    pub fn sub(self, o: Sc) -> Self {
        self.add(o.neg())
    }
}

/// Determinant of a matrix of scaled-exponent values via LU with pivoting on
/// log-magnitude. Keeps graded determinants (entries spanning thousands of
/// orders of magnitude) exact to working precision.
pub fn sc_det(mut a: Vec<Vec<Sc>>) -> Sc {
    let n = a.len();
    if n == 0 {
        return Sc::plain(C64::new(1.0, 0.0));
    }
    let mut sign = 1.0;
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].ln_norm();
        for r in (k + 1)..n {
            let v = a[r][k].ln_norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == f64::NEG_INFINITY {
            return Sc::zero();
        }
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        let pivot = a[k][k];
        diag.push(pivot);
        for r in (k + 1)..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].div(pivot);
            for cc in (k + 1)..n {
                let sub = f.mul(a[k][cc]);
                a[r][cc] = a[r][cc].sub(sub);
            }
        }
    }
    let mut d = Sc::plain(C64::new(sign, 0.0));
    for v in diag {
        d = d.mul(v);
    }
    d
}

// ---------------------------------------------------------------------------
// Complex polynomials in the monomial basis on [0,1].
// ---------------------------------------------------------------------------

/// Polynomial with complex coefficients, `p(x) = Σ c[m] x^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    pub c: Vec<C64>,
}

impl CPoly {
    pub fn new(c: Vec<C64>) -> Self {
        let mut p = CPoly { c };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        CPoly { c: vec![] }
    }

    pub fn from_real(c: &[f64]) -> Self {
        CPoly::new(c.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|z| z.norm() == 0.0)
    }

    fn trim(&mut self) {
        while let Some(last) = self.c.last() {
            if last.norm() == 0.0 && self.c.len() > 1 {
                self.c.pop();
            } else {
                break;
            }
        }
        if self.c.len() == 1 && self.c[0].norm() == 0.0 {
            self.c.clear();
        }
    }

    pub fn eval(&self, x: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &cm in self.c.iter().rev() {
            acc = acc * x + cm;
        }
        acc
    }

    pub fn eval_real(&self, x: f64) -> C64 {
        self.eval(C64::new(x, 0.0))
    }

    pub fn derivative(&self) -> CPoly {
        if self.c.len() <= 1 {
            return CPoly::zero();
        }
        CPoly::new(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(k, &cm)| cm * ((k + 1) as f64))
                .collect(),
        )
    }

    /// k-th derivative evaluated at x.
    pub fn deriv_at(&self, k: usize, x: f64) -> C64 {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.derivative();
        }
        p.eval_real(x)
    }

    pub fn add(&self, other: &CPoly) -> CPoly {
        let n = self.c.len().max(other.c.len());
        let mut c = vec![C64::new(0.0, 0.0); n];
        for (k, slot) in c.iter_mut().enumerate() {
            if k < self.c.len() {
                *slot += self.c[k];
            }
            if k < other.c.len() {
                *slot += other.c[k];
            }
        }
        CPoly::new(c)
    }

    pub fn scale(&self, k: C64) -> CPoly {
        CPoly::new(self.c.iter().map(|&cm| cm * k).collect())
    }

    pub fn mul(&self, other: &CPoly) -> CPoly {
        if self.c.is_empty() || other.c.is_empty() {
            return CPoly::zero();
        }
        let mut c = vec![C64::new(0.0, 0.0); self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        CPoly::new(c)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Least-squares fit of a degree-`deg` polynomial through `(x_j, y_j)` sample
/// pairs, via normal equations. Used to certify remainder-polynomial
/// structure; sizes stay tiny.
pub fn poly_fit(xs: &[C64], ys: &[C64], deg: usize) -> CPoly {
    let m = deg + 1;
    let mut ata = vec![vec![C64::new(0.0, 0.0); m]; m];
    let mut atb = vec![C64::new(0.0, 0.0); m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pow = vec![C64::new(1.0, 0.0); m];
        for k in 1..m {
            pow[k] = pow[k - 1] * x;
        }
        for r in 0..m {
            for cc in 0..m {
                ata[r][cc] += pow[r].conj() * pow[cc];
            }
            atb[r] += pow[r].conj() * y;
        }
    }
    let sol = solve(ata, atb).expect("poly_fit normal equations singular");
    CPoly::new(sol)
}

// ---------------------------------------------------------------------------
// Small dense complex linear algebra (LU with partial pivoting).
// ---------------------------------------------------------------------------

fn lu_decompose(a: &mut [Vec<C64>]) -> Option<(Vec<usize>, i32)> {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].norm();
        for r in (k + 1)..n {
            let v = a[r][k].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            a.swap(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        let pivot = a[k][k];
        for r in (k + 1)..n {
            let f = a[r][k] / pivot;
            a[r][k] = f;
            for cc in (k + 1)..n {
                let sub = f * a[k][cc];
                a[r][cc] -= sub;
            }
        }
    }
    Some((perm, sign))
}

/// Determinant of a small complex matrix.
pub fn det(mut a: Vec<Vec<C64>>) -> C64 {
    let n = a.len();
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    match lu_decompose(&mut a) {
        None => C64::new(0.0, 0.0),
        Some((_, sign)) => {
            let mut d = C64::new(sign as f64, 0.0);
            for k in 0..n {
                d *= a[k][k];
            }
            d
        }
    }
}

/// Solve `A x = b` for a small complex system.
pub fn solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = a.len();
    let (perm, _) = lu_decompose(&mut a)?;
    let pb: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
    b = pb;
    // forward
    for k in 0..n {
        for j in 0..k {
            let sub = a[k][j] * b[j];
            b[k] -= sub;
        }
    }
    // backward
    for k in (0..n).rev() {
        for j in (k + 1)..n {
            let sub = a[k][j] * b[j];
            b[k] -= sub;
        }
        b[k] /= a[k][k];
    }
    Some(b)
}

/// Inverse of a small complex matrix.
pub fn inverse(a: &[Vec<C64>]) -> Option<Vec<Vec<C64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        cols.push(solve(a.to_vec(), e)?);
    }
    let mut inv = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            inv[i][j] = v;
        }
    }
    Some(inv)
}

/// Numerical rank via row elimination with a relative pivot threshold.
pub fn rank(mut a: Vec<Vec<C64>>, tol: f64) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut rk = 0;
    let mut col = 0;
    while rk < rows && col < cols {
        let mut piv = rk;
        let mut best = a[rk][col].norm();
        for r in (rk + 1)..rows {
            if a[r][col].norm() > best {
                best = a[r][col].norm();
                piv = r;
            }
        }
        if best <= tol * scale {
            col += 1;
            continue;
        }
        a.swap(rk, piv);
        let pivot = a[rk][col];
        for r in (rk + 1)..rows {
            let f = a[r][col] / pivot;
            for cc in col..cols {
                let sub = f * a[rk][cc];
                a[r][cc] -= sub;
            }
        }
        rk += 1;
        col += 1;
    }
    rk
}

/// Hermitian-orthonormal rows spanning the complement of the row space of
/// `rows` in C^m. Gram-Schmidt seeded with the standard basis.
pub fn orth_complement(rows: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    // Orthonormalize the given rows first.
    for r in rows {
        basis.push(r.clone());
        gram_schmidt_last(&mut basis);
    }
    let keep = basis.len();
    for j in 0..m {
        if basis.len() == m {
            break;
        }
        let mut e = vec![C64::new(0.0, 0.0); m];
        e[j] = C64::new(1.0, 0.0);
        basis.push(e);
        gram_schmidt_last(&mut basis);
    }
    basis.split_off(keep)
}

fn gram_schmidt_last(basis: &mut Vec<Vec<C64>>) {
    let k = basis.len() - 1;
    for _pass in 0..2 {
        for j in 0..k {
            let mut dot = C64::new(0.0, 0.0);
            for (a, b) in basis[j].iter().zip(basis[k].iter()) {
                dot += a.conj() * b;
            }
            for i in 0..basis[k].len() {
                let sub = dot * basis[j][i];
                basis[k][i] -= sub;
            }
        }
    }
    let norm: f64 = basis[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        basis.pop();
    } else {
        for z in basis[k].iter_mut() {
            *z /= norm;
        }
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [-1, 1].
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1], computed
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-flavoured initial guess.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_eval_and_derivative() {
        // p(x) = x(1-x)^2 = x - 2x^2 + x^3
        let p = CPoly::from_real(&[0.0, 1.0, -2.0, 1.0]);
        assert!((p.eval_real(0.5).re - 0.125).abs() < 1e-15);
        assert!((p.deriv_at(1, 0.0).re - 1.0).abs() < 1e-15);
        assert!((p.deriv_at(2, 0.0).re + 4.0).abs() < 1e-15);
        assert!(p.deriv_at(1, 1.0).norm() < 1e-15);
    }

    #[test]
    fn det_solve_inverse_roundtrip() {
        let a = vec![
            vec![c(2.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0), c(1.0, 1.0)],
            vec![c(1.0, -1.0), c(0.5, 0.0), c(2.0, 2.0)],
        ];
        let d = det(a.clone());
        assert!(d.norm() > 1e-12);
        let x = solve(a.clone(), vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)]).unwrap();
        // residual
        for i in 0..3 {
            let mut r = C64::new(0.0, 0.0);
            for j in 0..3 {
                r += a[i][j] * x[j];
            }
            let b = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)][i];
            assert!((r - b).norm() < 1e-12);
        }
        let inv = inverse(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..3 {
                    s += a[i][k] * inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_and_complement() {
        let rows = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ];
        assert_eq!(rank(rows.clone(), 1e-12), 2);
        let comp = orth_complement(&rows);
        assert_eq!(comp.len(), 2);
        for crow in &comp {
            for row in &rows {
                let mut dot = C64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(crow.iter()) {
                    dot += a.conj() * b;
                }
                assert!(dot.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (xs, ws) = gauss_legendre(8);
        // ∫_{-1}^1 x^14 dx = 2/15
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn poly_fit_recovers_coefficients() {
        let p = CPoly::new(vec![c(1.0, -0.5), c(0.0, 2.0), c(3.0, 0.0)]);
        let xs: Vec<C64> = (0..7).map(|k| c(0.3 * k as f64, 0.1 * k as f64)).collect();
        let ys: Vec<C64> = xs.iter().map(|&x| p.eval(x)).collect();
        let q = poly_fit(&xs, &ys, 2);
        for (a, b) in p.c.iter().zip(q.c.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
