//! Matrix-valued potentials `V: [a, b] → Sym(n)`.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Real, Result};

/// Interpolation order of a sampled potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridOrder {
    /// Piecewise linear; continuous but without a derivative.
    Linear,
    /// Natural cubic spline; `C²` with an exact derivative.
    Cubic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples<T> {
    xs: Vec<T>,
    values: Vec<DMatrix<T>>,
    // Second derivatives of the natural spline at the nodes (cubic only).
    curvature: Vec<DMatrix<T>>,
    order: GridOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind<T> {
    Constant(DMatrix<T>),
    /// `V(x) = diag(offset_i + amplitude_i cos(frequency_i x))`.
    DiagonalCosine { offsets: Vec<T>, amplitudes: Vec<T>, frequencies: Vec<T> },
    /// `V(x) = base + amplitude · cos(frequency x)` with symmetric matrices.
    Cosine { base: DMatrix<T>, amplitude: DMatrix<T>, frequency: T },
    Grid(GridSamples<T>),
}

/// A bounded symmetric matrix potential on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential<T = f64> {
    n: usize,
    interval: (T, T),
    kind: PotentialKind<T>,
    v_max: T,
}

fn check_interval<T: Real>(interval: (T, T)) -> Result<()> {
    if !(interval.0.is_finite() && interval.1.is_finite() && interval.0 < interval.1) {
        return Err(Error::invalid(format!(
            "interval [{}, {}] is not a nondegenerate finite interval",
            interval.0.as_f64(),
            interval.1.as_f64()
        )));
    }
    Ok(())
}

fn check_symmetric<T: Real>(m: &DMatrix<T>, what: &str) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::invalid(format!("{what} must be a nonempty square matrix")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{what} has non-finite entries")));
    }
    let tol = T::lit(1e-12) * T::one().max(m.amax());
    if (m - m.transpose()).amax() > tol {
        return Err(Error::invalid(format!("{what} is not symmetric")));
    }
    Ok(())
}

fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.clone().singular_values().max()
}

impl<T: Real> Potential<T> {
    pub fn constant(matrix: DMatrix<T>, interval: (T, T)) -> Result<Self> {
        check_interval(interval)?;
        check_symmetric(&matrix, "constant potential")?;
        let v_max = spectral_norm(&matrix);
        Ok(Self { n: matrix.nrows(), interval, kind: PotentialKind::Constant(matrix), v_max })
    }

    /// `V = 0` with `n` channels.
    pub fn free(n: usize, interval: (T, T)) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        Self::constant(DMatrix::zeros(n, n), interval)
    }

    pub fn diagonal_cosine(offsets: Vec<T>, amplitudes: Vec<T>, frequencies: Vec<T>, interval: (T, T)) -> Result<Self> {
        check_interval(interval)?;
        let n = offsets.len();
        if n == 0 || amplitudes.len() != n || frequencies.len() != n {
            return Err(Error::invalid("diagonal-cosine needs equally many offsets, amplitudes and frequencies"));
        }
        if offsets.iter().chain(&amplitudes).chain(&frequencies).any(|x| !x.is_finite()) {
            return Err(Error::invalid("diagonal-cosine parameters must be finite"));
        }
        let v_max = (0..n).map(|i| offsets[i].abs() + amplitudes[i].abs()).fold(T::zero(), |a, b| a.max(b));
        Ok(Self { n, interval, kind: PotentialKind::DiagonalCosine { offsets, amplitudes, frequencies }, v_max })
    }

    /// Scalar Mathieu-type potential `amplitude · cos x`.
    pub fn mathieu(amplitude: T, interval: (T, T)) -> Result<Self> {
        Self::diagonal_cosine(vec![T::zero()], vec![amplitude], vec![T::one()], interval)
    }

    pub fn cosine(base: DMatrix<T>, amplitude: DMatrix<T>, frequency: T, interval: (T, T)) -> Result<Self> {
        check_interval(interval)?;
        check_symmetric(&base, "base matrix")?;
        check_symmetric(&amplitude, "amplitude matrix")?;
        if base.shape() != amplitude.shape() {
            return Err(Error::invalid("base and amplitude matrices differ in size"));
        }
        if !frequency.is_finite() {
            return Err(Error::invalid("frequency must be finite"));
        }
        let v_max = spectral_norm(&base) + spectral_norm(&amplitude);
        Ok(Self { n: base.nrows(), interval, kind: PotentialKind::Cosine { base, amplitude, frequency }, v_max })
    }

    /// Sampled potential on the nodes `xs`, which also fix the interval.
    pub fn grid(xs: Vec<T>, values: Vec<DMatrix<T>>, order: GridOrder) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::invalid("grid potential needs at least two nodes and one matrix per node"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid nodes must be finite and strictly increasing"));
        }
        let n = values[0].nrows();
        for v in &values {
            if v.shape() != (n, n) {
                return Err(Error::invalid("grid matrices differ in size"));
            }
            check_symmetric(v, "grid sample")?;
        }
        let interval = (xs[0], xs[xs.len() - 1]);
        let curvature = match order {
            GridOrder::Linear => Vec::new(),
            GridOrder::Cubic => natural_spline_curvature(&xs, &values),
        };
        let mut pot = Self {
            n,
            interval,
            kind: PotentialKind::Grid(GridSamples { xs, values, curvature, order }),
            v_max: T::zero(),
        };
        pot.v_max = pot.sampled_norm_max(4);
        Ok(pot)
    }

    /// Reads a CSV grid with header `x, v_11, v_12, ...`.
    ///
    /// Either all `n²` entries (row-major) or only the upper triangle may be
    /// given; missing lower entries are mirrored.
    pub fn from_csv_reader<R: Read>(reader: R, order: GridOrder) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        if headers.len() < 2 {
            return Err(Error::invalid("grid CSV needs an x column and at least one v column"));
        }
        let mut slots = Vec::new();
        for h in headers.iter().skip(1) {
            slots.push(parse_entry_name(h).ok_or_else(|| Error::invalid(format!("unrecognized column name '{h}'")))?);
        }
        let n = slots.iter().map(|&(i, j)| i.max(j)).max().unwrap_or(0) + 1;
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            if rec.len() != headers.len() {
                return Err(Error::invalid("ragged grid CSV row"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::invalid(format!("not a number: '{s}'")));
            xs.push(T::lit(num(&rec[0])?));
            let mut m = DMatrix::<T>::zeros(n, n);
            let mut seen = vec![false; n * n];
            for (k, &(i, j)) in slots.iter().enumerate() {
                let v = T::lit(num(&rec[k + 1])?);
                m[(i, j)] = v;
                seen[i * n + j] = true;
            }
            for i in 0..n {
                for j in 0..n {
                    if !seen[i * n + j] {
                        if !seen[j * n + i] {
                            return Err(Error::invalid(format!("grid CSV lacks entry v_{}{}", i + 1, j + 1)));
                        }
                        m[(i, j)] = m[(j, i)];
                    }
                }
            }
            values.push(m);
        }
        Self::grid(xs, values, order)
    }

    pub fn from_csv_path(path: &Path, order: GridOrder) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(f, order)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> (T, T) {
        self.interval
    }

    pub fn length(&self) -> T {
        self.interval.1 - self.interval.0
    }

    pub fn kind(&self) -> &PotentialKind<T> {
        &self.kind
    }

    /// Upper bound for `‖V(x)‖₂`; `-v_max` bounds every spectrum from below.
    pub fn v_max(&self) -> T {
        self.v_max
    }

    pub fn differentiable(&self) -> bool {
        !matches!(&self.kind, PotentialKind::Grid(g) if g.order == GridOrder::Linear)
    }

    pub fn is_symmetric_interval(&self) -> bool {
        let (a, b) = self.interval;
        (a + b).abs() <= T::lit(1e-12) * T::one().max(b.abs())
    }

    /// Highest spatial frequency present, used to size integration steps.
    pub fn max_frequency(&self) -> T {
        match &self.kind {
            PotentialKind::Constant(_) => T::zero(),
            PotentialKind::DiagonalCosine { frequencies, .. } => {
                frequencies.iter().fold(T::zero(), |a, f| a.max(f.abs()))
            }
            PotentialKind::Cosine { frequency, .. } => frequency.abs(),
            PotentialKind::Grid(g) => {
                let h = g.xs.windows(2).map(|w| w[1] - w[0]).fold(T::max_value().unwrap(), |a, b| a.min(b));
                T::pi() / h
            }
        }
    }

    pub fn eval(&self, x: T) -> DMatrix<T> {
        let mut out = DMatrix::zeros(self.n, self.n);
        self.eval_into(x, &mut out);
        out
    }

    /// Writes `V(x)` into `out`. Evaluation outside the interval extends the
    /// analytic presets naturally and clamps grid data to the end samples.
    pub fn eval_into(&self, x: T, out: &mut DMatrix<T>) {
        match &self.kind {
            PotentialKind::Constant(c) => out.copy_from(c),
            PotentialKind::DiagonalCosine { offsets, amplitudes, frequencies } => {
                out.fill(T::zero());
                for i in 0..self.n {
                    out[(i, i)] = offsets[i] + amplitudes[i] * (frequencies[i] * x).cos();
                }
            }
            PotentialKind::Cosine { base, amplitude, frequency } => {
                let c = (*frequency * x).cos();
                out.copy_from(base);
                *out += amplitude * c;
            }
            PotentialKind::Grid(g) => g.eval_into(x, out),
        }
    }

    pub fn derivative(&self, x: T) -> Result<DMatrix<T>> {
        let n = self.n;
        match &self.kind {
            PotentialKind::Constant(_) => Ok(DMatrix::zeros(n, n)),
            PotentialKind::DiagonalCosine { amplitudes, frequencies, .. } => {
                let mut out = DMatrix::zeros(n, n);
                for i in 0..n {
                    out[(i, i)] = -amplitudes[i] * frequencies[i] * (frequencies[i] * x).sin();
                }
                Ok(out)
            }
            PotentialKind::Cosine { amplitude, frequency, .. } => {
                Ok(amplitude * (-*frequency * (*frequency * x).sin()))
            }
            PotentialKind::Grid(g) => match g.order {
                GridOrder::Linear => Err(Error::NoDerivative),
                GridOrder::Cubic => Ok(g.derivative(x)),
            },
        }
    }

    /// Largest `‖V(x)‖₂` over a uniform grid with `refine` points per unit of
    /// the natural resolution.
    fn sampled_norm_max(&self, refine: usize) -> T {
        let (a, b) = self.interval;
        let count = match &self.kind {
            PotentialKind::Grid(g) => (g.xs.len() - 1) * refine,
            _ => 256 * refine,
        };
        (0..=count)
            .map(|k| {
                let x = a + (b - a) * T::lit(k as f64 / count as f64);
                spectral_norm(&self.eval(x))
            })
            .fold(T::zero(), |acc, v| acc.max(v))
    }
}

fn parse_entry_name(h: &str) -> Option<(usize, usize)> {
    let rest = h.trim().strip_prefix("v_").or_else(|| h.trim().strip_prefix("V_"))?;
    let (i, j) = if let Some((i, j)) = rest.split_once('_') {
        (i.parse::<usize>().ok()?, j.parse::<usize>().ok()?)
    } else if rest.len() == 2 && rest.chars().all(|c| c.is_ascii_digit()) {
        let b = rest.as_bytes();
        ((b[0] - b'0') as usize, (b[1] - b'0') as usize)
    } else {
        return None;
    };
    if i == 0 || j == 0 {
        return None;
    }
    Some((i - 1, j - 1))
}

fn natural_spline_curvature<T: Real>(xs: &[T], ys: &[DMatrix<T>]) -> Vec<DMatrix<T>> {
    let k = xs.len();
    let shape = ys[0].shape();
    let mut m = vec![DMatrix::zeros(shape.0, shape.1); k];
    if k < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    //   h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = 6 (Δ_i - Δ_{i-1}).
    let h: Vec<T> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let mut diag = Vec::with_capacity(k);
    let mut rhs: Vec<DMatrix<T>> = Vec::with_capacity(k);
    for i in 1..k - 1 {
        diag.push(two * (h[i - 1] + h[i]));
        rhs.push(((&ys[i + 1] - &ys[i]) / h[i] - (&ys[i] - &ys[i - 1]) / h[i - 1]) * six);
    }
    let cnt = diag.len();
    for i in 1..cnt {
        let w = h[i] / diag[i - 1];
        diag[i] -= w * h[i];
        let prev = rhs[i - 1].clone();
        rhs[i] -= prev * w;
    }
    let mut sol = vec![DMatrix::zeros(shape.0, shape.1); cnt];
    sol[cnt - 1] = &rhs[cnt - 1] / diag[cnt - 1];
    for i in (0..cnt - 1).rev() {
        sol[i] = (&rhs[i] - &sol[i + 1] * h[i + 1]) / diag[i];
    }
    for (i, s) in sol.into_iter().enumerate() {
        m[i + 1] = s;
    }
    m
}

impl<T: Real> GridSamples<T> {
    fn locate(&self, x: T) -> (usize, T) {
        let k = self.xs.len();
        let x = x.max(self.xs[0]).min(self.xs[k - 1]);
        let idx = self.xs.partition_point(|&xi| xi <= x).clamp(1, k - 1) - 1;
        (idx, x)
    }

    fn eval_into(&self, x: T, out: &mut DMatrix<T>) {
        let (i, x) = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        out.copy_from(&self.values[i]);
        *out *= a;
        *out += &self.values[i + 1] * b;
        if self.order == GridOrder::Cubic {
            let six = T::lit(6.0);
            let ca = (a * a * a - a) * h * h / six;
            let cb = (b * b * b - b) * h * h / six;
            *out += &self.curvature[i] * ca;
            *out += &self.curvature[i + 1] * cb;
        }
    }

    fn derivative(&self, x: T) -> DMatrix<T> {
        let (i, x) = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let three = T::lit(3.0);
        let six = T::lit(6.0);
        (&self.values[i + 1] - &self.values[i]) / h - &self.curvature[i] * ((three * a * a - T::one()) * h / six)
            + &self.curvature[i + 1] * ((three * b * b - T::one()) * h / six)
    }
}

/// Serializable description of a potential, as used in run configurations
/// and scenario catalogs. Matrices are given as lists of rows.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Free { n: usize, interval: (f64, f64) },
    Constant { matrix: Vec<Vec<f64>>, interval: (f64, f64) },
    DiagonalCosine { offsets: Vec<f64>, amplitudes: Vec<f64>, frequencies: Vec<f64>, interval: (f64, f64) },
    /// `amplitude · cos x` in each of `n` channels (`n` defaults to 1).
    Mathieu {
        amplitude: f64,
        #[serde(default = "one")]
        n: usize,
        interval: (f64, f64),
    },
    CoupledCosine { base: Vec<Vec<f64>>, amplitude: Vec<Vec<f64>>, frequency: f64, interval: (f64, f64) },
    Grid { path: std::path::PathBuf, order: GridOrder },
}

fn one() -> usize {
    1
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("matrices must be given as n rows of length n"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential<f64>> {
        match self {
            PotentialSpec::Free { n, interval } => Potential::free(*n, *interval),
            PotentialSpec::Constant { matrix, interval } => Potential::constant(matrix_from_rows(matrix)?, *interval),
            PotentialSpec::DiagonalCosine { offsets, amplitudes, frequencies, interval } => {
                Potential::diagonal_cosine(offsets.clone(), amplitudes.clone(), frequencies.clone(), *interval)
            }
            PotentialSpec::Mathieu { amplitude, n, interval } => {
                if *n == 0 {
                    return Err(Error::invalid("n must be positive"));
                }
                Potential::diagonal_cosine(vec![0.0; *n], vec![*amplitude; *n], vec![1.0; *n], *interval)
            }
            PotentialSpec::CoupledCosine { base, amplitude, frequency, interval } => {
                Potential::cosine(matrix_from_rows(base)?, matrix_from_rows(amplitude)?, *frequency, *interval)
            }
            PotentialSpec::Grid { path, order } => Potential::from_csv_path(path, *order),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Free { n, .. } => format!("free(n={n})"),
            PotentialSpec::Constant { matrix, .. } => format!("constant({matrix:?})"),
            PotentialSpec::DiagonalCosine { offsets, amplitudes, frequencies, .. } => {
                format!("diagonal-cosine(offsets={offsets:?}, amplitudes={amplitudes:?}, frequencies={frequencies:?})")
            }
            PotentialSpec::Mathieu { amplitude, n, .. } => format!("{amplitude}·cos x (n={n})"),
            PotentialSpec::CoupledCosine { base, amplitude, frequency, .. } => {
                format!("coupled-cosine(base={base:?}, amplitude={amplitude:?}, frequency={frequency})")
            }
            PotentialSpec::Grid { path, order } => format!("grid({}, {order:?})", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn presets_evaluate() {
        let v = Potential::mathieu(2.0, (0.0, 2.0 * PI)).unwrap();
        assert_eq!(v.n(), 1);
        assert!((v.eval(0.3)[(0, 0)] - 2.0 * 0.3f64.cos()).abs() < 1e-15);
        assert!((v.derivative(0.3).unwrap()[(0, 0)] + 2.0 * 0.3f64.sin()).abs() < 1e-15);
        assert_eq!(v.v_max(), 2.0);

        let c = Potential::constant(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 10.0]), (0.0, 1.0)).unwrap();
        assert!((c.v_max() - 10.0f64).abs() < 1e-12);
        assert!(c.differentiable());
    }

    #[test]
    fn asymmetric_matrices_are_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(Potential::constant(m, (0.0, 1.0)).is_err());
        assert!(Potential::free(1, (1.0, 1.0)).is_err());
    }

    #[test]
    fn cubic_grid_reproduces_smooth_data() {
        let xs: Vec<f64> = (0..=200).map(|k| 2.0 * PI * k as f64 / 200.0).collect();
        let vals: Vec<_> = xs.iter().map(|&x| DMatrix::from_element(1, 1, x.sin())).collect();
        let v = Potential::grid(xs, vals, GridOrder::Cubic).unwrap();
        for &x in &[0.5, 1.7, 4.0] {
            assert!((v.eval(x)[(0, 0)] - x.sin()).abs() < 1e-6);
            assert!((v.derivative(x).unwrap()[(0, 0)] - x.cos()).abs() < 1e-4);
        }
    }

    #[test]
    fn csv_upper_triangle_is_mirrored() {
        let data = "x,v_11,v_12,v_22\n0,1,2,3\n1,1,2,3\n2,1,2,3\n";
        let v = Potential::<f64>::from_csv_reader(data.as_bytes(), GridOrder::Linear).unwrap();
        assert_eq!(v.n(), 2);
        assert_eq!(v.eval(0.5), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
        assert!(!v.differentiable());
        assert!(matches!(v.derivative(0.5), Err(Error::NoDerivative)));
    }

    #[test]
    fn csv_full_matrix_must_be_symmetric() {
        let data = "x,v_11,v_12,v_21,v_22\n0,1,2,5,3\n1,1,2,5,3\n";
        assert!(Potential::<f64>::from_csv_reader(data.as_bytes(), GridOrder::Cubic).is_err());
    }
}
