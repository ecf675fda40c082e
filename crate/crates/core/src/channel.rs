//! Quantum channels in Kraus form, their Choi matrices, and the plain-text
//! Kraus file format.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{mismatch, Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, ZERO};
use crate::state::{partial_trace_matrix, DensityMatrix, TraceOut};

/// Trace-preservation and complete-positivity tolerance.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map `ρ ↦ Σ K ρ K^dagger`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Builds a channel from Kraus operators, checking shapes and trace preservation.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Empty("Kraus list"));
        }
        for k in &kraus {
            if k.shape() != (dim_out, dim_in) {
                return Err(mismatch(
                    format!("{dim_out}x{dim_in} Kraus operator"),
                    format!("{}x{}", k.rows(), k.cols()),
                ));
            }
        }
        let ch = Self { dim_in, dim_out, kraus };
        let tp = ch.tp_defect();
        if tp > CHANNEL_TOL {
            return Err(Error::NotTracePreserving(tp));
        }
        Ok(ch)
    }

    /// Like [`new`](Self::new) but additionally checks that the Choi matrix is
    /// positive semidefinite. Used for externally supplied operators.
    pub fn new_validated(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::new(dim_in, dim_out, kraus)?;
        let min = ch.choi().min_eigenvalue();
        if min < -CHANNEL_TOL {
            return Err(Error::NotCompletelyPositive(min));
        }
        Ok(ch)
    }

    /// Drops Kraus operators that are exactly zero (weight-zero terms).
    pub(crate) fn from_weighted(dim: usize, terms: impl IntoIterator<Item = (f64, ComplexMatrix)>) -> Result<Self> {
        let kraus: Vec<ComplexMatrix> = terms
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, k)| k.scale_real(w.sqrt()))
            .collect();
        if kraus.is_empty() {
            return Err(Error::Empty("Kraus list"));
        }
        Self::new(dim, dim, kraus)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        let n = u.rows();
        Self::new(n, n, vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Largest entrywise modulus of `Σ K^dagger K - I`.
    pub fn tp_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    /// Largest entrywise modulus of `Φ(I/d) - I/d` (zero for unital channels).
    pub fn unitality_defect(&self) -> f64 {
        let mixed = DensityMatrix::maximally_mixed(self.dim_in);
        let out = self.apply_matrix(mixed.matrix());
        let target = ComplexMatrix::identity(self.dim_out).scale_real(1.0 / self.dim_out as f64);
        out.max_abs_diff(&target)
    }

    /// `Σ K X K^dagger` for an arbitrary `dim_in x dim_in` operator.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.shape(), (self.dim_in, self.dim_in), "channel input shape");
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.conjugate(x);
        }
        out
    }

    /// `(dim_out^2) x (dim_in^2)` matrix `T` with `vec(Φ(X)) = T vec(X)` in
    /// row-major vectorization.
    pub fn transfer_matrix(&self) -> ComplexMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        let mut t = ComplexMatrix::zeros(dout * dout, di * di);
        for k in &self.kraus {
            for a in 0..dout {
                for b in 0..dout {
                    for i in 0..di {
                        let kai = k[(a, i)];
                        if kai == ZERO {
                            continue;
                        }
                        for j in 0..di {
                            t[(a * dout + b, i * di + j)] += kai * k[(b, j)].conj();
                        }
                    }
                }
            }
        }
        t
    }

    pub fn choi(&self) -> ChoiMatrix {
        choi(self)
    }
}

/// Applies a channel to a state.
pub fn apply(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim_in {
        return Err(mismatch(ch.dim_in, rho.dim()));
    }
    Ok(DensityMatrix::from_matrix_unchecked(
        ch.apply_matrix(rho.matrix()).hermitian_part(),
    ))
}

/// `outer ∘ inner`, with Kraus operators `{K_o K_i}`.
pub fn compose(outer: &QuantumChannel, inner: &QuantumChannel) -> Result<QuantumChannel> {
    if outer.dim_in != inner.dim_out {
        return Err(mismatch(
            format!("outer input dimension {}", outer.dim_in),
            inner.dim_out,
        ));
    }
    let kraus = outer
        .kraus
        .iter()
        .flat_map(|ko| inner.kraus.iter().map(move |ki| ko * ki))
        .collect();
    QuantumChannel::new(inner.dim_in, outer.dim_out, kraus)
}

/// `a ⊗ b`, with Kraus operators `{K_a ⊗ K_b}`.
pub fn tensor_channels(a: &QuantumChannel, b: &QuantumChannel) -> QuantumChannel {
    let kraus = a
        .kraus
        .iter()
        .flat_map(|ka| b.kraus.iter().map(move |kb| ka.kron(kb)))
        .collect();
    QuantumChannel {
        dim_in: a.dim_in * b.dim_in,
        dim_out: a.dim_out * b.dim_out,
        kraus,
    }
}

/// `J(Φ) = (Φ ⊗ Id)(|Ω><Ω|)`, a canonical witness of the map itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    mat: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.mat).expect("Choi matrix is Hermitian")[0]
    }

    /// Max entrywise distance to another Choi matrix; infinite when shapes differ.
    pub fn distance(&self, other: &ChoiMatrix) -> f64 {
        if self.mat.shape() != other.mat.shape() {
            return f64::INFINITY;
        }
        self.mat.max_abs_diff(&other.mat)
    }

    /// Trace over the output factor; equals `I/d_in` for trace-preserving maps.
    pub fn input_marginal(&self) -> ComplexMatrix {
        partial_trace_matrix(&self.mat, self.dim_out, self.dim_in, TraceOut::First).expect("Choi shape is consistent")
    }

    /// `Σ w_i J_i`, e.g. for comparing against a convex mixture of maps.
    pub fn combination(terms: &[(f64, &ChoiMatrix)]) -> ChoiMatrix {
        let first = terms[0].1;
        let mut mat = ComplexMatrix::zeros(first.mat.rows(), first.mat.cols());
        for (w, c) in terms {
            mat.add_scaled(Complex64::new(*w, 0.0), &c.mat);
        }
        ChoiMatrix {
            dim_in: first.dim_in,
            dim_out: first.dim_out,
            mat,
        }
    }
}

/// Choi matrix of a channel.
pub fn choi(ch: &QuantumChannel) -> ChoiMatrix {
    let (di, dout) = (ch.dim_in, ch.dim_out);
    let norm = 1.0 / di as f64;
    let mut mat = ComplexMatrix::zeros(dout * di, dout * di);
    for k in &ch.kraus {
        // (K ⊗ I)|Ω> has amplitude K[a, i]/sqrt(d) at index a*di + i.
        let v: Vec<Complex64> = (0..dout * di).map(|idx| k[(idx / di, idx % di)]).collect();
        mat.add_scaled(Complex64::new(norm, 0.0), &ComplexMatrix::outer(&v, &v));
    }
    ChoiMatrix {
        dim_in: di,
        dim_out: dout,
        mat,
    }
}

/// Parses the Kraus file format.
///
/// ```text
/// dimOut dimIn count
/// re,im re,im ...      <- dimOut rows of dimIn entries, repeated count times
/// ```
///
/// Blank lines and lines starting with `#` are ignored. The resulting channel
/// is checked for trace preservation and complete positivity.
pub fn parse_kraus(text: &str) -> Result<QuantumChannel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad header: {e}"),
        })?;
    let [dim_out, dim_in, count] = nums[..] else {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `dimOut dimIn count`".into(),
        });
    };
    if dim_out == 0 || dim_in == 0 || count == 0 {
        return Err(Error::Parse {
            line: hline,
            msg: "dimensions and count must be positive".into(),
        });
    }

    let mut kraus = Vec::with_capacity(count);
    for _ in 0..count {
        let mut data = Vec::with_capacity(dim_out * dim_in);
        for _ in 0..dim_out {
            let (ln, row) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: "unexpected end of file".into(),
            })?;
            let entries: Vec<Complex64> = row
                .split_whitespace()
                .map(|tok| parse_entry(tok).ok_or(tok))
                .collect::<std::result::Result<_, _>>()
                .map_err(|tok| Error::Parse {
                    line: ln,
                    msg: format!("bad entry `{tok}`, expected re,im"),
                })?;
            if entries.len() != dim_in {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {dim_in} entries, found {}", entries.len()),
                });
            }
            data.extend(entries);
        }
        kraus.push(ComplexMatrix::new(dim_out, dim_in, data)?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing data after last Kraus block".into(),
        });
    }
    QuantumChannel::new_validated(dim_in, dim_out, kraus)
}

fn parse_entry(tok: &str) -> Option<Complex64> {
    let (re, im) = tok.split_once(',')?;
    Some(Complex64::new(re.parse().ok()?, im.parse().ok()?))
}

/// Writes a channel in the format read by [`parse_kraus`].
pub fn format_kraus(ch: &QuantumChannel) -> String {
    let mut out = format!("{} {} {}\n", ch.dim_out, ch.dim_in, ch.kraus.len());
    for k in &ch.kraus {
        for i in 0..k.rows() {
            let row: Vec<String> = k.row(i).iter().map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::random::{haar_unitary, random_density, stream};

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    fn bit_flip(p: f64) -> QuantumChannel {
        QuantumChannel::from_weighted(2, [(1.0 - p, ComplexMatrix::identity(2)), (p, pauli_x())]).unwrap()
    }

    #[test]
    fn identity_choi_is_max_entangled() {
        let c = choi(&QuantumChannel::identity(3));
        assert!(c.matrix().max_abs_diff(DensityMatrix::maximally_entangled(3).matrix()) < 1e-15);
        assert!(
            c.input_marginal()
                .max_abs_diff(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0))
                < 1e-15
        );
    }

    #[test]
    fn rejects_non_tp() {
        let k = ComplexMatrix::identity(2).scale_real(0.9);
        assert!(matches!(
            QuantumChannel::new(2, 2, vec![k]),
            Err(Error::NotTracePreserving(_))
        ));
        assert!(QuantumChannel::new(2, 2, vec![ComplexMatrix::identity(3)]).is_err());
    }

    #[test]
    fn compose_with_identity() {
        let ch = bit_flip(0.3);
        let c = compose(&QuantumChannel::identity(2), &ch).unwrap();
        assert!(choi(&c).distance(&choi(&ch)) < 1e-15);
        assert!(compose(&QuantumChannel::identity(3), &ch).is_err());
    }

    #[test]
    fn tensor_factorizes_on_products() {
        let mut rng = stream(4, 0);
        let a = bit_flip(0.2);
        let b = QuantumChannel::unitary(haar_unitary(3, &mut rng)).unwrap();
        let ab = tensor_channels(&a, &b);
        for _ in 0..5 {
            let ra = random_density(2, 2, &mut rng).unwrap();
            let rb = random_density(3, 2, &mut rng).unwrap();
            let lhs = apply(&ab, &ra.tensor(&rb)).unwrap();
            let rhs = apply(&a, &ra).unwrap().tensor(&apply(&b, &rb).unwrap());
            assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
        }
    }

    #[test]
    fn transfer_matrix_matches_kraus() {
        let mut rng = stream(8, 0);
        let ch = tensor_channels(&bit_flip(0.4), &bit_flip(0.1));
        let t = ch.transfer_matrix();
        let rho = random_density(4, 4, &mut rng).unwrap();
        let via_t = ComplexMatrix::from_vec_unchecked(4, 4, t.mul_vec(rho.matrix().data()));
        assert!(via_t.max_abs_diff(&ch.apply_matrix(rho.matrix())) < 1e-14);
    }

    #[test]
    fn kraus_text_roundtrip() {
        let ch = bit_flip(0.25);
        let back = parse_kraus(&format_kraus(&ch)).unwrap();
        assert!(choi(&back).distance(&choi(&ch)) < 1e-15);
    }

    #[test]
    fn kraus_parse_errors() {
        assert!(matches!(parse_kraus(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_kraus("2 2"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_kraus("1 1 1\n1,0 0,0"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_kraus("1 1 1\n1;0"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_kraus("1 1 1\n1,0\n1,0"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_kraus("1 1 1\n0.5,0"), Err(Error::NotTracePreserving(_))));
        let ok = "# comment\n1 1 1\n\n0,1\n";
        assert!(parse_kraus(ok).is_ok());
    }
}
