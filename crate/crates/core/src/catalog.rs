//! Built-in holomorphic isometric immersions with closed-form expectations.
//!
//! Most members use the *hyperplane family* construction: given a nowhere
//! vanishing holomorphic vector `v(z) = (1, v_1(z), ..., v_N(z))`, the plane
//! `S(z) = { w : sum_k v_k(z) w_k = 0 }` has the polynomial basis
//! `f_j = e_j - v_j(z) e_0`, which gives a holomorphic map into
//! `Gr_N(C^{N+1})` (quotient rank one, hence projectively flat pullback).
//! Other charts of the same immersion are obtained by rotating the ambient
//! space with real permutations, which commutes with the kernel construction.
//!
//! Every member records its closed-form expectations (flatness, parallelism
//! of the second fundamental form, minimal holomorphic sectional curvature,
//! volume where known); the test-suite treats those numbers as frozen
//! oracles.

use crate::immersion::{term, BaseSpace, ChartPolynomial, Expectations, Immersion, MonomialTerm};
use crate::linalg::{CMat, Mat, C64};
use crate::{Error, Result};

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Chart map of the hyperplane family of `v = (1, v_1, ..., v_N)`: the
/// `(N+1) x N` matrix with columns `f_j = e_j - v_j e_0`.
///
/// `components[j]` holds the monomials of `v_{j+1}`; the leading component
/// is implicitly the constant 1.
fn hyperplane_chart(m: usize, components: &[Vec<MonomialTerm>]) -> Result<ChartPolynomial> {
    let n_upper = components.len();
    let mut entries: Vec<Vec<MonomialTerm>> = vec![Vec::new(); (n_upper + 1) * n_upper];
    for (jm1, comp) in components.iter().enumerate() {
        let j = jm1 + 1;
        // Row 0 of column j holds -v_j.
        entries[jm1] = comp
            .iter()
            .map(|t| MonomialTerm {
                coeff: -t.coeff,
                powers: t.powers.clone(),
            })
            .collect();
        // Row j of column j holds the constant 1.
        entries[j * n_upper + jm1] = vec![term(1.0, 0.0, vec![0; m])];
    }
    ChartPolynomial::new(n_upper + 1, n_upper, m, entries)
}

/// Real permutation matrix sending slot `perm[i]` to slot `i` (columns of
/// the identity reordered), acting on the ambient space.
fn permutation(perm: &[usize]) -> CMat {
    let n = perm.len();
    Mat::from_fn(n, n, |i, j| {
        if perm[i] == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Totally geodesic linear `CP^m` inside the hyperplane Grassmannian
/// `Gr_{n-1}(C^n)`: `v = (1, z_1, ..., z_m, 0, ..., 0)`.
pub fn linear(m: usize, n: usize) -> Result<Immersion> {
    if m == 0 || n < m + 2 {
        return Err(Error::InvalidParameter(format!(
            "linear embedding needs m >= 1 and n >= m + 2, got m={m}, n={n}"
        )));
    }
    let mut components: Vec<Vec<MonomialTerm>> = Vec::new();
    for k in 0..n - 1 {
        if k < m {
            let mut powers = vec![0u32; m];
            powers[k] = 1;
            components.push(vec![MonomialTerm {
                coeff: C64::new(1.0, 0.0),
                powers,
            }]);
        } else {
            components.push(Vec::new());
        }
    }
    let chart0 = hyperplane_chart(m, &components)?;
    let mut charts = vec![chart0.clone()];
    for j in 1..=m {
        // Swap homogeneous slots 0 and j of the first m + 1 ambient
        // coordinates.
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, j);
        charts.push(chart0.rotated(&permutation(&perm))?);
    }
    let mfac: f64 = (1..=m).map(|k| k as f64).product();
    Immersion::new(
        format!("linear:m={m},n={n}"),
        BaseSpace::Projective { m },
        charts,
        Some(Expectations {
            flat: true,
            parallel: true,
            min_hol: 2.0,
            hol_constant: true,
            volume: Some((2.0 * std::f64::consts::PI).powi(m as i32) / mfac),
            description: format!("totally geodesic CP^{m} in Gr_{}(C^{n})", n - 1),
        }),
    )
}

/// Degree-`d` rational normal curve `v_k = sqrt(binom(d,k)) z^k` as a
/// hyperplane family: `CP^1 -> Gr_d(C^{d+1})` with induced metric `d` times
/// the round one.
pub fn veronese(d: usize) -> Result<Immersion> {
    if d == 0 || d > 6 {
        return Err(Error::InvalidParameter(format!(
            "veronese degree must lie in 1..=6, got {d}"
        )));
    }
    let components: Vec<Vec<MonomialTerm>> = (1..=d)
        .map(|k| {
            vec![MonomialTerm {
                coeff: C64::new(binomial(d as u32, k as u32).sqrt(), 0.0),
                powers: vec![k as u32],
            }]
        })
        .collect();
    let chart0 = hyperplane_chart(1, &components)?;
    // Second chart via z -> 1/z; the homogenized component vector reverses,
    // and the binomial weights are symmetric.
    let reversal: Vec<usize> = (0..=d).rev().collect();
    let chart1 = chart0.rotated(&permutation(&reversal))?;
    Immersion::new(
        format!("veronese:{d}"),
        BaseSpace::Projective { m: 1 },
        vec![chart0, chart1],
        Some(Expectations {
            flat: true,
            parallel: d <= 2,
            min_hol: 2.0 / d as f64,
            hol_constant: true,
            volume: Some(2.0 * std::f64::consts::PI * d as f64),
            description: format!("degree-{d} rational normal curve in Gr_{d}(C^{})", d + 1),
        }),
    )
}

/// Segre surface `CP^1 x CP^1 -> Gr_3(C^4)`, `v = (1, z, w, zw)`.
pub fn segre() -> Result<Immersion> {
    let components = vec![
        vec![term(1.0, 0.0, vec![1, 0])],
        vec![term(1.0, 0.0, vec![0, 1])],
        vec![term(1.0, 0.0, vec![1, 1])],
    ];
    let chart0 = hyperplane_chart(2, &components)?;
    // Chart bits flip factors; homogeneous slots are labeled by the
    // monomials (1, z, w, zw).
    let flip_z = permutation(&[1, 0, 3, 2]);
    let flip_w = permutation(&[2, 3, 0, 1]);
    let both = flip_z.mul(&flip_w);
    let charts = vec![
        chart0.clone(),
        chart0.rotated(&flip_z)?,
        chart0.rotated(&flip_w)?,
        chart0.rotated(&both)?,
    ];
    Immersion::new(
        "segre",
        BaseSpace::ProductLines { factors: 2 },
        charts,
        Some(Expectations {
            flat: true,
            parallel: true,
            min_hol: 1.0,
            hol_constant: false,
            volume: Some(4.0 * std::f64::consts::PI * std::f64::consts::PI),
            description: "Segre surface CP^1 x CP^1 in Gr_3(C^4)".into(),
        }),
    )
}

/// Pluecker embedding of `Gr_2(C^4)` as a hyperplane family in
/// `Gr_5(C^6)`, in the affine chart of planes spanned by the rows of
/// `[I_2 | Z]`.  Variables are ordered `(z11, z12, z21, z22)`.
pub fn pluecker() -> Result<Immersion> {
    let components = vec![
        vec![term(1.0, 0.0, vec![0, 0, 1, 0])],
        vec![term(1.0, 0.0, vec![0, 0, 0, 1])],
        vec![term(-1.0, 0.0, vec![1, 0, 0, 0])],
        vec![term(-1.0, 0.0, vec![0, 1, 0, 0])],
        vec![
            term(1.0, 0.0, vec![1, 0, 0, 1]),
            term(-1.0, 0.0, vec![0, 1, 1, 0]),
        ],
    ];
    let chart0 = hyperplane_chart(4, &components)?;
    Immersion::new(
        "pluecker",
        BaseSpace::Dense { m: 4, radius: 1.3 },
        vec![chart0],
        Some(Expectations {
            flat: true,
            parallel: true,
            min_hol: 1.0,
            hol_constant: false,
            volume: None,
            description: "Pluecker embedding of Gr_2(C^4) in Gr_5(C^6)".into(),
        }),
    )
}

/// Diagonal tensor curve `CP^1 -> Gr_q(C^{2q})`: the plane spanned by
/// `e_a + z e_{q+a}`.  Totally geodesic, quotient curvature exactly
/// `(1/q) h` times the identity.
pub fn tensor_embedding(q: usize) -> Result<Immersion> {
    if q == 0 || q > 6 {
        return Err(Error::InvalidParameter(format!(
            "tensor embedding rank must lie in 1..=6, got {q}"
        )));
    }
    let n = 2 * q;
    let mut entries: Vec<Vec<MonomialTerm>> = vec![Vec::new(); n * q];
    for a in 0..q {
        entries[a * q + a] = vec![term(1.0, 0.0, vec![0])];
        entries[(q + a) * q + a] = vec![term(1.0, 0.0, vec![1])];
    }
    let chart0 = ChartPolynomial::new(n, q, 1, entries)?;
    // z -> 1/z swaps the two block rows.
    let swap: Vec<usize> = (0..n).map(|i| (i + q) % n).collect();
    let chart1 = chart0.rotated(&permutation(&swap))?;
    Immersion::new(
        format!("tensor_embedding:{q}"),
        BaseSpace::Projective { m: 1 },
        vec![chart0, chart1],
        Some(Expectations {
            flat: true,
            parallel: true,
            min_hol: 2.0 / q as f64,
            hol_constant: true,
            volume: Some(2.0 * std::f64::consts::PI * q as f64),
            description: format!("diagonal tensor curve CP^1 in Gr_{q}(C^{n})"),
        }),
    )
}

/// The identity chart of `Gr_p(C^n)` itself: planes spanned by the columns
/// of `[I_p ; Z]`.  For `min(p, q) >= 2` the pulled-back quotient bundle is
/// *not* projectively flat — the negative control for the flatness
/// hypothesis.
pub fn identity_grassmannian(p: usize, n: usize) -> Result<Immersion> {
    if p == 0 || p >= n {
        return Err(Error::InvalidParameter(format!(
            "identity chart needs 0 < p < n, got p={p}, n={n}"
        )));
    }
    let q = n - p;
    let m = p * q;
    if m > 6 {
        return Err(Error::InvalidParameter(format!(
            "identity chart dimension pq = {m} too large (max 6)"
        )));
    }
    let mut entries: Vec<Vec<MonomialTerm>> = vec![Vec::new(); n * p];
    for j in 0..p {
        entries[j * p + j] = vec![term(1.0, 0.0, vec![0; m])];
    }
    for a in 0..q {
        for j in 0..p {
            let mut powers = vec![0u32; m];
            powers[a * p + j] = 1;
            entries[(p + a) * p + j] = vec![MonomialTerm {
                coeff: C64::new(1.0, 0.0),
                powers,
            }];
        }
    }
    let chart = ChartPolynomial::new(n, p, m, entries)?;
    let minpq = p.min(q);
    Immersion::new(
        format!("identity:p={p},n={n}"),
        BaseSpace::Dense { m, radius: 1.2 },
        vec![chart],
        Some(Expectations {
            flat: minpq == 1,
            parallel: true,
            min_hol: 2.0 / minpq as f64,
            hol_constant: minpq == 1,
            volume: None,
            description: format!("identity chart of Gr_{p}(C^{n})"),
        }),
    )
}

/// One catalog member with its parameter help.
pub struct CatalogEntry {
    pub id: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

/// All built-in members.
pub fn list() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "linear",
            params: "m=<dim>,n=<ambient> (default m=1,n=3)",
            summary: "totally geodesic CP^m in Gr_{n-1}(C^n); parallel, min Hol 2",
        },
        CatalogEntry {
            id: "veronese",
            params: "<d> in 1..=6 (default 2)",
            summary: "degree-d rational curve in Gr_d(C^{d+1}); parallel iff d <= 2, min Hol 2/d",
        },
        CatalogEntry {
            id: "segre",
            params: "none",
            summary: "CP^1 x CP^1 in Gr_3(C^4); parallel, min Hol 1 (boundary case)",
        },
        CatalogEntry {
            id: "pluecker",
            params: "none",
            summary: "Gr_2(C^4) in Gr_5(C^6); parallel, min Hol 1 (boundary case)",
        },
        CatalogEntry {
            id: "tensor_embedding",
            params: "<q> in 1..=6 (default 2)",
            summary: "diagonal CP^1 in Gr_q(C^{2q}); totally geodesic, min Hol 2/q",
        },
        CatalogEntry {
            id: "identity",
            params: "p=<plane>,n=<ambient> (default p=2,n=4)",
            summary: "identity chart of Gr_p(C^n); flatness hypothesis fails for min(p,q) >= 2",
        },
    ]
}

fn parse_params(spec: &str) -> Result<Vec<(String, usize)>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((k, v)) = part.split_once('=') {
            let val: usize = v.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("parameter `{part}` is not an integer assignment"))
            })?;
            out.push((k.trim().to_string(), val));
        } else {
            let val: usize = part.parse().map_err(|_| {
                Error::InvalidParameter(format!("parameter `{part}` is not an integer"))
            })?;
            out.push((String::new(), val));
        }
    }
    Ok(out)
}

fn get(params: &[(String, usize)], key: &str, default: usize) -> usize {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .unwrap_or(default)
}

/// Builds a catalog member from a `name[:params]` description, e.g.
/// `veronese:3`, `identity:p=2,n=4`, `tensor_embedding:2`.
pub fn build(desc: &str) -> Result<Immersion> {
    let (name, rest) = match desc.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (desc.trim(), ""),
    };
    let params = parse_params(rest)?;
    let positional = params
        .iter()
        .find(|(k, _)| k.is_empty())
        .map(|(_, v)| *v);
    match name {
        "linear" => linear(get(&params, "m", 1), get(&params, "n", 3)),
        "veronese" => veronese(positional.unwrap_or_else(|| get(&params, "d", 2))),
        "segre" => segre(),
        "pluecker" => pluecker(),
        "tensor_embedding" => {
            tensor_embedding(positional.unwrap_or_else(|| get(&params, "q", 2)))
        }
        "identity" | "identity_grassmannian" => {
            identity_grassmannian(get(&params, "p", 2), get(&params, "n", 4))
        }
        other => Err(Error::CatalogMiss(other.to_string())),
    }
}

/// The positive-test battery: members satisfying the flatness hypothesis,
/// covering parallel and non-parallel cases.
pub fn verification_battery() -> Vec<&'static str> {
    vec![
        "linear:m=1,n=3",
        "veronese:1",
        "veronese:2",
        "veronese:3",
        "veronese:4",
        "segre",
        "pluecker",
        "tensor_embedding:2",
        "tensor_embedding:3",
    ]
}
