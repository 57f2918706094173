//! Bounded signed Borel measures as a grid density plus a finite atom list,
//! with total-variation bookkeeping, Jordan decomposition, and the
//! diffuse/concentrated split driven by a point-polarity table.

use thiserror::Error;

use crate::domain::{Domain, DomainKind};
use crate::grid::GridFunction;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<S> {
    pub location: S,
    pub weight: S,
}

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("atom location {0} is not strictly interior")]
    AtomOutsideDomain(f64),
    #[error("duplicate atom location {0}")]
    DuplicateAtom(f64),
    #[error("atom weights must be nonzero")]
    ZeroWeight,
    #[error("density length {got} does not match grid size {want}")]
    DensityLength { got: usize, want: usize },
    #[error("operation requires a nonnegative measure")]
    SignedMeasure,
}

/// mu = g·m + sum of weighted Dirac atoms. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure<S> {
    density: Option<GridFunction<S>>,
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> Measure<S> {
    pub fn zero() -> Self {
        Self {
            density: None,
            atoms: Vec::new(),
        }
    }

    pub fn from_density(dom: &Domain<S>, density: GridFunction<S>) -> Result<Self, MeasureError> {
        if density.len() != dom.len() {
            return Err(MeasureError::DensityLength {
                got: density.len(),
                want: dom.len(),
            });
        }
        Ok(Self {
            density: Some(density),
            atoms: Vec::new(),
        })
    }

    pub fn from_atoms(atoms: Vec<Atom<S>>) -> Result<Self, MeasureError> {
        Self::new_inner(None, atoms)
    }

    pub fn new(
        dom: &Domain<S>,
        density: Option<GridFunction<S>>,
        atoms: Vec<Atom<S>>,
    ) -> Result<Self, MeasureError> {
        if let Some(g) = &density {
            if g.len() != dom.len() {
                return Err(MeasureError::DensityLength {
                    got: g.len(),
                    want: dom.len(),
                });
            }
        }
        Self::new_inner(density, atoms)
    }

    fn new_inner(density: Option<GridFunction<S>>, atoms: Vec<Atom<S>>) -> Result<Self, MeasureError> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.location > S::zero() && a.location < S::one()) {
                return Err(MeasureError::AtomOutsideDomain(a.location.as_f64()));
            }
            if a.weight == S::zero() {
                return Err(MeasureError::ZeroWeight);
            }
            for b in &atoms[..i] {
                if a.location == b.location {
                    return Err(MeasureError::DuplicateAtom(a.location.as_f64()));
                }
            }
        }
        Ok(Self { density, atoms })
    }

    pub fn dirac(location: S, weight: S) -> Result<Self, MeasureError> {
        Self::from_atoms(vec![Atom { location, weight }])
    }

    /// Lebesgue-uniform unit measure g ≡ 1 relative to the reference measure.
    pub fn lebesgue(dom: &Domain<S>) -> Self {
        Self {
            density: Some(GridFunction::constant(dom.len(), S::one())),
            atoms: Vec::new(),
        }
    }

    #[inline]
    pub fn density(&self) -> Option<&GridFunction<S>> {
        self.density.as_ref()
    }

    #[inline]
    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn atom_locations(&self) -> Vec<S> {
        self.atoms.iter().map(|a| a.location).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
            && self
                .density
                .as_ref()
                .map_or(true, |g| g.values().iter().all(|v| *v == S::zero()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.weight >= S::zero())
            && self
                .density
                .as_ref()
                .map_or(true, |g| g.values().iter().all(|v| *v >= S::zero()))
    }

    /// a·mu + b·nu, merging atoms at identical locations.
    pub fn linear_combination(a: S, mu: &Self, b: S, nu: &Self) -> Self {
        let density = match (&mu.density, &nu.density) {
            (None, None) => None,
            (Some(g), None) => Some(g.scale(a)),
            (None, Some(h)) => Some(h.scale(b)),
            (Some(g), Some(h)) => Some(g.zip(h, |x, y| a * x + b * y)),
        };
        let mut atoms: Vec<Atom<S>> = Vec::new();
        for (coef, src) in [(a, &mu.atoms), (b, &nu.atoms)] {
            for at in src {
                let w = coef * at.weight;
                if w == S::zero() {
                    continue;
                }
                if let Some(existing) = atoms.iter_mut().find(|e| e.location == at.location) {
                    existing.weight += w;
                } else {
                    atoms.push(Atom {
                        location: at.location,
                        weight: w,
                    });
                }
            }
        }
        atoms.retain(|at| at.weight != S::zero());
        Self { density, atoms }
    }

    pub fn scale(&self, a: S) -> Self {
        Self::linear_combination(a, self, S::zero(), &Self::zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::linear_combination(S::one(), self, S::one(), other)
    }
}

/// Total variation norm: quadrature of |g| plus the sum of |atom weights|.
pub fn tv_norm<S: Scalar>(dom: &Domain<S>, mu: &Measure<S>) -> S {
    let density_part = mu
        .density()
        .map_or(S::zero(), |g| dom.l1_norm(g));
    let atom_part = mu
        .atoms()
        .iter()
        .fold(S::zero(), |acc, a| acc + a.weight.abs());
    density_part + atom_part
}

/// Jordan decomposition (mu+, mu-): pointwise positive/negative parts of the
/// density and a sign split of the atom list.
pub fn pos_neg_parts<S: Scalar>(mu: &Measure<S>) -> (Measure<S>, Measure<S>) {
    let (dp, dn) = match mu.density() {
        None => (None, None),
        Some(g) => (
            Some(g.map(|v| v.max(S::zero()))),
            Some(g.map(|v| (-v).max(S::zero()))),
        ),
    };
    let pos_atoms = mu
        .atoms()
        .iter()
        .filter(|a| a.weight > S::zero())
        .copied()
        .collect();
    let neg_atoms = mu
        .atoms()
        .iter()
        .filter(|a| a.weight < S::zero())
        .map(|a| Atom {
            location: a.location,
            weight: -a.weight,
        })
        .collect();
    (
        Measure {
            density: dp,
            atoms: pos_atoms,
        },
        Measure {
            density: dn,
            atoms: neg_atoms,
        },
    )
}

/// Verdict of the point-polarity table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarityVerdict {
    pub is_polar: bool,
    pub rule: &'static str,
}

/// Classify a finite point set as polar (capacity zero, never hit by the
/// process) or not, by the classical table for the model operators:
/// one-dimensional Brownian motion hits points; the symmetric stable process
/// hits points iff its order exceeds 1; Brownian motion in dimension >= 2
/// does not hit points (the ball center included).
pub fn classify_polar<S: Scalar>(
    dom: &Domain<S>,
    points: &[S],
) -> Result<PolarityVerdict, crate::domain::DomainError> {
    if points.is_empty() {
        return Ok(PolarityVerdict {
            is_polar: true,
            rule: "empty-set",
        });
    }
    for &p in points {
        let interior = p > S::zero() && p < S::one();
        let ball_center = matches!(dom.kind(), DomainKind::RadialBallLaplacian(_)) && p == S::zero();
        if !interior && !ball_center {
            return Err(crate::domain::DomainError::OutOfDomain(p.as_f64()));
        }
    }
    let verdict = match dom.kind() {
        DomainKind::IntervalLaplacian => PolarityVerdict {
            is_polar: false,
            rule: "interval-brownian-hits-points",
        },
        DomainKind::IntervalFractional(alpha) => {
            if alpha > S::one() {
                PolarityVerdict {
                    is_polar: false,
                    rule: "stable-order-above-one-hits-points",
                }
            } else {
                PolarityVerdict {
                    is_polar: true,
                    rule: "stable-order-at-most-one-misses-points",
                }
            }
        }
        DomainKind::RadialBallLaplacian(_) => {
            if points.iter().all(|&p| p == S::zero()) {
                PolarityVerdict {
                    is_polar: true,
                    rule: "ball-center-polar",
                }
            } else {
                PolarityVerdict {
                    is_polar: true,
                    rule: "ball-points-polar",
                }
            }
        }
    };
    Ok(verdict)
}

/// Split mu = mu_d + mu_c: the density and the atoms at non-polar locations
/// form the diffuse part; atoms at polar locations form the concentrated
/// part. Exact atom-by-atom, density untouched.
pub fn decompose<S: Scalar>(
    dom: &Domain<S>,
    mu: &Measure<S>,
) -> Result<(Measure<S>, Measure<S>), crate::domain::DomainError> {
    let mut diffuse_atoms = Vec::new();
    let mut concentrated_atoms = Vec::new();
    for a in mu.atoms() {
        let verdict = classify_polar(dom, &[a.location])?;
        if verdict.is_polar {
            concentrated_atoms.push(*a);
        } else {
            diffuse_atoms.push(*a);
        }
    }
    Ok((
        Measure {
            density: mu.density().cloned(),
            atoms: diffuse_atoms,
        },
        Measure {
            density: None,
            atoms: concentrated_atoms,
        },
    ))
}
