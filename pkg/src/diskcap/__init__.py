"""Validated spectral transforms and computer-assisted existence proofs on the disk.

Subpackages build on each other roughly bottom-up:

- ``interval``: directed-rounding interval scalars, vectors, matrices
- ``jacobi``: one-parameter-family orthogonal polynomials on (-1, 1)
- ``radii``: Newton-Kantorovich radii-polynomial certification
- ``quadrature``: validated Gauss rules via certified tridiagonal eigenpairs
- ``transform``: coefficient <-> grid matrix transforms with closed-form inverse
- ``zernike``: disk polynomial series, weighted sequence spaces, operator calculus
- ``proofs``: existence proofs for semilinear Dirichlet problems, certificates
- ``cli``: command-line front end
"""

__version__ = "0.1.0"
