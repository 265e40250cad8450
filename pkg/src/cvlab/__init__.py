"""Critical values of random holomorphic sections on the Riemann sphere.

Modules
-------
geometry     Fubini-Study model of the sphere, charts, Bergman kernel data.
ensembles    Reproducible Gaussian and spherical random sections.
densities    Limit and finite-degree critical-value densities.
critpoints   Exhaustive critical-point finder with Morse classification.
oracle       Resultant-based algebraic cross-check for small degree.
experiments  Monte Carlo harness and convergence studies.
cli          ``cvlab`` command-line driver.
"""

__version__ = "0.1.0"
