"""rkl - Root-convergence factors of GMRES(1) and rAA(1)

Predicts, measures and certifies the asymptotic convergence of restarted
GMRES with restart one (the minimal residual iteration) and of restarted
Anderson acceleration with window one.

Features:
- Theory: worst-case and initial-guess dependent root-convergence factors
- Solvers: GMRES(1), rAA(1) and the stationary iteration with full traces
- Eigenpairs: closed-form nonlinear eigenpairs of I2, Pi, Psi and Upsilon
- Exact: rational counterexamples to the rAA(1) factor conjecture
- Experiments: seeded ensembles, CSV output and SVG figures
"""

__version__ = "0.1.0"
__author__ = "Sergei Chistokhin"
__email__ = "Sergei@Chistokhin.com"
__license__ = "MIT"

__all__ = ["__version__"]
