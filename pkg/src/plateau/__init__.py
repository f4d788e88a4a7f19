"""Computational checks for the complex Plateau problem in non-Kahler targets.

Modules: ``czlinalg`` (Takagi and Levi normalizations), ``morse`` (normal
forms of psh Morse germs), ``envelope`` (Hartogs figures, quadric sweep),
``forms`` (d^c / dd^c jet calculus), ``periods`` (sphere periods and the
shell obstruction), ``volumes`` (graph volumes of disc families),
``scenario`` and ``cli`` (JSON-driven runner).
"""

__version__ = "0.1.0"
