"""Transfer operators with Brownian random potentials on full shift spaces:
exact symbolic plumbing, bridge-sampled paths, Perron spectra, quenched
pressure, and reproducible Monte Carlo."""

__version__ = "0.1.0"
