"""Secure IRS-assisted NOMA downlink: channel simulator, secrecy objective,
a from-scratch autodiff engine, the CO-GNN optimiser and classical baselines."""

__version__ = "0.1.0"
