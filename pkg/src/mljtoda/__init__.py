"""Mie-Lennard-Jones chains as perturbations of the Toda chain."""
