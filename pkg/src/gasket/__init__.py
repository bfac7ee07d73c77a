"""Exact counting, exponent bounds and projective fractals for matrix semigroups."""
