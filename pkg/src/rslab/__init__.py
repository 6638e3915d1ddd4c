"""rslab: a numerical laboratory for Renyi-Sobolev inequalities on finite
Markov semigroups, with graph spectral tools and concentration bounds."""

__version__ = "0.1.0"
