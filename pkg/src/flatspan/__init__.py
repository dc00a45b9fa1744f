"""Exact span calculus over affine schemes.

Certified finite-locally-free correspondences, torus cut families,
filtration searches, and rational contractions, all presented by ideals
over exact coefficient fields.
"""

__version__ = "0.1.0"
