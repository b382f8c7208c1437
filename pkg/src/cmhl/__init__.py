"""cmhl: explicit objects attached to CM elliptic curves.

Grossencharacters and their Hecke L-values, period lattices, elliptic units,
p-adic formal groups and Coates-Wiles homomorphisms, plus certificate
generation for the hypothesis checklists and L-value brackets of the
associated Selmer/Chow predictions.
"""

__version__ = "0.1.0"
